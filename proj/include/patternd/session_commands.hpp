#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patternd/expr.hpp"

namespace patternd {

class Document;

/// Opaque snapshot of a document. Only Document can read it back.
class Memento {
public:
    Memento(const Memento&) = default;
    Memento& operator=(const Memento&) = default;

private:
    friend class Document;
    explicit Memento(std::string state) : state_(std::move(state)) {}
    std::string state_;
};

class CommandRecord;

/// Receiver. Content changes only through commands, undo, or restore.
class Document {
public:
    const std::string& content() const noexcept { return content_; }
    std::size_t size() const noexcept { return content_.size(); }

    Memento save() const { return Memento(content_); }
    void restore(const Memento& memento) { content_ = memento.state_; }

private:
    friend class CommandRecord;
    std::string content_;
};

/// Write(text). Undo removes exactly the suffix this command appended.
class CommandRecord {
public:
    static CommandRecord write(std::string text) { return CommandRecord(std::move(text)); }

    void execute(Document& doc);
    void undo(Document& doc) const;

    const std::string& text() const noexcept { return text_; }
    std::size_t undo_len() const noexcept { return undo_len_; }
    /// e.g. write "Hello "
    std::string summary() const;

private:
    explicit CommandRecord(std::string text) : text_(std::move(text)) {}
    std::string text_;
    std::size_t undo_len_ = 0;
};

class UnknownSnapshot : public std::out_of_range {
public:
    explicit UnknownSnapshot(std::uint64_t id)
        : std::out_of_range("unknown snapshot id " + std::to_string(id)), id_(id) {}
    std::uint64_t id() const noexcept { return id_; }

private:
    std::uint64_t id_;
};

/// Holds history and snapshots without looking inside them.
class Caretaker {
public:
    std::size_t history_size() const noexcept { return history_.size(); }
    std::size_t snapshot_count() const noexcept { return snapshots_.size(); }
    bool has_snapshot(std::uint64_t id) const { return snapshots_.count(id) != 0; }

private:
    friend std::size_t execute_command(Document&, Caretaker&, CommandRecord);
    friend std::optional<std::string> undo_last(Document&, Caretaker&);
    friend std::uint64_t save_memento(const Document&, Caretaker&);
    friend std::string restore_memento(Document&, Caretaker&, std::uint64_t);
    friend Cursor<std::string> history_cursor(const Caretaker&);

    std::vector<CommandRecord> history_;
    std::map<std::uint64_t, Memento> snapshots_;
    std::uint64_t next_id_ = 1;
};

/// Returns the new content length.
std::size_t execute_command(Document& doc, Caretaker& caretaker, CommandRecord cmd);

/// Restored content, or nullopt when the history is empty.
std::optional<std::string> undo_last(Document& doc, Caretaker& caretaker);

/// Ids start at 1 and are never reused within a caretaker.
std::uint64_t save_memento(const Document& doc, Caretaker& caretaker);

/// Replaces the content and clears the command history. Throws
/// UnknownSnapshot for an id never issued.
std::string restore_memento(Document& doc, Caretaker& caretaker, std::uint64_t id);

/// Oldest first.
Cursor<std::string> history_cursor(const Caretaker& caretaker);

}  // namespace patternd
