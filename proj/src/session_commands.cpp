#include "patternd/session_commands.hpp"

namespace patternd {

void CommandRecord::execute(Document& doc) {
    doc.content_ += text_;
    undo_len_ = text_.size();
}

void CommandRecord::undo(Document& doc) const {
    auto& c = doc.content_;
    c.resize(c.size() >= undo_len_ ? c.size() - undo_len_ : 0);
}

std::string CommandRecord::summary() const { return "write \"" + text_ + "\""; }

std::size_t execute_command(Document& doc, Caretaker& caretaker, CommandRecord cmd) {
    cmd.execute(doc);
    caretaker.history_.push_back(std::move(cmd));
    return doc.size();
}

std::optional<std::string> undo_last(Document& doc, Caretaker& caretaker) {
    if (caretaker.history_.empty()) return std::nullopt;
    caretaker.history_.back().undo(doc);
    caretaker.history_.pop_back();
    return doc.content();
}

std::uint64_t save_memento(const Document& doc, Caretaker& caretaker) {
    auto id = caretaker.next_id_++;
    caretaker.snapshots_.emplace(id, doc.save());
    return id;
}

std::string restore_memento(Document& doc, Caretaker& caretaker, std::uint64_t id) {
    auto it = caretaker.snapshots_.find(id);
    if (it == caretaker.snapshots_.end()) throw UnknownSnapshot(id);
    doc.restore(it->second);
    caretaker.history_.clear();
    return doc.content();
}

Cursor<std::string> history_cursor(const Caretaker& caretaker) {
    std::vector<std::string> out;
    out.reserve(caretaker.history_.size());
    for (auto& cmd : caretaker.history_) out.push_back(cmd.summary());
    return Cursor<std::string>(std::move(out));
}

}  // namespace patternd
