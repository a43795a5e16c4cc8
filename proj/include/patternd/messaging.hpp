#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "patternd/logging.hpp"

namespace patternd {

class Session;

class MessagingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Requests and replies
// ---------------------------------------------------------------------------

struct Request {
    std::string verb;
    std::string args;
    Session* session = nullptr;
};

enum class ErrCode { eval, empty, unknown, parse, state, limit, internal };

std::string_view to_string(ErrCode code);
std::optional<ErrCode> err_code_from_string(std::string_view token);

struct OkReply {
    std::string payload;
    bool operator==(const OkReply&) const = default;
};

struct ErrReply {
    ErrCode code = ErrCode::internal;
    std::string message;
    bool operator==(const ErrReply&) const = default;
};

struct EvtReply {
    std::string line;
    bool operator==(const EvtReply&) const = default;
};

using Reply = std::variant<OkReply, ErrReply, EvtReply>;

inline Reply ok(std::string payload = {}) { return OkReply{std::move(payload)}; }
inline Reply err(ErrCode code, std::string message) { return ErrReply{code, std::move(message)}; }
inline Reply evt(std::string line) { return EvtReply{std::move(line)}; }

inline bool is_ok(const Reply& r) { return std::holds_alternative<OkReply>(r); }
inline bool is_err(const Reply& r) { return std::holds_alternative<ErrReply>(r); }

// ---------------------------------------------------------------------------
// Chain of responsibility
// ---------------------------------------------------------------------------

/// A chain node either answers a request or leaves it to its successor.
template <class Req, class Rep>
class ChainNode {
public:
    using request_type = Req;
    using reply_type = Rep;

    virtual ~ChainNode() = default;

    virtual bool accepts(const Req& request) const = 0;
    virtual Rep answer(const Req& request) const = 0;
    virtual std::string name() const { return "handler"; }

    const std::shared_ptr<ChainNode>& successor() const noexcept { return next_; }
    void set_successor(std::shared_ptr<ChainNode> next) { next_ = std::move(next); }

private:
    std::shared_ptr<ChainNode> next_;
};

/// First node whose predicate accepts produces the reply; nullopt when the
/// chain is exhausted.
template <class Req, class Rep>
std::optional<Rep> chain_handle(const ChainNode<Req, Rep>* head, const Req& request) {
    for (auto* node = head; node; node = node->successor().get()) {
        if (node->accepts(request)) return node->answer(request);
    }
    return std::nullopt;
}

template <class Req, class Rep>
std::optional<Rep> chain_handle(const std::shared_ptr<ChainNode<Req, Rep>>& head, const Req& request) {
    return chain_handle(head.get(), request);
}

/// Links nodes in the given order and returns the head (null if empty).
template <class Node>
std::shared_ptr<Node> link_chain(const std::vector<std::shared_ptr<Node>>& nodes) {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) nodes[i]->set_successor(nodes[i + 1]);
    if (!nodes.empty()) nodes.back()->set_successor(nullptr);
    return nodes.empty() ? nullptr : nodes.front();
}

/// Chain node type used for verb dispatch.
using Handler = ChainNode<Request, Reply>;

// ---------------------------------------------------------------------------
// Observer
// ---------------------------------------------------------------------------

class TemperatureObserver {
public:
    virtual ~TemperatureObserver() = default;
    virtual std::string name() const = 0;
    virtual void update(std::int64_t temperature) = 0;
};

/// "<name>: The current temperature is 25.0°C"
std::string format_temperature_display(std::string_view observer_name, std::int64_t temperature);

/// Push-model subject. Notifications go to the observer list as it stood
/// when publish began, in subscription order; publishes are serialized.
class Subject {
public:
    explicit Subject(std::shared_ptr<Logger> failure_log = nullptr);

    /// Throws MessagingError on a duplicate.
    void subscribe(std::shared_ptr<TemperatureObserver> observer);
    /// Throws MessagingError if not subscribed.
    void unsubscribe(const std::shared_ptr<TemperatureObserver>& observer);
    bool is_subscribed(const std::shared_ptr<TemperatureObserver>& observer) const;

    /// Stores the value and calls every observer once. A throwing observer is
    /// logged and skipped. Returns the number of update calls made.
    std::size_t publish_state(std::int64_t value);

    std::int64_t state() const;
    std::size_t observer_count() const;

private:
    std::shared_ptr<Logger> failure_log_;
    std::mutex publish_mu_;
    mutable std::mutex mu_;
    std::vector<std::shared_ptr<TemperatureObserver>> observers_;
    std::int64_t state_ = 0;
};

/// Observer that keeps the display lines it has produced.
class DisplayObserver final : public TemperatureObserver {
public:
    explicit DisplayObserver(std::string name) : name_(std::move(name)) {}
    std::string name() const override { return name_; }
    void update(std::int64_t temperature) override;
    std::vector<std::string> lines() const;

private:
    std::string name_;
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
};

// ---------------------------------------------------------------------------
// Mediator
// ---------------------------------------------------------------------------

class ChatMember {
public:
    virtual ~ChatMember() = default;
    virtual std::string name() const = 0;
    virtual void receive(std::string_view line) = 0;
};

/// Members never talk to each other directly; every line goes through the room.
class ChatRoom {
public:
    /// Throws MessagingError if a member with that name is already present.
    void join(std::shared_ptr<ChatMember> member);
    bool leave(std::string_view name);
    bool is_member(std::string_view name) const;
    std::size_t size() const;

    /// Delivers "[<user>] <msg>" to every member, sender included. Throws
    /// MessagingError when the sender is not a member.
    std::size_t send(std::string_view user, std::string_view message);

private:
    mutable std::mutex mu_;
    std::vector<std::shared_ptr<ChatMember>> members_;
};

std::string format_chat_line(std::string_view user, std::string_view message);

namespace demo {

using StaffHandler = ChainNode<std::string, std::string>;

/// Junior -> Manager -> Director, answering "simple", "moderate", "complex".
std::shared_ptr<StaffHandler> make_staffing_chain();

}  // namespace demo

}  // namespace patternd
