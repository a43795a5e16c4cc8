#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "patternd/creational.hpp"
#include "patternd/expr.hpp"
#include "patternd/messaging.hpp"
#include "patternd/policies.hpp"
#include "patternd/session_commands.hpp"
#include "patternd/structural.hpp"

namespace patternd {

class Service;

/// Per-connection state. The server lets at most one request touch a session
/// at a time; only push() may be called from other threads.
class Session {
public:
    using PushFn = std::function<void(const Reply&)>;

    const std::string& id() const noexcept { return id_; }

    Document doc;
    Caretaker caretaker;
    PlayerState player = PlayerState::stopped;
    Context vars;

    /// Delivers an asynchronous EVT to this session's connection.
    void push(const Reply& reply) const {
        if (push_) push_(reply);
    }

    bool watching() const;

private:
    friend class Service;
    Session(std::string id, PushFn push) : id_(std::move(id)), push_(std::move(push)) {}

    std::string id_;
    PushFn push_;
    std::shared_ptr<TemperatureObserver> watcher_;
    std::shared_ptr<ChatMember> chat_member_;
};

/// Concrete creator for the six verb groups.
class ServiceHandlerFactory final : public HandlerFactory {
public:
    explicit ServiceHandlerFactory(Service& service) : service_(&service) {}

protected:
    std::shared_ptr<Handler> make(std::string_view kind) const override;

private:
    Service* service_;
};

/// Verb dispatch shared by every session of one server.
class Service {
public:
    /// logger defaults to the registry's logger.
    explicit Service(std::string_view family = "text", Registry& registry = Registry::instance(),
                     std::shared_ptr<Logger> logger = nullptr);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// New session "user-<n>", joined to the chat room. push receives EVT
    /// replies, possibly from other threads. Releasing the last reference
    /// closes the session, so sessions must not outlive the service.
    std::shared_ptr<Session> open_session(Session::PushFn push = nullptr);
    /// Leaves the room and drops any watch subscription. Idempotent.
    void close_session(Session& session);

    /// One request line (no terminator) to one reply.
    Reply handle_line(Session& session, std::string_view line);
    /// Routes an already-parsed request through the handler chain.
    Reply handle_request(Session& session, Request request);

    /// The rendered form of a reply in this service's family.
    std::string render(const Reply& reply) const { return family_.renderer().render(reply); }

    const ProtocolFamily& family() const noexcept { return family_; }
    Registry& registry() const noexcept { return *registry_; }
    LazyStatsProxy& stats() noexcept { return stats_; }
    std::size_t chat_size() const { return room_.size(); }
    std::size_t watcher_count() const { return temperature_.observer_count(); }

    /// Chain head, wrapped in logging and timing middleware.
    const std::shared_ptr<Handler>& chain() const noexcept { return chain_; }
    /// The same chain without middleware.
    const std::shared_ptr<Handler>& bare_chain() const noexcept { return bare_chain_; }

private:
    friend class ServiceHandlerFactory;

    Reply do_admin(Session& s, const Request& r);
    Reply do_eval(Session& s, const Request& r);
    Reply do_doc(Session& s, const Request& r);
    Reply do_price(Session& s, const Request& r);
    Reply do_player(Session& s, const Request& r);
    Reply do_events(Session& s, const Request& r);

    ProtocolFamily family_;
    Registry* registry_;
    std::shared_ptr<Logger> logger_;
    AtomPool atoms_;
    Subject temperature_;
    ChatRoom room_;
    LazyStatsProxy stats_;
    std::shared_ptr<Handler> bare_chain_;
    std::shared_ptr<Handler> chain_;
};

/// Convenience for tests: a throwaway session on `service`.
inline std::shared_ptr<Session> make_session(Service& service) { return service.open_session(); }

}  // namespace patternd
