#include "patternd/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <set>

#include "patternd/protocol.hpp"

namespace patternd {

namespace {

std::atomic<std::uint64_t> g_next_session{1};

std::optional<std::int64_t> to_int(std::string_view text) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

// Splits on runs of spaces/tabs.
std::vector<std::string_view> tokens(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        auto start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

Reply no_args(const Request& r) { return err(ErrCode::parse, r.verb + " takes no arguments"); }

class SessionWatcher final : public TemperatureObserver {
public:
    explicit SessionWatcher(const Session& s) : session_(&s) {}
    std::string name() const override { return session_->id(); }
    void update(std::int64_t temperature) override {
        session_->push(evt("temp " + format_temperature_display(session_->id(), temperature)));
    }

private:
    const Session* session_;
};

class SessionChatMember final : public ChatMember {
public:
    explicit SessionChatMember(const Session& s) : session_(&s) {}
    std::string name() const override { return session_->id(); }
    void receive(std::string_view line) override { session_->push(evt("chat " + std::string(line))); }

private:
    const Session* session_;
};

using VerbFn = Reply (Service::*)(Session&, const Request&);

class VerbGroup final : public Handler {
public:
    VerbGroup(std::string name, std::set<std::string, std::less<>> verbs, Service& service, VerbFn fn)
        : name_(std::move(name)), verbs_(std::move(verbs)), service_(&service), fn_(fn) {}

    bool accepts(const Request& r) const override { return verbs_.count(r.verb) != 0; }
    Reply answer(const Request& r) const override { return (service_->*fn_)(*r.session, r); }
    std::string name() const override { return name_; }

private:
    std::string name_;
    std::set<std::string, std::less<>> verbs_;
    Service* service_;
    VerbFn fn_;
};

}  // namespace

bool Session::watching() const { return watcher_ != nullptr; }

std::shared_ptr<Handler> ServiceHandlerFactory::make(std::string_view kind) const {
    auto& s = *service_;
    if (kind == "admin") return std::make_shared<VerbGroup>("admin", std::set<std::string, std::less<>>{"PING", "QUIT", "STATS"}, s, &Service::do_admin);
    if (kind == "eval") return std::make_shared<VerbGroup>("eval", std::set<std::string, std::less<>>{"EVAL", "LET"}, s, &Service::do_eval);
    if (kind == "doc") {
        return std::make_shared<VerbGroup>(
            "doc", std::set<std::string, std::less<>>{"WRITE", "SHOW", "UNDO", "SNAPSHOT", "RESTORE"}, s,
            &Service::do_doc);
    }
    if (kind == "price") return std::make_shared<VerbGroup>("price", std::set<std::string, std::less<>>{"PRICE"}, s, &Service::do_price);
    if (kind == "player") {
        return std::make_shared<VerbGroup>("player", std::set<std::string, std::less<>>{"PLAY", "PAUSE", "STOP"}, s,
                                           &Service::do_player);
    }
    return std::make_shared<VerbGroup>("events", std::set<std::string, std::less<>>{"WATCH", "UNWATCH", "TEMP", "SAY"},
                                       s, &Service::do_events);
}

Service::Service(std::string_view family, Registry& registry, std::shared_ptr<Logger> logger)
    : family_(create_protocol_family(family)),
      registry_(&registry),
      logger_(logger ? std::move(logger) : registry.logger()),
      temperature_(logger_),
      stats_([reg = registry_] { return std::make_unique<RegistryStats>(*reg); }) {
    ServiceHandlerFactory factory(*this);
    // dispatch order is fixed: admin, eval, doc, price, player, events
    static constexpr std::array<std::string_view, 6> kOrder{"admin", "eval", "doc", "price", "player", "events"};
    std::vector<std::shared_ptr<Handler>> bare;
    std::vector<std::shared_ptr<Handler>> wrapped;
    for (auto kind : kOrder) {
        bare.push_back(create_handler(factory, kind));
        wrapped.push_back(decorate_handler(create_handler(factory, kind), {Middleware::logging, Middleware::timing},
                                           logger_, registry));
    }
    bare_chain_ = link_chain(bare);
    chain_ = link_chain(wrapped);
}

Service::~Service() = default;

std::shared_ptr<Session> Service::open_session(Session::PushFn push) {
    auto n = g_next_session.fetch_add(1);
    // closing on release keeps the room and subject free of dangling members
    std::shared_ptr<Session> s(new Session("user-" + std::to_string(n), std::move(push)), [this](Session* p) {
        close_session(*p);
        delete p;
    });
    s->chat_member_ = std::make_shared<SessionChatMember>(*s);
    room_.join(s->chat_member_);
    registry_->increment("sessions.opened");
    return s;
}

void Service::close_session(Session& session) {
    if (!session.chat_member_ && !session.watcher_) return;
    if (session.chat_member_) {
        room_.leave(session.id());
        session.chat_member_.reset();
    }
    if (session.watcher_) {
        if (temperature_.is_subscribed(session.watcher_)) temperature_.unsubscribe(session.watcher_);
        session.watcher_.reset();
    }
    registry_->increment("sessions.closed");
}

Reply Service::handle_line(Session& session, std::string_view line) {
    if (line.size() > kMaxLineBytes) {
        return err(ErrCode::limit, "request longer than " + std::to_string(kMaxLineBytes) + " bytes");
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    Request request;
    try {
        request = family_.parser().parse(line);
    } catch (const RequestParseError& e) {
        return err(ErrCode::parse, e.what());
    }
    return handle_request(session, std::move(request));
}

Reply Service::handle_request(Session& session, Request request) {
    request.session = &session;
    try {
        if (auto reply = chain_handle(chain_, request)) return *reply;
        return err(ErrCode::unknown, "unknown verb '" + request.verb + "'");
    } catch (const std::exception& e) {
        logger_->log_at(LogLevel::error, request.verb + " failed: " + e.what());
        return err(ErrCode::internal, e.what());
    } catch (...) {
        return err(ErrCode::internal, "unexpected failure");
    }
}

// --- verb groups ---------------------------------------------------------------

Reply Service::do_admin(Session&, const Request& r) {
    if (!r.args.empty()) return no_args(r);
    if (r.verb == "PING") return ok("pong");
    if (r.verb == "QUIT") return ok("bye");
    std::string out;
    for (auto& [name, value] : stats_.request()) {
        if (!out.empty()) out += ' ';
        out += name + "=" + std::to_string(value);
    }
    return ok(std::move(out));
}

Reply Service::do_eval(Session& s, const Request& r) {
    if (r.verb == "LET") {
        auto t = tokens(r.args);
        if (t.size() != 2) return err(ErrCode::parse, "usage: LET <ident> <int>");
        if (!is_identifier(t[0])) return err(ErrCode::parse, "invalid identifier '" + std::string(t[0]) + "'");
        auto value = to_int(t[1]);
        if (!value) return err(ErrCode::parse, "invalid integer '" + std::string(t[1]) + "'");
        s.vars.set(std::string(t[0]), *value);
        return ok();
    }
    ExprPtr tree;
    try {
        tree = parse_expr(r.args, atoms_);
    } catch (const ParseError& e) {
        return err(ErrCode::parse, e.what());
    }
    try {
        return ok(std::to_string(eval_expr(*tree, s.vars)));
    } catch (const EvalError& e) {
        return err(ErrCode::eval, e.what());
    }
}

Reply Service::do_doc(Session& s, const Request& r) {
    if (r.verb == "WRITE") {
        std::string text;
        try {
            text = unescape_doc(r.args);
        } catch (const EscapeError& e) {
            return err(ErrCode::parse, e.what());
        }
        return ok(std::to_string(execute_command(s.doc, s.caretaker, CommandRecord::write(std::move(text)))));
    }
    if (r.verb == "RESTORE") {
        auto t = tokens(r.args);
        std::optional<std::int64_t> id;
        if (t.size() == 1) id = to_int(t[0]);
        if (!id || *id < 0) return err(ErrCode::parse, "usage: RESTORE <snapshot-id>");
        try {
            return ok(escape_doc(restore_memento(s.doc, s.caretaker, static_cast<std::uint64_t>(*id))));
        } catch (const UnknownSnapshot& e) {
            return err(ErrCode::state, e.what());
        }
    }
    if (!r.args.empty()) return no_args(r);
    if (r.verb == "SHOW") return ok(escape_doc(s.doc.content()));
    if (r.verb == "UNDO") {
        auto restored = undo_last(s.doc, s.caretaker);
        if (!restored) return err(ErrCode::empty, "nothing to undo");
        return ok(escape_doc(*restored));
    }
    return ok(std::to_string(save_memento(s.doc, s.caretaker)));
}

Reply Service::do_price(Session&, const Request& r) {
    auto t = tokens(r.args);
    if (t.size() != 2) return err(ErrCode::parse, "usage: PRICE <int> <strategy>");
    auto major = to_int(t[0]);
    if (!major || *major < 0 || *major > INT64_MAX / 10000) {
        return err(ErrCode::parse, "invalid price '" + std::string(t[0]) + "'");
    }
    try {
        auto strategy = parse_strategy(t[1]);
        return ok(format_money(apply_discount(strategy, *major * 100)));
    } catch (const StrategyError& e) {
        return err(ErrCode::parse, e.what());
    }
}

Reply Service::do_player(Session& s, const Request& r) {
    if (!r.args.empty()) return no_args(r);
    auto button = r.verb == "PLAY" ? PlayerButton::play : r.verb == "PAUSE" ? PlayerButton::pause : PlayerButton::stop;
    auto t = player_press(s.player, button);
    s.player = t.next;
    return ok(std::move(t.message));
}

Reply Service::do_events(Session& s, const Request& r) {
    if (r.verb == "WATCH" || r.verb == "UNWATCH") {
        if (r.args != "temp") return err(ErrCode::parse, "unknown topic '" + r.args + "'; only temp");
        if (r.verb == "WATCH") {
            if (s.watcher_) return err(ErrCode::state, "already watching temp");
            auto watcher = std::make_shared<SessionWatcher>(s);
            temperature_.subscribe(watcher);
            s.watcher_ = std::move(watcher);
            return ok();
        }
        if (!s.watcher_) return err(ErrCode::state, "not watching temp");
        temperature_.unsubscribe(s.watcher_);
        s.watcher_.reset();
        return ok();
    }
    if (r.verb == "TEMP") {
        auto value = to_int(r.args);
        if (!value) return err(ErrCode::parse, "usage: TEMP <int>");
        return ok(std::to_string(temperature_.publish_state(*value)));
    }
    if (!s.chat_member_) return err(ErrCode::state, "session has left the room");
    return ok(std::to_string(room_.send(s.id(), r.args)));
}

}  // namespace patternd
