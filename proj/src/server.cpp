#include "patternd/server.hpp"

#include <cerrno>
#include <cstring>
#include <deque>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/signalfd.h>
#include <sys/socket.h>
#include <unistd.h>

#include "patternd/protocol.hpp"

namespace patternd {

namespace {

// Stop reading from a connection that has this many unanswered lines or
// this many unsent bytes, until it catches up.
constexpr std::size_t kMaxQueuedLines = 256;
constexpr std::size_t kMaxOutBytes = 1 << 20;
constexpr auto kFlushGrace = std::chrono::seconds(1);

}  // namespace

sigset_t block_shutdown_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    if (int rc = pthread_sigmask(SIG_BLOCK, &set, nullptr); rc != 0) {
        throw ReactorError(std::string("pthread_sigmask: ") + std::strerror(rc));
    }
    return set;
}

struct Server::Conn {
    struct Line {
        std::string text;
        bool too_long = false;
    };

    std::uint64_t id = 0;
    int fd = -1;
    std::shared_ptr<Session> session;
    std::string in;
    std::string out;
    std::deque<Line> queue;
    Interest interest = Interest::readable();
    bool busy = false;        // a request is on the pool
    bool closing = false;     // QUIT answered; close once flushed
    bool eof = false;         // peer stopped sending
    bool discarding = false;  // inside an overlong line
};

class Server::Acceptor final : public EventHandler {
public:
    explicit Acceptor(Server& s) : server_(&s) {}
    void on_readable(Reactor&, int fd) override { server_->accept_ready(fd); }

private:
    Server* server_;
};

class Server::ConnHandler final : public EventHandler {
public:
    explicit ConnHandler(Server& s) : server_(&s) {}
    void on_readable(Reactor&, int fd) override { server_->conn_readable(fd); }
    void on_writable(Reactor&, int fd) override { server_->conn_writable(fd); }

private:
    Server* server_;
};

class Server::SignalHandler final : public EventHandler {
public:
    explicit SignalHandler(Server& s) : server_(&s) {}
    void on_readable(Reactor&, int fd) override {
        signalfd_siginfo info;
        while (::read(fd, &info, sizeof info) == static_cast<ssize_t>(sizeof info)) {
        }
        server_->registry_->logger()->log_at(LogLevel::info, "shutdown signal received");
        server_->stop();
    }

private:
    Server* server_;
};

Server::Server(ServerConfig config, Registry& registry) : config_(std::move(config)), registry_(&registry) {
    registry_->configure(config_);
    if (config_.log_path) registry_->set_logger(adapt_logger(std::make_shared<FileLogSink>(*config_.log_path)));
    service_ = std::make_unique<Service>(config_.family, *registry_);
    auto listener = listen_tcp(config_.port);
    port_ = local_port(listener.get());
    listen_fd_ = listener.release();
    pool_ = std::make_unique<ThreadPool>(config_.workers, config_.queue_cap);
}

Server::~Server() {
    stop();
    if (pool_) pool_->shutdown(ShutdownMode::drain);
    // Never ran: the reactor does not own the listener yet.
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::stop() {
    if (!stopping_.exchange(true)) reactor_.post([] {});
}

void Server::run(bool handle_signals) {
    if (listen_fd_ < 0) throw ReactorError("server already ran");
    int listen_fd = std::exchange(listen_fd_, -1);
    reactor_.register_source(listen_fd, Interest::readable(), std::make_shared<Acceptor>(*this));
    if (handle_signals) {
        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        int sfd = ::signalfd(-1, &set, SFD_NONBLOCK | SFD_CLOEXEC);
        if (sfd < 0) throw ReactorError(std::string("signalfd: ") + std::strerror(errno));
        reactor_.register_source(sfd, Interest::readable(), std::make_shared<SignalHandler>(*this));
    }
    auto& log = *registry_->logger();
    log.log_at(LogLevel::info, "listening on port " + std::to_string(port_));

    while (!stopping_) reactor_.run_once(std::chrono::milliseconds(100));

    // Shutdown: no new connections, finish what the pool holds, deliver the
    // replies that produced, then close everything.
    reactor_.deregister(listen_fd);
    pool_->shutdown(ShutdownMode::drain);
    auto deadline = std::chrono::steady_clock::now() + kFlushGrace;
    reactor_.run_once(std::chrono::milliseconds(0));
    while (std::chrono::steady_clock::now() < deadline) {
        bool pending = false;
        for (auto& [id, c] : conns_) pending = pending || !c->out.empty();
        if (!pending) break;
        reactor_.run_once(std::chrono::milliseconds(10));
    }
    reactor_.stop();
    reactor_.run_once(std::chrono::milliseconds(0));
    reactor_.close_all();
    fd_to_conn_.clear();
    conns_.clear();
    connections_ = 0;
    log.log_at(LogLevel::info, "server stopped");
}

void Server::accept_ready(int listen_fd) {
    for (;;) {
        int fd = ::accept4(listen_fd, nullptr, nullptr, SOCK_NONBLOCK | SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR) continue;
            if (errno != EAGAIN && errno != EWOULDBLOCK) {
                registry_->logger()->log_at(LogLevel::warn, std::string("accept: ") + std::strerror(errno));
            }
            return;
        }
        // replies and events are separate small writes; don't let Nagle hold them
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        if (stopping_ || conns_.size() >= config_.max_conns) {
            auto line = service_->render(err(ErrCode::limit, "too many connections")) + "\n";
            [[maybe_unused]] auto n = ::send(fd, line.data(), line.size(), MSG_NOSIGNAL);
            ::close(fd);
            registry_->increment("connections.rejected");
            continue;
        }
        auto conn = std::make_unique<Conn>();
        conn->id = next_conn_++;
        conn->fd = fd;
        auto id = conn->id;
        conn->session = service_->open_session([this, id](const Reply& r) { push_event(id, r); });
        auto greeting = std::string(kProtocolName) + " " + std::to_string(kProtocolVersion) + " " + conn->session->id();
        auto& c = *conn;
        fd_to_conn_[fd] = id;
        conns_.emplace(id, std::move(conn));
        ++connections_;
        registry_->increment("connections.accepted");
        reactor_.register_source(fd, Interest::readable(), std::make_shared<ConnHandler>(*this));
        send_line(c, service_->render(ok(greeting)));
    }
}

Server::Conn* Server::find(std::uint64_t conn_id) {
    auto it = conns_.find(conn_id);
    return it == conns_.end() ? nullptr : it->second.get();
}

void Server::conn_readable(int fd) {
    auto it = fd_to_conn_.find(fd);
    if (it == fd_to_conn_.end()) return;
    auto& c = *find(it->second);
    if (c.eof) {
        // hangup with work still pending: nobody is left to read the replies
        close_conn(c);
        return;
    }
    char buf[65536];
    // bounded per callback so one chatty peer cannot starve the rest
    for (int round = 0; round < 16; ++round) {
        auto n = ::recv(fd, buf, sizeof buf, 0);
        if (n > 0) {
            c.in.append(buf, static_cast<std::size_t>(n));
            if (static_cast<std::size_t>(n) < sizeof buf) break;
            continue;
        }
        if (n == 0) {
            c.eof = true;
            break;
        }
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) break;
        close_conn(c);
        return;
    }

    std::size_t start = 0;
    for (auto lf = c.in.find('\n', start); lf != std::string::npos; lf = c.in.find('\n', start)) {
        std::string_view line(c.in.data() + start, lf - start);
        start = lf + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (c.discarding) {
            c.discarding = false;
            c.queue.push_back({{}, true});
        } else if (line.size() > kMaxLineBytes) {
            c.queue.push_back({{}, true});
        } else {
            c.queue.push_back({std::string(line), false});
        }
    }
    c.in.erase(0, start);
    if (c.in.size() > kMaxLineBytes + 1) {
        c.discarding = true;
        c.in.clear();
    }
    if (c.eof && !c.in.empty() && !c.discarding) {
        // final line without a terminator
        c.queue.push_back({std::move(c.in), false});
        c.in.clear();
    }
    pump(c);
}

void Server::conn_writable(int fd) {
    auto it = fd_to_conn_.find(fd);
    if (it == fd_to_conn_.end()) return;
    flush(*find(it->second));
}

void Server::pump(Conn& c) {
    while (!c.busy && !c.closing && !c.queue.empty()) {
        auto line = std::move(c.queue.front());
        c.queue.pop_front();
        if (line.too_long) {
            send_line(c, service_->render(err(ErrCode::limit, "request longer than " +
                                                                   std::to_string(kMaxLineBytes) + " bytes")));
            if (!find(c.id)) return;
            continue;
        }
        if (stopping_) {
            c.queue.clear();
            break;
        }
        bool quit = false;
        try {
            std::string_view text = line.text;
            if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
            quit = service_->family().parser().parse(text).verb == "QUIT";
        } catch (const RequestParseError&) {
        }
        if (quit) {
            // handled on the loop, after everything before it has been answered;
            // a rejected QUIT (e.g. with arguments) leaves the connection open
            auto reply = service_->handle_line(*c.session, line.text);
            send_line(c, service_->render(reply));
            if (!find(c.id)) return;
            if (is_ok(reply)) {
                c.closing = true;
                c.queue.clear();
                flush(c);
                return;
            }
            continue;
        }
        std::optional<TaskFuture<Reply>> fut;
        try {
            fut = pool_->try_submit(
                [svc = service_.get(), session = c.session, text = std::move(line.text)] {
                    return svc->handle_line(*session, text);
                });
        } catch (const ShutdownError&) {
            c.queue.clear();
            break;
        }
        if (!fut) {
            registry_->increment("requests.rejected");
            send_line(c, service_->render(err(ErrCode::limit, "server busy")));
            if (!find(c.id)) return;
            continue;
        }
        c.busy = true;
        fut->on_settled([this, id = c.id, f = *fut] {
            Reply reply;
            try {
                reply = f.result();
            } catch (const std::exception& e) {
                reply = err(ErrCode::internal, e.what());
            }
            reactor_.post([this, id, reply = std::move(reply)] { on_reply(id, reply); });
        });
    }
    if (!c.busy && c.queue.empty() && c.out.empty() && (c.eof || c.closing)) {
        close_conn(c);
        return;
    }
    flush(c);
}

void Server::on_reply(std::uint64_t conn_id, Reply reply) {
    auto* c = find(conn_id);
    if (!c) return;
    c->busy = false;
    send_line(*c, service_->render(reply));
    if ((c = find(conn_id))) pump(*c);
}

void Server::push_event(std::uint64_t conn_id, const Reply& reply) {
    auto line = service_->render(reply);
    reactor_.post([this, conn_id, line = std::move(line)] {
        if (auto* c = find(conn_id)) send_line(*c, line);
    });
}

void Server::send_line(Conn& c, const std::string& line) {
    c.out += line;
    c.out += '\n';
    flush(c);
}

// May close the connection; callers re-check with find() before touching it.
void Server::flush(Conn& c) {
    while (!c.out.empty()) {
        auto n = ::send(c.fd, c.out.data(), c.out.size(), MSG_NOSIGNAL);
        if (n > 0) {
            c.out.erase(0, static_cast<std::size_t>(n));
            continue;
        }
        if (n < 0 && errno == EINTR) continue;
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
        close_conn(c);
        return;
    }
    if (c.out.empty() && !c.busy && (c.closing || (c.eof && c.queue.empty()))) {
        close_conn(c);
        return;
    }
    Interest want{!c.eof && !c.closing && c.queue.size() < kMaxQueuedLines && c.out.size() < kMaxOutBytes,
                  !c.out.empty()};
    if (want != c.interest) {
        c.interest = want;
        reactor_.modify(c.fd, want);
    }
}

void Server::close_conn(Conn& c) {
    auto id = c.id;
    fd_to_conn_.erase(c.fd);
    reactor_.deregister(c.fd);
    auto it = conns_.find(id);
    if (it != conns_.end()) {
        auto keep = std::move(it->second);
        conns_.erase(it);
        --connections_;
        registry_->increment("connections.closed");
    }
}

}  // namespace patternd
