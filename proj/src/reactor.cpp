#include "patternd/reactor.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/epoll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <string>

namespace patternd {

namespace {

std::string errno_message(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

std::uint32_t to_epoll_events(Interest interest) {
    std::uint32_t events = EPOLLRDHUP;
    if (interest.read) events |= EPOLLIN;
    if (interest.write) events |= EPOLLOUT;
    return events;
}

constexpr std::uint64_t kWakeupId = 0;

}  // namespace

void UniqueFd::reset(int fd) noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
}

Reactor::Reactor() {
    epoll_.reset(::epoll_create1(EPOLL_CLOEXEC));
    if (!epoll_) throw ReactorError(errno_message("epoll_create1"));
    wakeup_.reset(::eventfd(0, EFD_NONBLOCK | EFD_CLOEXEC));
    if (!wakeup_) throw ReactorError(errno_message("eventfd"));
    epoll_event ev{};
    ev.events = EPOLLIN;
    ev.data.u64 = kWakeupId;
    if (::epoll_ctl(epoll_.get(), EPOLL_CTL_ADD, wakeup_.get(), &ev) != 0) {
        throw ReactorError(errno_message("epoll_ctl(wakeup)"));
    }
}

Reactor::~Reactor() {
    close_all();
    std::lock_guard lock(mu_);
    for (auto& cmd : pending_) {
        if (auto* reg = std::get_if<RegisterCmd>(&cmd)) ::close(reg->fd);
    }
    pending_.clear();
}

bool Reactor::in_loop_thread() const { return loop_thread_.load() == std::this_thread::get_id(); }

void Reactor::claim_loop_thread() {
    auto none = std::thread::id{};
    auto self = std::this_thread::get_id();
    if (!loop_thread_.compare_exchange_strong(none, self) && none != self) {
        throw ReactorError("reactor already driven by another thread");
    }
}

void Reactor::register_source(int fd, Interest interest, std::shared_ptr<EventHandler> handler) {
    if (!handler) throw ReactorError("null event handler");
    if (fd < 0 || ::fcntl(fd, F_GETFD) == -1) throw ReactorError("cannot register a closed endpoint");
    {
        std::lock_guard lock(mu_);
        if (finished_) throw ReactorError("reactor has finished");
        if (!claimed_fds_.insert(fd).second) {
            throw ReactorError("endpoint " + std::to_string(fd) + " is already registered");
        }
    }
    if (in_loop_thread()) {
        do_register(fd, interest, std::move(handler));
    } else {
        enqueue(RegisterCmd{fd, interest, std::move(handler)});
    }
}

void Reactor::modify(int fd, Interest interest) {
    if (in_loop_thread()) {
        do_modify(fd, interest);
    } else {
        enqueue(ModifyCmd{fd, interest});
    }
}

void Reactor::deregister(int fd) {
    if (in_loop_thread()) {
        do_deregister(fd);
    } else {
        enqueue(DeregisterCmd{fd});
    }
}

void Reactor::post(std::function<void()> fn) { enqueue(PostCmd{std::move(fn)}); }

void Reactor::stop() { enqueue(StopCmd{}); }

void Reactor::enqueue(LoopCommand cmd) {
    {
        std::lock_guard lock(mu_);
        if (finished_) {
            if (auto* reg = std::get_if<RegisterCmd>(&cmd)) ::close(reg->fd);
            return;
        }
        pending_.push_back(std::move(cmd));
    }
    std::uint64_t one = 1;
    // EAGAIN means the counter is already nonzero, which is all we need.
    [[maybe_unused]] auto n = ::write(wakeup_.get(), &one, sizeof one);
}

void Reactor::apply_pending() {
    std::vector<LoopCommand> batch;
    {
        std::lock_guard lock(mu_);
        batch.swap(pending_);
    }
    for (auto& cmd : batch) apply(cmd);
}

void Reactor::apply(LoopCommand& cmd) {
    std::visit(
        [this](auto& c) {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, RegisterCmd>) {
                try {
                    do_register(c.fd, c.interest, std::move(c.handler));
                } catch (const ReactorError&) {
                    // Queued registrations cannot report back; drop the endpoint.
                    ::close(c.fd);
                }
            } else if constexpr (std::is_same_v<C, ModifyCmd>) {
                do_modify(c.fd, c.interest);
            } else if constexpr (std::is_same_v<C, DeregisterCmd>) {
                do_deregister(c.fd);
            } else if constexpr (std::is_same_v<C, StopCmd>) {
                stop_ = true;
            } else {
                c.fn();
            }
        },
        cmd);
}

void Reactor::do_register(int fd, Interest interest, std::shared_ptr<EventHandler> handler) {
    auto id = next_id_++;
    epoll_event ev{};
    ev.events = to_epoll_events(interest);
    ev.data.u64 = id;
    if (::epoll_ctl(epoll_.get(), EPOLL_CTL_ADD, fd, &ev) != 0) {
        auto msg = errno_message("epoll_ctl(add)");
        std::lock_guard lock(mu_);
        claimed_fds_.erase(fd);
        throw ReactorError(msg);
    }
    fd_to_id_[fd] = id;
    registrations_.emplace(id, Registration{id, fd, interest, std::move(handler)});
}

void Reactor::do_modify(int fd, Interest interest) {
    auto it = fd_to_id_.find(fd);
    if (it == fd_to_id_.end()) return;
    auto& reg = registrations_.at(it->second);
    if (reg.interest == interest) return;
    epoll_event ev{};
    ev.events = to_epoll_events(interest);
    ev.data.u64 = reg.id;
    if (::epoll_ctl(epoll_.get(), EPOLL_CTL_MOD, fd, &ev) != 0) {
        throw ReactorError(errno_message("epoll_ctl(mod)"));
    }
    reg.interest = interest;
}

void Reactor::do_deregister(int fd) {
    auto it = fd_to_id_.find(fd);
    if (it == fd_to_id_.end()) return;
    registrations_.erase(it->second);
    fd_to_id_.erase(it);
    ::epoll_ctl(epoll_.get(), EPOLL_CTL_DEL, fd, nullptr);
    ::close(fd);
    std::lock_guard lock(mu_);
    claimed_fds_.erase(fd);
}

std::size_t Reactor::run_once(std::chrono::milliseconds max_wait) {
    claim_loop_thread();
    apply_pending();

    std::array<epoll_event, 64> events{};
    int timeout = stop_ ? 0 : static_cast<int>(max_wait.count());
    int n = ::epoll_wait(epoll_.get(), events.data(), static_cast<int>(events.size()), timeout);
    if (n < 0) {
        if (errno == EINTR) return 0;
        throw ReactorError(errno_message("epoll_wait"));
    }

    std::size_t dispatched = 0;
    for (int i = 0; i < n; ++i) {
        const auto& ev = events[static_cast<std::size_t>(i)];
        if (ev.data.u64 == kWakeupId) {
            std::uint64_t drained;
            [[maybe_unused]] auto r = ::read(wakeup_.get(), &drained, sizeof drained);
            continue;
        }
        auto it = registrations_.find(ev.data.u64);
        if (it == registrations_.end()) continue;  // deregistered earlier this round
        auto handler = it->second.handler;
        const int fd = it->second.fd;
        const auto interest = it->second.interest;
        const bool hangup = ev.events & (EPOLLHUP | EPOLLERR | EPOLLRDHUP);

        bool fired = false;
        if (interest.read && (ev.events & EPOLLIN || hangup)) {
            handler->on_readable(*this, fd);
            ++dispatched;
            fired = true;
        }
        it = registrations_.find(ev.data.u64);
        if (it != registrations_.end() && it->second.interest.write &&
            (ev.events & (EPOLLOUT | EPOLLERR | EPOLLHUP))) {
            handler->on_writable(*this, fd);
            ++dispatched;
            fired = true;
        }
        if (!fired && hangup && registrations_.count(ev.data.u64)) {
            // Nothing subscribed to the hangup; let the handler observe EOF.
            handler->on_readable(*this, fd);
            ++dispatched;
        }
    }
    ++rounds_;
    return dispatched;
}

void Reactor::run(std::chrono::milliseconds max_wait) {
    claim_loop_thread();
    try {
        while (!stop_) run_once(max_wait);
    } catch (...) {
        finished_ = true;
        close_all();
        throw;
    }
    {
        std::lock_guard lock(mu_);
        finished_ = true;
    }
    close_all();
}

void Reactor::close_all() {
    for (auto& [id, reg] : registrations_) {
        ::epoll_ctl(epoll_.get(), EPOLL_CTL_DEL, reg.fd, nullptr);
        ::close(reg.fd);
    }
    registrations_.clear();
    fd_to_id_.clear();
    std::vector<LoopCommand> dropped;
    {
        std::lock_guard lock(mu_);
        claimed_fds_.clear();
        if (finished_) dropped.swap(pending_);
    }
    for (auto& cmd : dropped) {
        if (auto* reg = std::get_if<RegisterCmd>(&cmd)) ::close(reg->fd);
    }
}

std::size_t Reactor::registration_count() const {
    std::lock_guard lock(mu_);
    return claimed_fds_.size();
}

bool Reactor::is_registered(int fd) const {
    std::lock_guard lock(mu_);
    return claimed_fds_.count(fd) > 0;
}

// ---------------------------------------------------------------------------

void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL);
    if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
        throw ReactorError(errno_message("fcntl(O_NONBLOCK)"));
    }
}

UniqueFd listen_tcp(std::uint16_t port, int backlog) {
    UniqueFd fd(::socket(AF_INET, SOCK_STREAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0));
    if (!fd) throw ReactorError(errno_message("socket"));
    int one = 1;
    ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        throw ReactorError(errno_message(("bind port " + std::to_string(port)).c_str()));
    }
    if (::listen(fd.get(), backlog) != 0) throw ReactorError(errno_message("listen"));
    return fd;
}

std::uint16_t local_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw ReactorError(errno_message("getsockname"));
    }
    return ntohs(addr.sin_port);
}

UniqueFd connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    auto service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw ReactorError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    std::string last_error = "no addresses";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
        if (!fd) continue;
        set_nonblocking(fd.get());
        int rc = ::connect(fd.get(), ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno != EINPROGRESS) {
            last_error = std::strerror(errno);
            continue;
        }
        if (rc != 0) {
            pollfd p{fd.get(), POLLOUT, 0};
            int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
            if (ready <= 0) {
                last_error = ready == 0 ? "connect timed out" : std::strerror(errno);
                continue;
            }
            int err = 0;
            socklen_t len = sizeof err;
            ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
            if (err != 0) {
                last_error = std::strerror(err);
                continue;
            }
        }
        int flags = ::fcntl(fd.get(), F_GETFL);
        ::fcntl(fd.get(), F_SETFL, flags & ~O_NONBLOCK);
        int one = 1;
        ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        return fd;
    }
    throw ReactorError("cannot connect to " + host + ":" + service + ": " + last_error);
}

void write_all(int fd, const void* data, std::size_t size) {
    auto* p = static_cast<const char*>(data);
    while (size > 0) {
        auto n = ::send(fd, p, size, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                pollfd pfd{fd, POLLOUT, 0};
                ::poll(&pfd, 1, 1000);
                continue;
            }
            throw ReactorError(errno_message("send"));
        }
        p += n;
        size -= static_cast<std::size_t>(n);
    }
}

std::size_t open_fd_count() {
    std::size_t count = 0;
    std::error_code ec;
    for (auto it = std::filesystem::directory_iterator("/proc/self/fd", ec);
         !ec && it != std::filesystem::directory_iterator(); it.increment(ec)) {
        ++count;
    }
    // The iterator's own directory handle is included in the listing.
    return count > 0 ? count - 1 : 0;
}

// ---------------------------------------------------------------------------

namespace demo {

namespace {

class EchoConnection final : public EventHandler {
public:
    EchoConnection(std::shared_ptr<std::size_t> open, std::shared_ptr<std::size_t> closed)
        : open_(std::move(open)), closed_(std::move(closed)) {
        ++*open_;
    }

    void on_readable(Reactor& reactor, int fd) override {
        std::array<char, 4096> buf;
        auto n = ::recv(fd, buf.data(), buf.size(), 0);
        if (n > 0) {
            pending_.append(buf.data(), static_cast<std::size_t>(n));
            flush(reactor, fd);
        } else if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
            close(reactor, fd);  // "Connection closed."
        }
    }

    void on_writable(Reactor& reactor, int fd) override { flush(reactor, fd); }

private:
    void flush(Reactor& reactor, int fd) {
        while (!pending_.empty()) {
            auto n = ::send(fd, pending_.data(), pending_.size(), MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK) break;
                if (errno == EINTR) continue;
                close(reactor, fd);
                return;
            }
            pending_.erase(0, static_cast<std::size_t>(n));
        }
        reactor.modify(fd, pending_.empty() ? Interest::readable() : Interest::both());
    }

    void close(Reactor& reactor, int fd) {
        reactor.deregister(fd);
        --*open_;
        ++*closed_;
    }

    std::string pending_;
    std::shared_ptr<std::size_t> open_;
    std::shared_ptr<std::size_t> closed_;
};

class EchoAcceptor final : public EventHandler {
public:
    EchoAcceptor(std::shared_ptr<std::size_t> open, std::shared_ptr<std::size_t> closed)
        : open_(std::move(open)), closed_(std::move(closed)) {}

    void on_readable(Reactor& reactor, int fd) override {
        for (;;) {
            int conn = ::accept4(fd, nullptr, nullptr, SOCK_NONBLOCK | SOCK_CLOEXEC);
            if (conn < 0) return;
            reactor.register_source(conn, Interest::readable(),
                                    std::make_shared<EchoConnection>(open_, closed_));
        }
    }

private:
    std::shared_ptr<std::size_t> open_;
    std::shared_ptr<std::size_t> closed_;
};

}  // namespace

EchoServer::EchoServer(Reactor& reactor, std::uint16_t port)
    : open_(std::make_shared<std::size_t>(0)), closed_(std::make_shared<std::size_t>(0)) {
    auto listener = listen_tcp(port);
    port_ = local_port(listener.get());
    int fd = listener.get();
    reactor.register_source(fd, Interest::readable(), std::make_shared<EchoAcceptor>(open_, closed_));
    listener.release();
}

}  // namespace demo

}  // namespace patternd
