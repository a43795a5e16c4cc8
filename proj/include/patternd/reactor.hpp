#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace patternd {

class ReactorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Owning file descriptor.
class UniqueFd {
public:
    UniqueFd() = default;
    explicit UniqueFd(int fd) noexcept : fd_(fd) {}
    UniqueFd(UniqueFd&& other) noexcept : fd_(other.release()) {}
    UniqueFd& operator=(UniqueFd&& other) noexcept {
        if (this != &other) reset(other.release());
        return *this;
    }
    UniqueFd(const UniqueFd&) = delete;
    UniqueFd& operator=(const UniqueFd&) = delete;
    ~UniqueFd() { reset(); }

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    int release() noexcept { return std::exchange(fd_, -1); }
    void reset(int fd = -1) noexcept;

private:
    int fd_ = -1;
};

struct Interest {
    bool read = false;
    bool write = false;

    static constexpr Interest readable() { return {true, false}; }
    static constexpr Interest writable() { return {false, true}; }
    static constexpr Interest both() { return {true, true}; }

    bool operator==(const Interest&) const = default;
};

class Reactor;

/// Callbacks run only on the loop thread.
class EventHandler {
public:
    virtual ~EventHandler() = default;
    virtual void on_readable(Reactor& reactor, int fd) = 0;
    virtual void on_writable(Reactor&, int) {}
};

/// Single-threaded, level-triggered readiness loop over epoll.
///
/// Registration hands ownership of the descriptor to the reactor: it is
/// closed on deregister and when run() exits. register_source, modify,
/// deregister, post and stop may be called from any thread; off-loop calls
/// are queued and applied, in submission order, at the start of the next
/// round.
class Reactor {
public:
    Reactor();
    ~Reactor();

    Reactor(const Reactor&) = delete;
    Reactor& operator=(const Reactor&) = delete;

    /// Throws ReactorError on duplicate registration or a closed descriptor.
    void register_source(int fd, Interest interest, std::shared_ptr<EventHandler> handler);
    void modify(int fd, Interest interest);
    void deregister(int fd);
    /// Runs `fn` on the loop thread before the next dispatch. Dropped once the
    /// loop has finished.
    void post(std::function<void()> fn);
    void stop();

    /// Applies queued commands, waits up to `max_wait`, dispatches. Returns the
    /// number of handler callbacks invoked.
    std::size_t run_once(std::chrono::milliseconds max_wait);

    /// Loops until stop(); then drops every registration and closes its
    /// descriptor.
    void run(std::chrono::milliseconds max_wait = std::chrono::milliseconds(100));

    bool stop_requested() const noexcept { return stop_.load(); }
    bool in_loop_thread() const;
    std::size_t registration_count() const;
    bool is_registered(int fd) const;
    /// Number of run_once rounds completed so far.
    std::uint64_t rounds() const noexcept { return rounds_.load(); }

    /// Drops all registrations, closing their descriptors. Loop thread only
    /// (or after the loop has exited).
    void close_all();

private:
    struct Registration {
        std::uint64_t id;
        int fd;
        Interest interest;
        std::shared_ptr<EventHandler> handler;
    };
    struct RegisterCmd {
        int fd;
        Interest interest;
        std::shared_ptr<EventHandler> handler;
    };
    struct ModifyCmd {
        int fd;
        Interest interest;
    };
    struct DeregisterCmd {
        int fd;
    };
    struct StopCmd {};
    struct PostCmd {
        std::function<void()> fn;
    };
    using LoopCommand = std::variant<RegisterCmd, ModifyCmd, DeregisterCmd, StopCmd, PostCmd>;

    void enqueue(LoopCommand cmd);
    void apply_pending();
    void apply(LoopCommand& cmd);
    void do_register(int fd, Interest interest, std::shared_ptr<EventHandler> handler);
    void do_modify(int fd, Interest interest);
    void do_deregister(int fd);
    void claim_loop_thread();

    UniqueFd epoll_;
    UniqueFd wakeup_;

    // Loop-thread state.
    std::unordered_map<int, std::uint64_t> fd_to_id_;
    std::unordered_map<std::uint64_t, Registration> registrations_;
    std::uint64_t next_id_ = 1;

    // Shared state.
    mutable std::mutex mu_;
    std::vector<LoopCommand> pending_;
    std::unordered_set<int> claimed_fds_;  // registered or queued for registration
    std::atomic<bool> stop_{false};
    std::atomic<bool> finished_{false};
    std::atomic<std::thread::id> loop_thread_{};
    std::atomic<std::uint64_t> rounds_{0};
};

// Socket helpers.
void set_nonblocking(int fd);
/// Listening TCP socket on all interfaces; port 0 picks an ephemeral port.
UniqueFd listen_tcp(std::uint16_t port, int backlog = 128);
std::uint16_t local_port(int fd);
/// Blocking connect with a timeout; the returned socket is blocking.
UniqueFd connect_tcp(const std::string& host, std::uint16_t port,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
/// Writes everything or throws.
void write_all(int fd, const void* data, std::size_t size);

/// Number of open descriptors in this process.
std::size_t open_fd_count();

namespace demo {

/// Echo server built directly on the reactor: the listener is just another
/// readable source, connections echo whatever they read.
class EchoServer {
public:
    explicit EchoServer(Reactor& reactor, std::uint16_t port = 0);

    std::uint16_t port() const noexcept { return port_; }
    std::size_t open_connections() const noexcept { return *open_; }
    std::size_t closed_connections() const noexcept { return *closed_; }

private:
    std::uint16_t port_ = 0;
    std::shared_ptr<std::size_t> open_;
    std::shared_ptr<std::size_t> closed_;
};

}  // namespace demo

}  // namespace patternd
