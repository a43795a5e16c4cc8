#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <signal.h>
#include <unordered_map>

#include "patternd/concurrency.hpp"
#include "patternd/creational.hpp"
#include "patternd/reactor.hpp"
#include "patternd/service.hpp"

namespace patternd {

/// Blocks SIGINT and SIGTERM in the calling thread. Call before any thread
/// is started so every thread inherits the mask; Server::run(true) then
/// picks the signals up through a signalfd.
sigset_t block_shutdown_signals();

/// The patternd TCP service: a reactor owns every endpoint, requests run on
/// the thread pool, replies come back to the loop as posted commands.
class Server {
public:
    /// Binds immediately; throws ReactorError when the port is unavailable.
    explicit Server(ServerConfig config, Registry& registry = Registry::instance());
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Bound port (useful when config.port was 0).
    std::uint16_t port() const noexcept { return port_; }

    /// Serves until stop() or, with handle_signals, SIGINT/SIGTERM. On the
    /// way out the pool is drained, finished replies are flushed and every
    /// endpoint is closed. Call at most once.
    void run(bool handle_signals = false);

    /// Thread-safe; may be called before run().
    void stop();

    std::size_t connection_count() const noexcept { return connections_.load(); }
    Service& service() noexcept { return *service_; }

private:
    struct Conn;
    class Acceptor;
    class ConnHandler;
    class SignalHandler;

    void accept_ready(int listen_fd);
    void conn_readable(int fd);
    void conn_writable(int fd);
    void pump(Conn& conn);
    void on_reply(std::uint64_t conn_id, Reply reply);
    void push_event(std::uint64_t conn_id, const Reply& reply);
    void send_line(Conn& conn, const std::string& line);
    void flush(Conn& conn);
    void close_conn(Conn& conn);
    Conn* find(std::uint64_t conn_id);

    ServerConfig config_;
    Registry* registry_;
    std::unique_ptr<Service> service_;
    Reactor reactor_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<std::size_t> connections_{0};

    // Loop-thread state.
    std::unordered_map<std::uint64_t, std::unique_ptr<Conn>> conns_;
    std::unordered_map<int, std::uint64_t> fd_to_conn_;
    std::uint64_t next_conn_ = 1;

    // Declared last so it is destroyed first: its completions post to the
    // reactor.
    std::unique_ptr<ThreadPool> pool_;
};

}  // namespace patternd
