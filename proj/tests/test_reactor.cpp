#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <atomic>

#include "patternd/reactor.hpp"
#include "support/oracles.hpp"

using namespace patternd;
using namespace std::chrono_literals;

namespace {

std::string echo_round_trip(int fd, const std::string& payload) {
    std::thread writer([&] { write_all(fd, payload.data(), payload.size()); });
    std::string got;
    char buf[65536];
    while (got.size() < payload.size()) {
        auto n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) break;
        got.append(buf, static_cast<std::size_t>(n));
    }
    writer.join();
    return got;
}

class CountingReader final : public EventHandler {
public:
    explicit CountingReader(std::atomic<int>* reads) : reads_(reads) {}
    void on_readable(Reactor&, int fd) override {
        char buf[256];
        while (::read(fd, buf, sizeof buf) > 0) ++*reads_;
    }

private:
    std::atomic<int>* reads_;
};

}  // namespace

TEST_CASE("unique fd ownership") {
    int p[2];
    REQUIRE(::pipe(p) == 0);
    auto before = open_fd_count();
    {
        UniqueFd a(p[0]);
        UniqueFd b(p[1]);
        UniqueFd c(std::move(a));
        CHECK_FALSE(a);
        CHECK(c.get() == p[0]);
    }
    CHECK(open_fd_count() == before - 2);
}

TEST_CASE("echo round trip is byte exact") {
    Reactor reactor;
    demo::EchoServer echo(reactor);
    std::thread loop([&] { reactor.run(50ms); });
    auto g = oracle::rng(9);
    {
        auto fd = connect_tcp("127.0.0.1", echo.port());
        for (int i = 0; i < 20; ++i) {
            auto payload = oracle::random_bytes(g, 64 * 1024);
            if (payload.empty()) payload = "x";
            CHECK(echo_round_trip(fd.get(), payload) == payload);
        }
        auto full = std::string(64 * 1024, '\0');
        for (auto& c : full) c = static_cast<char>(oracle::uniform(g, 0, 255));
        CHECK(echo_round_trip(fd.get(), full) == full);
    }
    auto t0 = std::chrono::steady_clock::now();
    reactor.stop();
    loop.join();
    auto waited = std::chrono::steady_clock::now() - t0;
    CHECK(waited <= 50ms);
}

TEST_CASE("several concurrent echo clients") {
    Reactor reactor;
    demo::EchoServer echo(reactor);
    std::thread loop([&] { reactor.run(50ms); });
    std::vector<std::thread> clients;
    std::atomic<int> ok{0};
    for (int c = 0; c < 6; ++c) {
        clients.emplace_back([&, c] {
            auto g = oracle::rng(100 + static_cast<std::uint64_t>(c));
            auto fd = connect_tcp("127.0.0.1", echo.port());
            for (int i = 0; i < 10; ++i) {
                auto payload = oracle::random_bytes(g, 8192) + "!";
                if (echo_round_trip(fd.get(), payload) == payload) ++ok;
            }
        });
    }
    for (auto& t : clients) t.join();
    CHECK(ok == 60);
    reactor.stop();
    loop.join();
}

TEST_CASE("shutdown closes every descriptor") {
    auto before = open_fd_count();
    {
        Reactor reactor;
        demo::EchoServer echo(reactor);
        std::thread loop([&] { reactor.run(20ms); });
        std::vector<UniqueFd> clients;
        for (int i = 0; i < 5; ++i) clients.push_back(connect_tcp("127.0.0.1", echo.port()));
        for (auto& c : clients) CHECK(echo_round_trip(c.get(), "ping") == "ping");
        reactor.stop();
        loop.join();
        CHECK(reactor.registration_count() == 0);
    }
    CHECK(open_fd_count() == before);
}

TEST_CASE("posted functions run on the loop in order and never re-entrantly") {
    Reactor reactor;
    std::vector<int> order;
    reactor.post([&] {
        order.push_back(1);
        reactor.post([&] { order.push_back(3); });
        order.push_back(2);
    });
    reactor.run_once(10ms);
    reactor.run_once(10ms);
    CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("a reactor is driven by one thread only") {
    Reactor reactor;
    reactor.run_once(0ms);
    std::thread other([&] { CHECK_THROWS_AS(reactor.run_once(0ms), ReactorError); });
    other.join();
}

TEST_CASE("posts from many threads all run on the loop thread") {
    Reactor reactor;
    std::atomic<bool> wrong_thread{false};
    std::thread loop([&] { reactor.run(20ms); });
    std::atomic<int> hits{0};
    std::vector<std::thread> posters;
    for (int t = 0; t < 4; ++t) {
        posters.emplace_back([&] {
            for (int i = 0; i < 250; ++i) {
                reactor.post([&] {
                    if (!reactor.in_loop_thread()) wrong_thread = true;
                    ++hits;
                });
            }
        });
    }
    for (auto& t : posters) t.join();
    while (hits < 1000) std::this_thread::sleep_for(1ms);
    reactor.stop();
    loop.join();
    CHECK_FALSE(wrong_thread.load());
}

TEST_CASE("registration errors and level triggering") {
    Reactor reactor;
    int p[2];
    REQUIRE(::pipe(p) == 0);
    set_nonblocking(p[0]);
    std::atomic<int> reads{0};
    auto handler = std::make_shared<CountingReader>(&reads);
    reactor.register_source(p[0], Interest::readable(), handler);
    CHECK_THROWS_AS(reactor.register_source(p[0], Interest::readable(), handler), ReactorError);
    reactor.run_once(0ms);
    CHECK(reactor.is_registered(p[0]));
    CHECK(reactor.run_once(0ms) == 0);
    REQUIRE(::write(p[1], "abc", 3) == 3);
    CHECK(reactor.run_once(100ms) == 1);
    CHECK(reads == 1);
    reactor.deregister(p[0]);
    reactor.run_once(0ms);
    CHECK_FALSE(reactor.is_registered(p[0]));
    ::close(p[1]);
}

TEST_CASE("listen helpers") {
    auto l = listen_tcp(0);
    CHECK(local_port(l.get()) != 0);
    auto port = local_port(l.get());
    CHECK_THROWS_AS(listen_tcp(port), ReactorError);
    l.reset();
    CHECK_THROWS(connect_tcp("127.0.0.1", port, 500ms));
}
