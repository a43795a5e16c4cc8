#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <fstream>

#include "patternd/protocol.hpp"
#include "patternd/server.hpp"
#include "support/oracles.hpp"

using namespace patternd;
using namespace std::chrono_literals;

namespace {

ServerConfig config(std::size_t max_conns = 16, std::string family = "text") {
    return ConfigBuilder().port(0).workers(2).queue_cap(16).max_conns(static_cast<std::int64_t>(max_conns)).family(family).build();
}

/// Server on an ephemeral port, running on its own thread.
struct Running {
    explicit Running(ServerConfig cfg) : server(std::move(cfg)), loop([this] { server.run(); }) {}
    ~Running() { stop(); }
    void stop() {
        server.stop();
        if (loop.joinable()) loop.join();
    }
    Server server;
    std::thread loop;
};

bool greeted(oracle::LineClient& c) {
    auto g = c.read_line();
    return g && g->starts_with("OK patternd 1 user-");
}

}  // namespace

TEST_CASE("greeting and basic requests over the wire") {
    Running r(config());
    oracle::LineClient c(r.server.port());
    REQUIRE(greeted(c));
    CHECK(c.request("EVAL 5 + 3 - 2") == "OK 6");
    CHECK(c.request("PRICE 100 pct:10") == "OK 90.0");
    CHECK(c.request("FROBNICATE") == "ERR UNKNOWN unknown verb 'FROBNICATE'");
    CHECK(c.request("QUIT now") == "ERR PARSE QUIT takes no arguments");
    CHECK(c.request("PING") == "OK pong");
    CHECK(c.request("QUIT\r") == "OK bye");
    CHECK(c.closed_by_peer());
}

TEST_CASE("pipelined requests are answered in order") {
    Running r(config());
    oracle::LineClient c(r.server.port());
    REQUIRE(greeted(c));
    std::string batch;
    for (int i = 0; i < 200; ++i) batch += "EVAL " + std::to_string(i) + " * 2\n";
    c.send_raw(batch);
    for (int i = 0; i < 200; ++i) CHECK(c.reply() == "OK " + std::to_string(i * 2));
}

TEST_CASE("CRLF and split writes") {
    Running r(config());
    oracle::LineClient c(r.server.port());
    REQUIRE(greeted(c));
    c.send_raw("PI");
    std::this_thread::sleep_for(20ms);
    c.send_raw("NG\r\nEVAL 1");
    std::this_thread::sleep_for(20ms);
    c.send_raw(" + 1\n");
    CHECK(c.reply() == "OK pong");
    CHECK(c.reply() == "OK 2");
}

TEST_CASE("overlong line gets LIMIT and the connection keeps working") {
    Running r(config());
    oracle::LineClient c(r.server.port());
    REQUIRE(greeted(c));
    c.send(std::string(kMaxLineBytes + 10, 'A'));
    auto reply = c.reply();
    REQUIRE(reply);
    CHECK(reply->starts_with("ERR LIMIT"));
    c.send(std::string(100'000, 'B'));
    CHECK(c.reply()->starts_with("ERR LIMIT"));
    CHECK(c.request("PING") == "OK pong");
    c.send(std::string(kMaxLineBytes, 'A'));
    CHECK(c.reply()->starts_with("ERR UNKNOWN"));
}

TEST_CASE("connection limit") {
    Running r(config(2));
    oracle::LineClient a(r.server.port()), b(r.server.port());
    REQUIRE(greeted(a));
    REQUIRE(greeted(b));
    oracle::LineClient c(r.server.port());
    CHECK(c.read_line() == "ERR LIMIT too many connections");
    CHECK(c.closed_by_peer());
    a.request("QUIT");
    CHECK(a.closed_by_peer());
    // wait for the server to notice the freed slot
    for (int i = 0; i < 200 && r.server.connection_count() > 1; ++i) std::this_thread::sleep_for(5ms);
    oracle::LineClient d(r.server.port());
    CHECK(greeted(d));
}

TEST_CASE("events are pushed to other connections") {
    Running r(config());
    oracle::LineClient a(r.server.port()), b(r.server.port());
    auto ga = a.read_line();
    auto gb = b.read_line();
    REQUIRE(ga);
    REQUIRE(gb);
    auto a_id = ga->substr(ga->rfind(' ') + 1);
    auto b_id = gb->substr(gb->rfind(' ') + 1);
    CHECK(b.request("WATCH temp") == "OK");
    CHECK(a.request("TEMP 25") == "OK 1");
    CHECK(b.read_line() == "EVT temp " + b_id + ": The current temperature is 25.0°C");
    a.send("SAY hi there");
    CHECK(a.read_line() == "EVT chat [" + a_id + "] hi there");
    CHECK(a.read_line() == "OK 2");
    CHECK(b.read_line() == "EVT chat [" + a_id + "] hi there");
}

TEST_CASE("json family over the wire") {
    Running r(config(16, "json"));
    oracle::LineClient c(r.server.port());
    auto g = c.read_line();
    REQUIRE(g);
    CHECK(g->starts_with(R"({"ok":true,"value":"patternd 1 user-)"));
    CHECK(c.request(R"({"verb":"EVAL","args":"2 + 3"})") == R"({"ok":true,"value":"5"})");
}

TEST_CASE("shutdown closes every endpoint") {
    auto before = open_fd_count();
    {
        Running r(config());
        std::vector<std::unique_ptr<oracle::LineClient>> clients;
        for (int i = 0; i < 5; ++i) {
            clients.push_back(std::make_unique<oracle::LineClient>(r.server.port()));
            REQUIRE(greeted(*clients.back()));
        }
        // one client leaves abruptly mid-request
        clients[0]->send("EVAL 1 + 1");
        clients[0]->close();
        CHECK(clients[1]->request("PING") == "OK pong");
        auto t0 = std::chrono::steady_clock::now();
        r.stop();
        CHECK(std::chrono::steady_clock::now() - t0 < 2s);
        for (std::size_t i = 1; i < clients.size(); ++i) CHECK(clients[i]->closed_by_peer());
    }
    CHECK(open_fd_count() == before);
}

TEST_CASE("stop before run returns promptly") {
    Server s(config());
    s.stop();
    s.run();
    CHECK(s.connection_count() == 0);
}

TEST_CASE("log file records requests") {
    auto path = std::string("/tmp/patternd_server_test_") + std::to_string(::getpid()) + ".log";
    std::remove(path.c_str());
    auto prev = Registry::instance().logger();
    {
        auto cfg = ConfigBuilder().port(0).workers(1).log_path(path).build();
        Running r(cfg);
        oracle::LineClient c(r.server.port());
        REQUIRE(greeted(c));
        CHECK(c.request("PING") == "OK pong");
    }
    std::ifstream in(path);
    std::string line;
    bool saw = false;
    while (std::getline(in, line)) {
        if (line.find("PING -> OK") != std::string::npos) saw = true;
    }
    CHECK(saw);
    std::remove(path.c_str());
    Registry::instance().set_logger(prev);
}
