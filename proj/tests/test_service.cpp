#include <doctest.h>

#include <mutex>

#include "patternd/protocol.hpp"
#include "patternd/service.hpp"
#include "support/oracles.hpp"

using namespace patternd;

namespace {

struct Client {
    Client(Service& svc) : svc(svc) {
        session = svc.open_session([this](const Reply& r) {
            std::lock_guard lock(mu);
            events.push_back(this->svc.render(r));
        });
    }
    std::string operator()(std::string_view line) { return svc.render(svc.handle_line(*session, line)); }
    std::vector<std::string> take_events() {
        std::lock_guard lock(mu);
        return std::exchange(events, {});
    }

    Service& svc;
    std::shared_ptr<Session> session;
    std::mutex mu;
    std::vector<std::string> events;
};

}  // namespace

TEST_CASE("admin verbs") {
    Service svc;
    Client c(svc);
    CHECK(c("PING") == "OK pong");
    CHECK(c("PING now") == "ERR PARSE PING takes no arguments");
    CHECK(c("QUIT") == "OK bye");
    auto stats = c("STATS");
    CHECK(stats.starts_with("OK "));
    CHECK(stats.find("requests.") != std::string::npos);
    CHECK(c("FROBNICATE") == "ERR UNKNOWN unknown verb 'FROBNICATE'");
    CHECK(c("") .starts_with("ERR PARSE"));
    CHECK(c("ping").starts_with("ERR PARSE"));
    CHECK(c("PING\r") == "OK pong");
    CHECK(c(std::string(kMaxLineBytes + 1, 'P')).starts_with("ERR LIMIT"));
}

TEST_CASE("expression verbs") {
    Service svc;
    Client c(svc);
    CHECK(c("EVAL 5 + 3 - 2") == "OK 6");
    CHECK(c("EVAL 2+3") == "OK 5");
    CHECK(c("LET x 10") == "OK");
    CHECK(c("EVAL x * 2") == "OK 20");
    CHECK(c("LET x") == "ERR PARSE usage: LET <ident> <int>");
    CHECK(c("LET X 1").starts_with("ERR PARSE invalid identifier"));
    CHECK(c("LET y one").starts_with("ERR PARSE invalid integer"));
    CHECK(c("EVAL 1 / 0").starts_with("ERR EVAL"));
    CHECK(c("EVAL y + 1").starts_with("ERR EVAL"));
    CHECK(c("EVAL 1 +").starts_with("ERR PARSE"));
    // variables are per session
    Client other(svc);
    CHECK(other("EVAL x").starts_with("ERR EVAL"));
}

TEST_CASE("document verbs reproduce the memento transcript") {
    Service svc;
    Client c(svc);
    CHECK(c("WRITE Hello, ") == "OK 7");
    CHECK(c("SNAPSHOT") == "OK 1");
    CHECK(c("WRITE World!") == "OK 13");
    CHECK(c("SNAPSHOT") == "OK 2");
    CHECK(c("WRITE  How are you?") == "OK 26");
    CHECK(c("SHOW") == "OK Hello, World! How are you?");
    CHECK(c("RESTORE 2") == "OK Hello, World!");
    CHECK(c("RESTORE 1") == "OK Hello, ");
    CHECK(c("UNDO") == "ERR EMPTY nothing to undo");
    CHECK(c("RESTORE 999").starts_with("ERR STATE"));
    CHECK(c("RESTORE x") == "ERR PARSE usage: RESTORE <snapshot-id>");
    CHECK(c("WRITE a\\nb") == "OK 10");
    CHECK(c("SHOW") == "OK Hello, a\\nb");
    CHECK(c("UNDO") == "OK Hello, ");
    CHECK(c("WRITE bad\\").starts_with("ERR PARSE"));
}

TEST_CASE("pricing verbs") {
    Service svc;
    Client c(svc);
    CHECK(c("PRICE 100 pct:10") == "OK 90.0");
    CHECK(c("PRICE 100 fixed:20") == "OK 80.0");
    CHECK(c("PRICE 100 none") == "OK 100.0");
    CHECK(c("PRICE 100 pct:50+fixed:10") == "OK 40.0");
    CHECK(c("PRICE 99 pct:33") == "OK 66.33");
    CHECK(c("PRICE 100 half").starts_with("ERR PARSE"));
    CHECK(c("PRICE -1 none").starts_with("ERR PARSE invalid price"));
    CHECK(c("PRICE 100") == "ERR PARSE usage: PRICE <int> <strategy>");
}

TEST_CASE("player verbs") {
    Service svc;
    Client c(svc);
    CHECK(c("PAUSE") == "OK Can't pause. The player is stopped.");
    CHECK(c("PLAY") == "OK Starting playback.");
    CHECK(c("PLAY") == "OK Already playing.");
    CHECK(c("PAUSE") == "OK Pausing the player.");
    CHECK(c("STOP") == "OK Stopping the player.");
    CHECK(c("STOP now") == "ERR PARSE STOP takes no arguments");
}

TEST_CASE("watch and temperature events") {
    Service svc;
    Client a(svc), b(svc);
    CHECK(a("WATCH temp") == "OK");
    CHECK(a("WATCH temp") == "ERR STATE already watching temp");
    CHECK(a("WATCH rain").starts_with("ERR PARSE"));
    CHECK(b("UNWATCH temp") == "ERR STATE not watching temp");
    CHECK(b("TEMP 25") == "OK 1");
    CHECK(a.take_events() == std::vector<std::string>{"EVT temp " + a.session->id() + ": The current temperature is 25.0°C"});
    CHECK(b.take_events().empty());
    CHECK(b("TEMP warm") == "ERR PARSE usage: TEMP <int>");
    CHECK(a("UNWATCH temp") == "OK");
    CHECK(b("TEMP 30") == "OK 0");
    CHECK(a.take_events().empty());
}

TEST_CASE("chat events reach every member") {
    Service svc;
    auto before = svc.chat_size();
    {
        Client a(svc), b(svc);
        CHECK(svc.chat_size() == before + 2);
        CHECK(a("SAY hello") == "OK " + std::to_string(before + 2));
        auto line = "EVT chat [" + a.session->id() + "] hello";
        CHECK(a.take_events() == std::vector<std::string>{line});
        CHECK(b.take_events() == std::vector<std::string>{line});
        CHECK(a.session->id() != b.session->id());
    }
    CHECK(svc.chat_size() == before);
}

TEST_CASE("sessions release their subscriptions") {
    Service svc;
    {
        Client a(svc);
        a("WATCH temp");
        CHECK(svc.watcher_count() == 1);
    }
    CHECK(svc.watcher_count() == 0);
    Client b(svc);
    svc.close_session(*b.session);
    svc.close_session(*b.session);
    CHECK(b("SAY hi") == "ERR STATE session has left the room");
}

TEST_CASE("json family end to end") {
    Service svc("json");
    Client c(svc);
    CHECK(c(R"({"verb":"EVAL","args":"5 + 3 - 2"})") == R"({"ok":true,"value":"6"})");
    CHECK(c("EVAL 1").find(R"("code":"PARSE")") != std::string::npos);
}

TEST_CASE("fuzz: random request lines only yield OK or ERR") {
    Service svc;
    auto g = oracle::rng(31337);
    const std::vector<std::string> verbs{"PING", "QUIT", "STATS", "LET", "EVAL", "WRITE", "SHOW", "UNDO",
                                         "SNAPSHOT", "RESTORE", "PRICE", "PLAY", "PAUSE", "STOP", "WATCH",
                                         "UNWATCH", "TEMP", "SAY", "NOPE", "eval", ""};
    auto chat_before = svc.chat_size();
    {
        std::vector<std::unique_ptr<Client>> clients;
        for (int i = 0; i < 4; ++i) clients.push_back(std::make_unique<Client>(svc));
        for (int i = 0; i < 10000; ++i) {
            std::string line;
            switch (oracle::uniform(g, 0, 3)) {
                case 0: line = oracle::random_bytes(g, 40); break;
                case 1:
                    line = verbs[static_cast<std::size_t>(oracle::uniform(g, 0, static_cast<std::int64_t>(verbs.size()) - 1))] +
                           " " + oracle::random_text(g, 12, "0123456789 +-*/()xyz:\\npctfixednone");
                    break;
                case 2:
                    line = verbs[static_cast<std::size_t>(oracle::uniform(g, 0, static_cast<std::int64_t>(verbs.size()) - 1))];
                    break;
                default: line = std::string(static_cast<std::size_t>(oracle::uniform(g, 4000, 4200)), 'A'); break;
            }
            auto& c = *clients[static_cast<std::size_t>(oracle::uniform(g, 0, 3))];
            auto reply = c(line);
            bool well_formed = reply == "OK" || reply.starts_with("OK ") || reply.starts_with("ERR ");
            CHECK_MESSAGE(well_formed, "line: ", line, " reply: ", reply);
            CHECK(reply.find('\n') == std::string::npos);
            c.take_events();
        }
    }
    CHECK(svc.chat_size() == chat_before);
    CHECK(svc.watcher_count() == 0);
}
