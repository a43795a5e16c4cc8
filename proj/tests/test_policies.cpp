#include <doctest.h>

#include "patternd/policies.hpp"
#include "support/oracles.hpp"

using namespace patternd;

TEST_CASE("strategy transcript") {
    CHECK(apply_discount(PercentageDiscount{10}, 10000) == 9000);
    CHECK(format_money(apply_discount(PercentageDiscount{10}, 10000)) == "90.0");
    CHECK(format_money(apply_discount(FixedDiscount{2000}, 10000)) == "80.0");
    CHECK(format_money(apply_discount(NoDiscount{}, 10000)) == "100.0");
}

TEST_CASE("strategy grammar") {
    CHECK(parse_strategy("none") == DiscountStrategy{NoDiscount{}});
    CHECK(parse_strategy("pct:10") == DiscountStrategy{PercentageDiscount{10}});
    CHECK(parse_strategy("fixed:20") == DiscountStrategy{FixedDiscount{2000}});
    CHECK(parse_strategy("pct:50+fixed:1") == DiscountStrategy{CompositeDiscount{{50}, {100}}});
    for (auto bad : {"", "pct:", "pct:101", "pct:-1", "fixed:-5", "fixed:1.5", "pct:5+pct:5", "half", "NONE", "pct:10+"}) {
        CHECK_THROWS_AS(parse_strategy(bad), StrategyError);
    }
}

TEST_CASE("discounts match closed forms on random inputs") {
    auto g = oracle::rng(8);
    for (int i = 0; i < 5000; ++i) {
        auto price = oracle::uniform(g, 0, 10'000'000);
        auto p = static_cast<int>(oracle::uniform(g, 0, 100));
        auto d = oracle::uniform(g, 0, 200'000);
        // floor(price * p / 100) recomputed in 128 bits
        auto pct_expected = static_cast<Money>(price - static_cast<__int128>(price) * p / 100);
        auto fixed_expected = std::max<Money>(price - d, 0);
        CHECK(apply_discount(NoDiscount{}, price) == price);
        CHECK(apply_discount(PercentageDiscount{p}, price) == pct_expected);
        CHECK(apply_discount(FixedDiscount{d}, price) == fixed_expected);
        CHECK(apply_discount(CompositeDiscount{{p}, {d}}, price) == std::max<Money>(pct_expected - d, 0));
        for (const DiscountStrategy& s :
             {DiscountStrategy{NoDiscount{}}, DiscountStrategy{PercentageDiscount{p}}, DiscountStrategy{FixedDiscount{d}}}) {
            auto out = apply_discount(s, price);
            CHECK(out <= price);
            CHECK(out >= 0);
        }
    }
}

TEST_CASE("state table is exact on all nine cells") {
    struct Cell {
        PlayerState from;
        PlayerButton button;
        const char* message;
        PlayerState to;
    };
    using S = PlayerState;
    using B = PlayerButton;
    const Cell table[] = {
        {S::stopped, B::play, "Starting playback.", S::playing},
        {S::playing, B::play, "Already playing.", S::playing},
        {S::playing, B::pause, "Pausing the player.", S::paused},
        {S::paused, B::play, "Resuming playback.", S::playing},
        {S::paused, B::pause, "Already paused.", S::paused},
        {S::playing, B::stop, "Stopping the player.", S::stopped},
        {S::paused, B::stop, "Stopping the player.", S::stopped},
        {S::stopped, B::pause, "Can't pause. The player is stopped.", S::stopped},
        {S::stopped, B::stop, "Already stopped.", S::stopped},
    };
    int covered = 0;
    for (auto st : kPlayerStates) {
        for (auto b : kPlayerButtons) {
            auto t = player_press(st, b);
            for (auto& c : table) {
                if (c.from == st && c.button == b) {
                    CHECK(t.message == c.message);
                    CHECK(t.next == c.to);
                    ++covered;
                }
            }
        }
    }
    CHECK(covered == 9);
}

TEST_CASE("player usage transcript and fuzz closure") {
    MediaPlayer p;
    CHECK(p.play() == "Starting playback.");
    CHECK(p.pause() == "Pausing the player.");
    CHECK(p.play() == "Resuming playback.");
    CHECK(p.stop() == "Stopping the player.");
    CHECK(p.stop() == "Already stopped.");
    auto g = oracle::rng(12);
    for (int i = 0; i < 1000; ++i) {
        p.press(kPlayerButtons[static_cast<std::size_t>(oracle::uniform(g, 0, 2))]);
        auto s = p.state();
        CHECK((s == PlayerState::playing || s == PlayerState::paused || s == PlayerState::stopped));
    }
}

TEST_CASE("template method traces") {
    CHECK(prepare_document(DocKind::pdf) == std::vector<std::string>{
                                                "Opening a PDF document.", "Writing content to the PDF document.",
                                                "Formatting the PDF document content.", "Saving the document."});
    CHECK(prepare_document(DocKind::word) == std::vector<std::string>{
                                                 "Opening a Word document.", "Writing content to the Word document.",
                                                 "Formatting the Word document content.", "Saving the document."});
}

TEST_CASE("template skeleton through a logger sink") {
    auto legacy = std::make_shared<OldLogger>();
    LoggerSink sink(adapt_logger(legacy));
    for (auto kind : {DocKind::pdf, DocKind::word}) {
        auto before = legacy->size();
        auto lines = prepare_document(kind, sink);
        CHECK(lines.size() == 4);
        CHECK(legacy->size() == before + 4);
        CHECK(lines[0].starts_with("Opening a "));
        CHECK(lines[1].starts_with("Writing content to the "));
        CHECK(lines[2].starts_with("Formatting the "));
        CHECK(lines[3] == "Saving the document.");
    }
}
