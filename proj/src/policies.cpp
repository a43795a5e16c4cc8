#include "patternd/policies.hpp"

#include <charconv>

namespace patternd {

// --- Strategy -----------------------------------------------------------------

namespace {

Money apply_one(const PercentageDiscount& d, Money price) {
    // price * p fits: price is bounded below INT64_MAX / 100 by the caller
    // check in apply_discount.
    return price - (price * d.percent) / 100;
}

Money apply_one(const FixedDiscount& d, Money price) { return price > d.amount ? price - d.amount : 0; }

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw StrategyError("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

PercentageDiscount parse_pct(std::string_view body) {
    auto p = parse_int(body, "percentage");
    if (p < 0 || p > 100) throw StrategyError("percentage must be 0..100, got " + std::to_string(p));
    return PercentageDiscount{static_cast<int>(p)};
}

FixedDiscount parse_fixed(std::string_view body) {
    auto d = parse_int(body, "fixed amount");
    constexpr std::int64_t kMaxMajor = INT64_MAX / 10000;
    if (d < 0 || d > kMaxMajor) throw StrategyError("fixed amount out of range: " + std::to_string(d));
    return FixedDiscount{d * 100};
}

}  // namespace

Money apply_discount(const DiscountStrategy& strategy, Money price) {
    if (price < 0) throw std::invalid_argument("price must be non-negative");
    if (price > INT64_MAX / 100) throw std::overflow_error("price too large");
    return std::visit(
        [price](const auto& s) -> Money {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, NoDiscount>) {
                return price;
            } else if constexpr (std::is_same_v<S, CompositeDiscount>) {
                return apply_one(s.fixed, apply_one(s.percentage, price));
            } else {
                return apply_one(s, price);
            }
        },
        strategy);
}

DiscountStrategy parse_strategy(std::string_view text) {
    if (text == "none") return NoDiscount{};
    constexpr std::string_view pct = "pct:";
    constexpr std::string_view fixed = "fixed:";
    if (text.starts_with(fixed)) return parse_fixed(text.substr(fixed.size()));
    if (text.starts_with(pct)) {
        auto body = text.substr(pct.size());
        auto plus = body.find('+');
        if (plus == std::string_view::npos) return parse_pct(body);
        auto rest = body.substr(plus + 1);
        if (!rest.starts_with(fixed)) throw StrategyError("expected fixed:<d> after '+'");
        return CompositeDiscount{parse_pct(body.substr(0, plus)), parse_fixed(rest.substr(fixed.size()))};
    }
    throw StrategyError("unknown strategy '" + std::string(text) + "'; expected none, pct:<p>, fixed:<d> or pct:<p>+fixed:<d>");
}

std::string describe(const DiscountStrategy& strategy) {
    return std::visit(
        [](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, NoDiscount>) {
                return "none";
            } else if constexpr (std::is_same_v<S, PercentageDiscount>) {
                return "pct:" + std::to_string(s.percent);
            } else if constexpr (std::is_same_v<S, FixedDiscount>) {
                return "fixed:" + format_money(s.amount);
            } else {
                return "pct:" + std::to_string(s.percentage.percent) + "+fixed:" + format_money(s.fixed.amount);
            }
        },
        strategy);
}

// --- State --------------------------------------------------------------------

std::string_view to_string(PlayerState state) noexcept {
    switch (state) {
        case PlayerState::playing:
            return "playing";
        case PlayerState::paused:
            return "paused";
        case PlayerState::stopped:
            return "stopped";
    }
    return "stopped";
}

std::string_view to_string(PlayerButton button) noexcept {
    switch (button) {
        case PlayerButton::play:
            return "play";
        case PlayerButton::pause:
            return "pause";
        case PlayerButton::stop:
            return "stop";
    }
    return "stop";
}

namespace {

class StateBehavior {
public:
    virtual ~StateBehavior() = default;
    virtual PlayerTransition play() const = 0;
    virtual PlayerTransition pause() const = 0;
    virtual PlayerTransition stop() const = 0;
};

class PlayingState final : public StateBehavior {
public:
    PlayerTransition play() const override { return {"Already playing.", PlayerState::playing}; }
    PlayerTransition pause() const override { return {"Pausing the player.", PlayerState::paused}; }
    PlayerTransition stop() const override { return {"Stopping the player.", PlayerState::stopped}; }
};

class PausedState final : public StateBehavior {
public:
    PlayerTransition play() const override { return {"Resuming playback.", PlayerState::playing}; }
    PlayerTransition pause() const override { return {"Already paused.", PlayerState::paused}; }
    PlayerTransition stop() const override { return {"Stopping the player.", PlayerState::stopped}; }
};

class StoppedState final : public StateBehavior {
public:
    PlayerTransition play() const override { return {"Starting playback.", PlayerState::playing}; }
    PlayerTransition pause() const override { return {"Can't pause. The player is stopped.", PlayerState::stopped}; }
    PlayerTransition stop() const override { return {"Already stopped.", PlayerState::stopped}; }
};

const StateBehavior& behavior(PlayerState state) {
    static const PlayingState playing;
    static const PausedState paused;
    static const StoppedState stopped;
    switch (state) {
        case PlayerState::playing:
            return playing;
        case PlayerState::paused:
            return paused;
        case PlayerState::stopped:
            break;
    }
    return stopped;
}

}  // namespace

PlayerTransition player_press(PlayerState state, PlayerButton button) {
    const auto& b = behavior(state);
    switch (button) {
        case PlayerButton::play:
            return b.play();
        case PlayerButton::pause:
            return b.pause();
        case PlayerButton::stop:
            break;
    }
    return b.stop();
}

std::string MediaPlayer::press(PlayerButton button) {
    auto t = player_press(state_, button);
    state_ = t.next;
    return std::move(t.message);
}

// --- Template method ----------------------------------------------------------

namespace {

class PdfDocument final : public DocumentPipeline {
protected:
    void open_file(DocumentSink& sink) const override { sink.emit("Opening a PDF document."); }
    void write_content(DocumentSink& sink) const override { sink.emit("Writing content to the PDF document."); }
    void format_content(DocumentSink& sink) const override { sink.emit("Formatting the PDF document content."); }
};

class WordDocument final : public DocumentPipeline {
protected:
    void open_file(DocumentSink& sink) const override { sink.emit("Opening a Word document."); }
    void write_content(DocumentSink& sink) const override { sink.emit("Writing content to the Word document."); }
    void format_content(DocumentSink& sink) const override { sink.emit("Formatting the Word document content."); }
};

// Forwards to the caller's sink while keeping a copy.
class TeeSink final : public DocumentSink {
public:
    explicit TeeSink(DocumentSink& target) : target_(&target) {}
    void emit(std::string_view line) override {
        lines.emplace_back(line);
        target_->emit(line);
    }
    std::vector<std::string> lines;

private:
    DocumentSink* target_;
};

}  // namespace

std::unique_ptr<DocumentPipeline> make_pipeline(DocKind kind) {
    if (kind == DocKind::pdf) return std::make_unique<PdfDocument>();
    return std::make_unique<WordDocument>();
}

std::vector<std::string> prepare_document(DocKind kind, DocumentSink& sink) {
    TeeSink tee(sink);
    make_pipeline(kind)->prepare(tee);
    return std::move(tee.lines);
}

std::vector<std::string> prepare_document(DocKind kind) {
    TraceSink sink;
    make_pipeline(kind)->prepare(sink);
    return sink.lines();
}

}  // namespace patternd
