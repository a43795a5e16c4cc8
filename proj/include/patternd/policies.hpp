#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "patternd/logging.hpp"
#include "patternd/structural.hpp"

namespace patternd {

// ---------------------------------------------------------------------------
// Strategy: discounts
// ---------------------------------------------------------------------------

struct NoDiscount {
    bool operator==(const NoDiscount&) const = default;
};

struct PercentageDiscount {
    int percent = 0;  // 0..100
    bool operator==(const PercentageDiscount&) const = default;
};

struct FixedDiscount {
    Money amount = 0;  // minor units, >= 0
    bool operator==(const FixedDiscount&) const = default;
};

/// Percentage first, then the fixed amount.
struct CompositeDiscount {
    PercentageDiscount percentage;
    FixedDiscount fixed;
    bool operator==(const CompositeDiscount&) const = default;
};

using DiscountStrategy = std::variant<NoDiscount, PercentageDiscount, FixedDiscount, CompositeDiscount>;

class StrategyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// price >= 0. Never returns more than price or less than 0.
Money apply_discount(const DiscountStrategy& strategy, Money price);

/// none | pct:<0-100> | fixed:<int> | pct:<p>+fixed:<d>. Amounts in the
/// strategy string are whole currency units. Throws StrategyError.
DiscountStrategy parse_strategy(std::string_view text);

std::string describe(const DiscountStrategy& strategy);

// ---------------------------------------------------------------------------
// State: media player
// ---------------------------------------------------------------------------

enum class PlayerState { playing, paused, stopped };
enum class PlayerButton { play, pause, stop };

inline constexpr std::array<PlayerState, 3> kPlayerStates{PlayerState::playing, PlayerState::paused,
                                                          PlayerState::stopped};
inline constexpr std::array<PlayerButton, 3> kPlayerButtons{PlayerButton::play, PlayerButton::pause,
                                                            PlayerButton::stop};

std::string_view to_string(PlayerState state) noexcept;
std::string_view to_string(PlayerButton button) noexcept;

struct PlayerTransition {
    std::string message;
    PlayerState next;
};

PlayerTransition player_press(PlayerState state, PlayerButton button);

/// Context object; starts stopped.
class MediaPlayer {
public:
    std::string press(PlayerButton button);
    std::string play() { return press(PlayerButton::play); }
    std::string pause() { return press(PlayerButton::pause); }
    std::string stop() { return press(PlayerButton::stop); }
    PlayerState state() const noexcept { return state_; }

private:
    PlayerState state_ = PlayerState::stopped;
};

// ---------------------------------------------------------------------------
// Template method: document pipeline
// ---------------------------------------------------------------------------

enum class DocKind { pdf, word };

/// Where pipeline steps are written. Implementor side of the bridge.
class DocumentSink {
public:
    virtual ~DocumentSink() = default;
    virtual void emit(std::string_view line) = 0;
};

class TraceSink final : public DocumentSink {
public:
    void emit(std::string_view line) override { lines_.emplace_back(line); }
    const std::vector<std::string>& lines() const noexcept { return lines_; }

private:
    std::vector<std::string> lines_;
};

class LoggerSink final : public DocumentSink {
public:
    explicit LoggerSink(std::shared_ptr<Logger> logger) : logger_(std::move(logger)) {}
    void emit(std::string_view line) override { logger_->log_message(line); }

private:
    std::shared_ptr<Logger> logger_;
};

class DocumentPipeline {
public:
    virtual ~DocumentPipeline() = default;

    /// open, write, format, save. Fixed for every kind.
    void prepare(DocumentSink& sink) const {
        open_file(sink);
        write_content(sink);
        format_content(sink);
        save(sink);
    }

protected:
    virtual void open_file(DocumentSink& sink) const = 0;
    virtual void write_content(DocumentSink& sink) const = 0;
    virtual void format_content(DocumentSink& sink) const = 0;
    virtual void save(DocumentSink& sink) const { sink.emit("Saving the document."); }
};

std::unique_ptr<DocumentPipeline> make_pipeline(DocKind kind);

/// Runs the pipeline into sink and also returns the lines emitted.
std::vector<std::string> prepare_document(DocKind kind, DocumentSink& sink);
std::vector<std::string> prepare_document(DocKind kind);

}  // namespace patternd
