#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace patternd {

enum class LogLevel { info, warn, error };

std::string_view to_string(LogLevel level);

/// Target interface every component logs through.
class Logger {
public:
    virtual ~Logger() = default;
    virtual void log_message(std::string_view message) = 0;
    virtual void log_at(LogLevel level, std::string_view message) = 0;
};

/// The pre-existing sink interface. Its entry point is `write_log`, which is
/// why it needs an adapter before the rest of the code can use it.
class LegacySink {
public:
    virtual ~LegacySink() = default;
    virtual void write_log(std::string_view message) = 0;
    // Sinks that have no notion of levels just drop it.
    virtual void write_log_leveled(LogLevel, std::string_view message) { write_log(message); }
};

/// Forwards each Logger call to exactly one legacy call, unchanged.
class LoggerAdapter final : public Logger {
public:
    explicit LoggerAdapter(std::shared_ptr<LegacySink> legacy);

    void log_message(std::string_view message) override;
    void log_at(LogLevel level, std::string_view message) override;

    const std::shared_ptr<LegacySink>& legacy() const noexcept { return legacy_; }

private:
    std::shared_ptr<LegacySink> legacy_;
};

std::shared_ptr<Logger> adapt_logger(std::shared_ptr<LegacySink> legacy);

struct LogRecord {
    LogLevel level = LogLevel::info;
    std::string text;

    bool operator==(const LogRecord&) const = default;
};

/// Legacy sink that formats records as "Logging message: <m>" and keeps them
/// in memory. Thread-safe.
class OldLogger final : public LegacySink {
public:
    void write_log(std::string_view message) override;
    void write_log_leveled(LogLevel level, std::string_view message) override;

    std::vector<LogRecord> records() const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::vector<LogRecord> records_;
};

/// Legacy sink backed by a file: one `<unix-millis> <level> <message>` line
/// per record, LF-terminated, flushed per record.
class FileLogSink final : public LegacySink {
public:
    explicit FileLogSink(const std::string& path);

    void write_log(std::string_view message) override;
    void write_log_leveled(LogLevel level, std::string_view message) override;

private:
    std::mutex mu_;
    std::ofstream out_;
};

/// Discards everything.
class NullSink final : public LegacySink {
public:
    void write_log(std::string_view) override {}
};

std::int64_t unix_millis();

std::string format_log_line(std::int64_t millis, LogLevel level, std::string_view message);

}  // namespace patternd
