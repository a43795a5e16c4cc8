#include "patternd/logging.hpp"

#include <chrono>
#include <stdexcept>

namespace patternd {

std::string_view to_string(LogLevel level) {
    switch (level) {
        case LogLevel::info:
            return "INFO";
        case LogLevel::warn:
            return "WARN";
        case LogLevel::error:
            return "ERROR";
    }
    return "INFO";
}

LoggerAdapter::LoggerAdapter(std::shared_ptr<LegacySink> legacy) : legacy_(std::move(legacy)) {
    if (!legacy_) throw std::invalid_argument("LoggerAdapter: null legacy sink");
}

void LoggerAdapter::log_message(std::string_view message) { legacy_->write_log(message); }

void LoggerAdapter::log_at(LogLevel level, std::string_view message) {
    legacy_->write_log_leveled(level, message);
}

std::shared_ptr<Logger> adapt_logger(std::shared_ptr<LegacySink> legacy) {
    return std::make_shared<LoggerAdapter>(std::move(legacy));
}

void OldLogger::write_log(std::string_view message) { write_log_leveled(LogLevel::info, message); }

void OldLogger::write_log_leveled(LogLevel level, std::string_view message) {
    std::string text = "Logging message: ";
    text.append(message);
    std::lock_guard lock(mu_);
    records_.push_back({level, std::move(text)});
}

std::vector<LogRecord> OldLogger::records() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::size_t OldLogger::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

FileLogSink::FileLogSink(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open log file: " + path);
}

void FileLogSink::write_log(std::string_view message) { write_log_leveled(LogLevel::info, message); }

void FileLogSink::write_log_leveled(LogLevel level, std::string_view message) {
    auto line = format_log_line(unix_millis(), level, message);
    std::lock_guard lock(mu_);
    out_ << line;
    out_.flush();
    if (!out_) throw std::runtime_error("log file write failed");
}

std::int64_t unix_millis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_log_line(std::int64_t millis, LogLevel level, std::string_view message) {
    std::string line = std::to_string(millis);
    line += ' ';
    line += to_string(level);
    line += ' ';
    // Records are single lines; embedded LFs would break the format.
    for (char c : message) line += (c == '\n' || c == '\r') ? ' ' : c;
    line += '\n';
    return line;
}

}  // namespace patternd
