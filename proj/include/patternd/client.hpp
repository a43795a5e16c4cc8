#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace patternd {

struct ClientConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7465;
    std::optional<std::string> script;
    std::int64_t timeout_ms = 5000;  // per reply, >= 1
};

enum ClientExit : int {
    client_ok = 0,
    client_err_reply = 1,  // script mode hit an ERR
    client_failure = 2,    // connect failure, timeout, lost connection, bad config
};

/// Line kinds as seen by the client, for either protocol family.
enum class LineKind { ok, err, evt, other };
LineKind classify_line(std::string_view line);

/// Connects, prints the greeting, then sends lines from the script file (or
/// `in` when cfg.script is empty) one at a time, waiting for each reply.
/// Every server line is written to `out` in arrival order; EVT lines get a
/// "* " prefix. Blank input lines are skipped. Diagnostics go to `err`.
int repl(const ClientConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace patternd
