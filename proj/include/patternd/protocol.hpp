#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace patternd {

/// PFP/1 request lines are at most this many bytes, terminator excluded.
inline constexpr std::size_t kMaxLineBytes = 4096;

inline constexpr std::string_view kProtocolName = "patternd";
inline constexpr int kProtocolVersion = 1;

class EscapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// LF -> "\n", backslash -> "\\". Everything else passes through.
std::string escape_doc(std::string_view text);

/// Inverse of escape_doc. Throws EscapeError on a dangling backslash or an
/// escape escape_doc never produces.
std::string unescape_doc(std::string_view text);

}  // namespace patternd
