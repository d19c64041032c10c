#pragma once

#include <charconv>
#include <string>

namespace qspi {

/// Shortest text that parses back to the same double; locale independent.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// 9 significant digits, locale independent.
inline std::string format_csv(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    return std::string(buf, r.ptr);
}

}  // namespace qspi
