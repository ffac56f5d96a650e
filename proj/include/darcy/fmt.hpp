#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "darcy/errors.hpp"

namespace darcy {

/// Shortest decimal that round-trips to the same double (<= 17 significant
/// digits). Used for every float written to disk so reruns are byte-identical.
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_u64(std::uint64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw Error("cannot parse float: '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw Error("cannot parse integer: '" + std::string(s) + "'");
    return v;
}

} // namespace darcy
