#pragma once

#include <charconv>
#include <string>

namespace regenhd {

// Shortest decimal form that round-trips the exact double. Keeps CSV output
// readable while letting consumers recover bit-identical values.
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace regenhd
