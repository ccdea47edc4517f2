#pragma once

#include <charconv>
#include <string>

namespace mxmclr {

/// Fixed-point decimal formatting via to_chars: locale-independent.
inline std::string format_fixed(double value, int precision = 4) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed,
                                   precision);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace mxmclr
