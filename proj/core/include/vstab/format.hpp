#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace vstab {

/// Fixed 12-significant-digit rendering shared by every text output.
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// `x` rounded to the value format_real prints.
inline double round_to_printed(double x) { return std::strtod(format_real(x).c_str(), nullptr); }

}  // namespace vstab
