#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace infharnack {

// Nine significant digits, the precision used in every report.
inline std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

}  // namespace infharnack
