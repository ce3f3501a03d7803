#pragma once

#include <cstdio>
#include <string>

namespace ruinlab {

// Locale-independent shortest-ish decimal rendering used everywhere numbers
// end up in artifacts (CSV, JSON, names): %.12g keeps byte output stable
// across runs and platforms while preserving ~all useful precision.
inline std::string format_compact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace ruinlab
