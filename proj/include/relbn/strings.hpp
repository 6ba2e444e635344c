#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace relbn {

// Shortest round-trip-safe decimal form (17 significant digits).
inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Unambiguous packing of a string list (length-prefixed), used as a map key.
inline std::string pack_values(const std::vector<std::string>& values) {
    std::string out;
    for (const auto& v : values) {
        out += std::to_string(v.size());
        out += ':';
        out += v;
    }
    return out;
}

}  // namespace relbn
