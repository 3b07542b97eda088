#include "segunc/format.hpp"

#include <cstdio>

namespace segunc {

std::string format_g9(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

}  // namespace segunc
