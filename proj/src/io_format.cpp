#include "qtrade/io_format.hpp"

#include <cstdio>

namespace qtrade {

std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

} // namespace qtrade
