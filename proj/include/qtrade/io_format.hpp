#pragma once

#include <string>

namespace qtrade {

// Deterministic number formatting for every writer: 10 significant
// digits, '.' decimal separator, no locale.
std::string fmt_num(double x);

} // namespace qtrade
