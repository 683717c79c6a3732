#pragma once

#include <string>

namespace latentforge {

/// Decimal text with 12 significant digits; round-trips the values we log
/// closely enough for analysis and keeps artifacts byte-stable across runs.
std::string format_double(double value);

}  // namespace latentforge
