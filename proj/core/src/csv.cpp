#include "latentforge/csv.hpp"

#include <cstdio>

namespace latentforge {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

}  // namespace latentforge
