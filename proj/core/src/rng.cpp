#include "latentforge/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace latentforge {

namespace {

// splitmix64 finalizer; full-period bijection on u64.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RngStream::word_at(std::uint64_t seed, std::uint64_t stream_id,
                                 std::uint64_t counter) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ mix(stream_id ^ 0x632be59bd9b4e019ull));
  return mix(h ^ mix(counter));
}

double RngStream::uniform() {
  // 53 high bits -> double in [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::int64_t RngStream::uniform_int(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
}

double RngStream::normal() {
  // u1 in (0, 1] keeps the log finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(seed_, mix(stream_ ^ mix(id ^ 0x9e6c63d0876a9a35ull)));
}

}  // namespace latentforge
