#pragma once

#include <cstdint>

namespace latentforge {

/// Counter-based random stream: (seed, stream_id, counter) -> word is a pure
/// function, so any draw can be reproduced from its coordinates alone and
/// streams with distinct ids are statistically independent. Copies are cheap;
/// forking is done through substream(), never by sharing a stream mutably.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  static std::uint64_t word_at(std::uint64_t seed, std::uint64_t stream_id,
                               std::uint64_t counter);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64() { return word_at(seed_, stream_, counter_++); }

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n); n must be positive.
  std::int64_t uniform_int(std::int64_t n);

  /// Standard normal via Box-Muller; consumes exactly two words.
  double normal();

  /// Derived independent stream with counter reset to zero.
  RngStream substream(std::uint64_t id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace latentforge
