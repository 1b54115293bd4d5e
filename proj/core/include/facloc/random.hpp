#pragma once

#include <cstdint>

namespace facloc {

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: the i-th draw of stream s under seed k is a pure
/// function of (k, s, i). Streams split without sharing state, so parallel
/// work units replay identically regardless of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  CounterRng split(std::uint64_t substream) const noexcept;

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace facloc
