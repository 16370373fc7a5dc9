#pragma once

#include <cstdint>
#include <string_view>

namespace dhforge {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Counter-based generator: draw i is a pure function of (seed, stream, i),
/// so results are identical across platforms and independent streams never
/// perturb each other.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream);
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  /// Uniform in [0, n), unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dhforge
