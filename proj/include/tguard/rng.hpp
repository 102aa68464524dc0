#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "tguard/word.hpp"

namespace tguard {

/// Seeded random stream owned by one simulation run.
///
/// A run derives independent streams from (seed, stream id) so that, for
/// example, the input stimulus is identical across schemes while each
/// scheme draws its own selection randomness.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  /// Uniform over [0, n). n must be nonzero.
  std::uint64_t uniform_below(std::uint64_t n);
  double uniform01();
  bool bernoulli(double p);
  Word word(std::size_t width);

 private:
  std::mt19937_64 engine_;
};

namespace streams {
inline constexpr std::uint64_t kInput = 1;
inline constexpr std::uint64_t kSelection = 2;
inline constexpr std::uint64_t kLogger = 3;
}  // namespace streams

}  // namespace tguard
