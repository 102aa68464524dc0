#include "tguard/rng.hpp"

namespace tguard {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(seeded_engine(seed, stream)) {}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

double Rng::uniform01() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

bool Rng::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform01() < p;
}

Word Rng::word(std::size_t width) {
  Word w(width);
  for (std::size_t i = 0; i < (width + 7) / 8; ++i) {
    w.set_byte(i, static_cast<std::uint8_t>(engine_()));
  }
  return w;
}

}  // namespace tguard
