#pragma once

#include <cstdint>

#include "tguard/word.hpp"

namespace tguard::sb {

/// Pairwise confusion function.
///
/// Bits are taken in pairs (A = bit 2k, B = bit 2k+1) starting from bit 0.
/// B moves into A's place and C lands in B's place, with C = A xor B on even
/// pairs and C = A xnor B on odd pairs. With an odd width the unpaired top
/// bit is then swapped with bit 0. Width 1 passes through.
Word obfuscate(const Word& w);

/// Exact inverse of obfuscate().
Word deobfuscate(const Word& w);

/// Member `index` of the rotation family: obfuscate() followed by a left
/// rotation of `index` bits. Index 0 is the base function.
Word obfuscate_with(const Word& w, std::size_t index);
Word deobfuscate_with(const Word& w, std::size_t index);

/// A sender/receiver pair sharing one family of confusion functions.
///
/// Both ends read the same active index, so a switch takes effect for the
/// encoder and decoder on the same cycle.
class Channel {
 public:
  /// `period` 0 disables rotation. family_size must be >= 1.
  Channel(std::size_t family_size, std::uint64_t period);

  /// Advances to the function for `cycle`; call once per cycle before
  /// encode/decode. Rotates at positive multiples of the period.
  void tick(std::uint64_t cycle);
  /// Switches sender and receiver to the next family member. With a
  /// single-member family this is a no-op, counted in noop_rotations().
  void rotate();

  Word encode(const Word& w) const { return obfuscate_with(w, active_); }
  Word decode(const Word& w) const { return deobfuscate_with(w, active_); }

  std::size_t active_index() const { return active_; }
  std::size_t family_size() const { return family_size_; }
  std::uint64_t rotations() const { return rotations_; }
  std::uint64_t noop_rotations() const { return noop_rotations_; }

  /// floor(cycle / period) mod family_size.
  static std::size_t index_at(std::uint64_t cycle, std::uint64_t period,
                              std::size_t family_size);

 private:
  std::size_t family_size_;
  std::uint64_t period_;
  std::size_t active_ = 0;
  std::uint64_t rotations_ = 0;
  std::uint64_t noop_rotations_ = 0;
};

}  // namespace tguard::sb
