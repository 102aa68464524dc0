#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace tguard {

/// Fixed-width bit vector carried between IP cores each cycle.
///
/// Bit 0 is the least-significant bit. Every module indexes bits this way:
/// obfuscation pairs start at bit 0, CRC blocks are cut LSB-first, and the
/// Trojan leak lane sits in the most-significant bits.
class Word {
 public:
  static constexpr std::size_t kMaxWidth = 256;

  Word() = default;
  /// Throws ConfigError unless 1 <= width <= kMaxWidth. `value` is truncated
  /// to `width` bits.
  explicit Word(std::size_t width, std::uint64_t value = 0);

  /// Parses "0x..." or plain hex. Digits above `width` must be zero.
  static Word from_hex(std::size_t width, std::string_view text);

  std::size_t width() const { return width_; }

  bool bit(std::size_t index) const {
    return (limbs_[index / 64] >> (index % 64)) & 1u;
  }
  void set_bit(std::size_t index, bool value) {
    const std::uint64_t m = std::uint64_t{1} << (index % 64);
    if (value) {
      limbs_[index / 64] |= m;
    } else {
      limbs_[index / 64] &= ~m;
    }
  }

  /// Bits [8*index, 8*index + 8), zero-filled past the word width.
  std::uint8_t byte(std::size_t index) const;
  void set_byte(std::size_t index, std::uint8_t value);

  /// Low 64 bits.
  std::uint64_t low64() const { return limbs_[0]; }

  /// Rotate left by `amount` within the word width.
  Word rotl(std::size_t amount) const;
  Word rotr(std::size_t amount) const;

  Word operator^(const Word& other) const;
  Word operator&(const Word& other) const;
  Word operator|(const Word& other) const;
  Word operator~() const;
  Word& operator^=(const Word& other) { return *this = *this ^ other; }

  std::size_t popcount() const;

  /// Lower-case hex with "0x" prefix and ceil(width/4) digits.
  std::string to_hex() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  void mask_to_width();

  std::uint16_t width_ = 0;
  std::array<std::uint64_t, 4> limbs_{};
};

}  // namespace tguard
