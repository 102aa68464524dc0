#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tguard/word.hpp"

namespace tguard {

/// 5-bit CRC remainder.
class CrcValue {
 public:
  constexpr CrcValue() = default;
  /// Throws ConfigError if value >= 32.
  explicit CrcValue(unsigned value);

  constexpr std::uint8_t value() const { return value_; }
  /// Two-digit lower-case hex, e.g. "0e".
  std::string to_hex() const;

  friend constexpr bool operator==(CrcValue, CrcValue) = default;
  friend constexpr auto operator<=>(CrcValue, CrcValue) = default;

 private:
  std::uint8_t value_ = 0;
};

/// Generator x^5 + x^2 + 1 (the x^5 term implicit).
inline constexpr std::uint8_t kCrc5Poly = 0x05;

/// CRC of one 8-bit block: remainder of block(x) * x^5 mod g(x) over GF(2),
/// message bits taken MSB-first, register initialised to 0, no reflection,
/// no final XOR.
CrcValue crc5(std::uint8_t block);

/// Incremental CRC over a stream of words.
///
/// Word bits are appended to the stream LSB-first; every 8 consecutive stream
/// bits form one block whose first bit becomes the block's bit 0. A trailing
/// partial block is held until later words complete it.
class CrcStream {
 public:
  /// Appends one word and returns the CRCs of the blocks it completed.
  std::vector<CrcValue> push(const Word& word);

  std::size_t pending_bits() const { return fill_; }
  void reset() {
    acc_ = 0;
    fill_ = 0;
  }

 private:
  std::uint8_t acc_ = 0;
  std::size_t fill_ = 0;
};

/// One CRC per completed block of the concatenated word stream.
std::vector<CrcValue> crc5_stream(std::span<const Word> words);

}  // namespace tguard
