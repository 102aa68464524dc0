#include "tguard/crc5.hpp"

#include "tguard/error.hpp"

namespace tguard {

CrcValue::CrcValue(unsigned value) : value_(static_cast<std::uint8_t>(value)) {
  if (value >= 32) {
    throw ConfigError("CRC-5 value out of range: " + std::to_string(value));
  }
}

std::string CrcValue::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  return {kDigits[value_ >> 4], kDigits[value_ & 0xf]};
}

CrcValue crc5(std::uint8_t block) {
  unsigned reg = 0;
  for (int i = 7; i >= 0; --i) {
    const unsigned feedback = ((reg >> 4) ^ (block >> i)) & 1u;
    reg = (reg << 1) & 0x1fu;
    if (feedback) reg ^= kCrc5Poly;
  }
  return CrcValue(reg);
}

std::vector<CrcValue> CrcStream::push(const Word& word) {
  std::vector<CrcValue> out;
  if (fill_ == 0 && word.width() % 8 == 0) {
    out.reserve(word.width() / 8);
    for (std::size_t i = 0; i < word.width() / 8; ++i) {
      out.push_back(crc5(word.byte(i)));
    }
    return out;
  }
  for (std::size_t i = 0; i < word.width(); ++i) {
    if (word.bit(i)) acc_ |= static_cast<std::uint8_t>(1u << fill_);
    if (++fill_ == 8) {
      out.push_back(crc5(acc_));
      reset();
    }
  }
  return out;
}

std::vector<CrcValue> crc5_stream(std::span<const Word> words) {
  CrcStream stream;
  std::vector<CrcValue> out;
  for (const auto& w : words) {
    auto blocks = stream.push(w);
    out.insert(out.end(), blocks.begin(), blocks.end());
  }
  return out;
}

}  // namespace tguard
