#include "tguard/word.hpp"

#include <bit>
#include <cctype>

#include "tguard/error.hpp"

namespace tguard {

Word::Word(std::size_t width, std::uint64_t value) {
  if (width < 1 || width > kMaxWidth) {
    throw ConfigError("word width must be in [1, 256], got " +
                      std::to_string(width));
  }
  width_ = static_cast<std::uint16_t>(width);
  limbs_[0] = value;
  mask_to_width();
}

Word Word::from_hex(std::size_t width, std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  if (text.empty()) throw ConfigError("empty hex literal");
  Word w(width);
  std::size_t pos = 0;
  for (auto it = text.rbegin(); it != text.rend(); ++it, pos += 4) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(*it)));
    unsigned nibble = 0;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a' + 10);
    } else if (c == '_') {
      pos -= 4;
      continue;
    } else {
      throw ConfigError("bad hex digit in '" + std::string(text) + "'");
    }
    for (unsigned b = 0; b < 4; ++b) {
      if (!((nibble >> b) & 1u)) continue;
      if (pos + b >= width) {
        throw ConfigError("hex literal '" + std::string(text) +
                          "' exceeds width " + std::to_string(width));
      }
      w.set_bit(pos + b, true);
    }
  }
  return w;
}

std::uint8_t Word::byte(std::size_t index) const {
  const std::size_t lo = index * 8;
  if (lo >= width_) return 0;
  // Byte boundaries never straddle a 64-bit limb.
  return static_cast<std::uint8_t>(limbs_[lo / 64] >> (lo % 64));
}

void Word::set_byte(std::size_t index, std::uint8_t value) {
  const std::size_t lo = index * 8;
  limbs_[lo / 64] &= ~(std::uint64_t{0xff} << (lo % 64));
  limbs_[lo / 64] |= std::uint64_t{value} << (lo % 64);
  mask_to_width();
}

Word Word::rotl(std::size_t amount) const {
  if (width_ == 0) return *this;
  amount %= width_;
  if (amount == 0) return *this;
  Word out(width_);
  for (std::size_t i = 0; i < width_; ++i) {
    out.set_bit((i + amount) % width_, bit(i));
  }
  return out;
}

Word Word::rotr(std::size_t amount) const {
  if (width_ == 0) return *this;
  return rotl(width_ - amount % width_);
}

Word Word::operator^(const Word& other) const {
  Word out = *this;
  for (std::size_t i = 0; i < limbs_.size(); ++i) out.limbs_[i] ^= other.limbs_[i];
  out.mask_to_width();
  return out;
}

Word Word::operator&(const Word& other) const {
  Word out = *this;
  for (std::size_t i = 0; i < limbs_.size(); ++i) out.limbs_[i] &= other.limbs_[i];
  return out;
}

Word Word::operator|(const Word& other) const {
  Word out = *this;
  for (std::size_t i = 0; i < limbs_.size(); ++i) out.limbs_[i] |= other.limbs_[i];
  out.mask_to_width();
  return out;
}

Word Word::operator~() const {
  Word out = *this;
  for (auto& limb : out.limbs_) limb = ~limb;
  out.mask_to_width();
  return out;
}

std::size_t Word::popcount() const {
  std::size_t n = 0;
  for (auto limb : limbs_) n += static_cast<std::size_t>(std::popcount(limb));
  return n;
}

std::string Word::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (width_ + 3) / 4;
  std::string out = "0x";
  out.reserve(2 + digits);
  for (std::size_t d = digits; d-- > 0;) {
    const std::size_t lo = d * 4;
    const unsigned nibble =
        static_cast<unsigned>(limbs_[lo / 64] >> (lo % 64)) & 0xfu;
    out.push_back(kDigits[nibble]);
  }
  return out;
}

void Word::mask_to_width() {
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    const std::size_t lo = i * 64;
    if (lo >= width_) {
      limbs_[i] = 0;
    } else if (width_ - lo < 64) {
      limbs_[i] &= (std::uint64_t{1} << (width_ - lo)) - 1;
    }
  }
}

}  // namespace tguard
