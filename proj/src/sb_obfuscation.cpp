#include "tguard/sb_obfuscation.hpp"

#include "tguard/error.hpp"

namespace tguard::sb {

namespace {

void swap_bits(Word& w, std::size_t i, std::size_t j) {
  const bool a = w.bit(i);
  w.set_bit(i, w.bit(j));
  w.set_bit(j, a);
}

}  // namespace

Word obfuscate(const Word& w) {
  const std::size_t width = w.width();
  if (width < 2) return w;
  Word out(width);
  for (std::size_t k = 0; 2 * k + 1 < width; ++k) {
    const bool a = w.bit(2 * k);
    const bool b = w.bit(2 * k + 1);
    const bool c = (k % 2 == 0) ? (a != b) : (a == b);
    out.set_bit(2 * k, b);
    out.set_bit(2 * k + 1, c);
  }
  if (width % 2 == 1) {
    out.set_bit(width - 1, w.bit(width - 1));
    swap_bits(out, width - 1, 0);
  }
  return out;
}

Word deobfuscate(const Word& w) {
  const std::size_t width = w.width();
  if (width < 2) return w;
  Word in = w;
  if (width % 2 == 1) swap_bits(in, width - 1, 0);
  Word out(width);
  for (std::size_t k = 0; 2 * k + 1 < width; ++k) {
    const bool b = in.bit(2 * k);
    const bool c = in.bit(2 * k + 1);
    const bool a = (k % 2 == 0) ? (b != c) : (b == c);
    out.set_bit(2 * k, a);
    out.set_bit(2 * k + 1, b);
  }
  if (width % 2 == 1) out.set_bit(width - 1, in.bit(width - 1));
  return out;
}

Word obfuscate_with(const Word& w, std::size_t index) {
  return obfuscate(w).rotl(index);
}

Word deobfuscate_with(const Word& w, std::size_t index) {
  return deobfuscate(w.rotr(index));
}

Channel::Channel(std::size_t family_size, std::uint64_t period)
    : family_size_(family_size), period_(period) {
  if (family_size == 0) throw ConfigError("obfuscation family must not be empty");
}

void Channel::tick(std::uint64_t cycle) {
  if (period_ != 0 && cycle != 0 && cycle % period_ == 0) rotate();
}

void Channel::rotate() {
  if (family_size_ < 2) {
    ++noop_rotations_;
    return;
  }
  active_ = (active_ + 1) % family_size_;
  ++rotations_;
}

std::size_t Channel::index_at(std::uint64_t cycle, std::uint64_t period,
                              std::size_t family_size) {
  if (period == 0 || family_size == 0) return 0;
  return static_cast<std::size_t>((cycle / period) % family_size);
}

}  // namespace tguard::sb
