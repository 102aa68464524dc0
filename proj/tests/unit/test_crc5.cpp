#include <doctest.h>

#include <cstdint>
#include <vector>

#include "tguard/crc5.hpp"
#include "tguard/error.hpp"

using namespace tguard;

namespace {

// Long division of block(x) * x^5 by x^5 + x^2 + 1, one polynomial term at
// a time, on a plain integer.
unsigned division_oracle(std::uint8_t block) {
  unsigned dividend = static_cast<unsigned>(block) << 5;
  const unsigned generator = 0b100101;
  for (int degree = 12; degree >= 5; --degree) {
    if (dividend & (1u << degree)) dividend ^= generator << (degree - 5);
  }
  return dividend;
}

}  // namespace

TEST_CASE("documented values") {
  CHECK(crc5(0x00).value() == 0x00);
  CHECK(crc5(0x01).value() == 0x05);
  CHECK(crc5(0x80).value() == 0x0e);
  CHECK(division_oracle(0x01) == 0x05);
  CHECK(division_oracle(0x80) == 0x0e);
  CHECK(crc5(0x80).to_hex() == "0e");
}

TEST_CASE("matches the division oracle on every block") {
  for (unsigned b = 0; b < 256; ++b) {
    CHECK(crc5(static_cast<std::uint8_t>(b)).value() == division_oracle(static_cast<std::uint8_t>(b)));
  }
}

TEST_CASE("every single-bit flip changes the CRC") {
  int detected = 0;
  for (unsigned b = 0; b < 256; ++b) {
    for (unsigned k = 0; k < 8; ++k) {
      const auto flipped = static_cast<std::uint8_t>(b ^ (1u << k));
      detected += crc5(static_cast<std::uint8_t>(b)) != crc5(flipped) ? 1 : 0;
    }
  }
  CHECK(detected == 2048);
}

TEST_CASE("linearity over all pairs") {
  const unsigned zero = crc5(0).value();
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      const unsigned lhs = crc5(static_cast<std::uint8_t>(a ^ b)).value();
      const unsigned rhs = crc5(static_cast<std::uint8_t>(a)).value() ^
                           crc5(static_cast<std::uint8_t>(b)).value() ^ zero;
      if (lhs != rhs) FAIL("linearity broken at " << a << "," << b);
    }
  }
}

TEST_CASE("CrcValue range") {
  CHECK_THROWS_AS(CrcValue(32), ConfigError);
  CHECK(CrcValue(31).value() == 31);
}

TEST_CASE("stream: byte-wide words map block by block") {
  std::vector<Word> words;
  for (unsigned v : {0x00u, 0x01u, 0x80u, 0x5au}) words.emplace_back(8, v);
  const auto crcs = crc5_stream(words);
  REQUIRE(crcs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(crcs[i] == crc5(words[i].byte(0)));
}

TEST_CASE("stream: serial bits complete a block on the eighth word") {
  CrcStream s;
  const std::uint8_t block = 0xb4;
  for (int i = 0; i < 8; ++i) {
    const auto out = s.push(Word(1, (block >> i) & 1u));
    if (i < 7) {
      CHECK(out.empty());
      CHECK(s.pending_bits() == static_cast<std::size_t>(i + 1));
    } else {
      REQUIRE(out.size() == 1);
      CHECK(out[0] == crc5(block));
    }
  }
}

TEST_CASE("stream: 16-bit words give low block first") {
  const auto crcs = crc5_stream(std::vector<Word>{Word(16, 0x8001)});
  REQUIRE(crcs.size() == 2);
  CHECK(crcs[0].value() == division_oracle(0x01));
  CHECK(crcs[1].value() == division_oracle(0x80));
}

TEST_CASE("stream: odd widths straddle blocks") {
  // Three 3-bit words carry 9 bits: one block plus one pending bit.
  CrcStream s;
  std::vector<CrcValue> all;
  for (unsigned v : {0b101u, 0b110u, 0b011u}) {
    for (auto c : s.push(Word(3, v))) all.push_back(c);
  }
  REQUIRE(all.size() == 1);
  const unsigned bits = 0b101 | (0b110 << 3) | (0b011 << 6);
  CHECK(all[0] == crc5(static_cast<std::uint8_t>(bits & 0xff)));
  CHECK(s.pending_bits() == 1);
  s.reset();
  CHECK(s.pending_bits() == 0);
}
