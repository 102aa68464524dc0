#include <doctest.h>

#include <array>
#include <random>
#include <set>
#include <vector>

#include "tguard/error.hpp"
#include "tguard/trojans.hpp"

using namespace tguard;

namespace {

// Register as a bit array, taps named by their 1-based stage number counted
// from the output end: stage 16 is bit 0.
class BitArrayLfsr {
 public:
  explicit BitArrayLfsr(std::uint16_t seed) {
    for (int i = 0; i < 16; ++i) bits_[i] = (seed >> i) & 1u;
  }
  bool next() {
    bool fb = false;
    for (int tap : {16, 14, 13, 11}) fb ^= bits_[16 - tap];
    for (int i = 0; i < 15; ++i) bits_[i] = bits_[i + 1];
    bits_[15] = fb;
    return fb;
  }

 private:
  std::array<bool, 16> bits_{};
};

IpVariant make_variant(std::optional<TrojanSpec> t, GoldenKind kind = GoldenKind::Identity) {
  IpVariant v;
  v.id = IpId{1};
  v.vendor = "v";
  v.core = "c";
  v.function = kind;
  v.trojan = std::move(t);
  return v;
}

}  // namespace

TEST_CASE("lfsr frozen sequence from seed 1") {
  // Produced once by the bit-array model above.
  const char* frozen = "10000000000101101000001000101000";
  Lfsr l(0x0001);
  BitArrayLfsr ref(0x0001);
  for (int i = 0; frozen[i]; ++i) {
    const bool bit = l.next();
    CHECK(bit == (frozen[i] == '1'));
    CHECK(bit == ref.next());
  }
}

TEST_CASE("lfsr is maximal length and never zero") {
  Lfsr l(0xace1);
  std::set<std::uint16_t> seen;
  for (int i = 0; i < 65535; ++i) {
    REQUIRE(l.state() != 0);
    seen.insert(l.state());
    l.next();
  }
  CHECK(seen.size() == 65535);
  CHECK(l.state() == 0xace1);
  CHECK_THROWS_AS(Lfsr(0), ConfigError);
}

TEST_CASE("lfsr instances with one seed agree") {
  Lfsr a(0x1234), b(0x1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("triggers") {
  const Word in(8, 0x3c);
  for (std::uint64_t c = 0; c < 20; ++c) {
    CHECK(trigger_fires(AlwaysTrigger{}, in, c));
    CHECK(trigger_fires(OddCyclesTrigger{}, in, c) == (c % 2 == 1));
    CHECK(trigger_fires(InternalCounterTrigger{5}, in, c) == (c > 0 && c % 5 == 0));
  }
  CHECK(trigger_fires(ExternalPatternTrigger{Word(8, 0x3c)}, in, 7));
  CHECK_FALSE(trigger_fires(ExternalPatternTrigger{Word(8, 0x3d)}, in, 7));
}

TEST_CASE("internal counter at half the run fires once per half run") {
  int fired = 0;
  for (std::uint64_t c = 0; c < 1000; ++c) {
    fired += trigger_fires(InternalCounterTrigger{400}, Word(8), c) ? 1 : 0;
  }
  CHECK(fired == 2);  // cycles 400 and 800
}

TEST_CASE("clean and disrupt variants") {
  VariantInstance clean(make_variant(std::nullopt), 8);
  CHECK(clean.evaluate(Word(8, 0xa5), 0) == Word(8, 0xa5));
  CHECK_FALSE(clean.fired_last());

  VariantInstance flip(make_variant(TrojanSpec{AlwaysTrigger{}, DisruptFlip{Word(8, 1)}}), 8);
  CHECK(flip.evaluate(Word(8, 0x00), 0) == Word(8, 0x01));
  CHECK(flip.fired_last());

  VariantInstance odd(make_variant(TrojanSpec{OddCyclesTrigger{}, DisruptFlip{Word(8, 1)}}), 8);
  const std::array<unsigned, 4> expected{0x00, 0x01, 0x00, 0x01};
  for (std::uint64_t c = 0; c < 4; ++c) CHECK(odd.evaluate(Word(8, 0), c) == Word(8, expected[c]));
}

TEST_CASE("variant width checks") {
  CHECK_THROWS_AS(
      VariantInstance(make_variant(TrojanSpec{AlwaysTrigger{}, DisruptFlip{Word(4, 1)}}), 8),
      ConfigError);
  CHECK_THROWS_AS(VariantInstance(make_variant(TrojanSpec{ExternalPatternTrigger{Word(4)},
                                                          DisruptFlip{Word(8, 1)}}),
                                  8),
                  ConfigError);
  CHECK_THROWS_AS(VariantInstance(make_variant(std::nullopt, GoldenKind::Alu), 3), ConfigError);
}

TEST_CASE("disrupt output differs from golden exactly when the trigger fires") {
  std::mt19937_64 gen(5);
  VariantInstance v(
      make_variant(TrojanSpec{InternalCounterTrigger{7}, DisruptFlip{Word(16, 0x8000)}},
                   GoldenKind::Alu),
      16);
  GoldenModel golden(GoldenKind::Alu, 16);
  for (std::uint64_t c = 0; c < 500; ++c) {
    const Word in(16, gen());
    const bool differs = v.evaluate(in, c) != golden.eval(in);
    CHECK(differs == trigger_fires(InternalCounterTrigger{7}, in, c));
  }
}

TEST_CASE("leak lane and attacker recovery") {
  CHECK(leak_lane_width(1) == 1);
  CHECK(leak_lane_width(8) == 1);
  CHECK(leak_lane_width(9) == 2);
  CHECK(leak_lane_width(64) == 8);

  const Word secret = Word::from_hex(40, "0x5ecb17c0de");
  for (std::size_t width : {8u, 16u, 33u, 64u}) {
    VariantInstance v(make_variant(TrojanSpec{AlwaysTrigger{}, LeakXorPrng{secret, 0xbeef}}),
                      width);
    std::mt19937_64 gen(width);
    std::vector<Word> observed;
    for (std::uint64_t c = 0; c < 64; ++c) {
      const Word in(width, gen());
      const Word out = v.evaluate(in, c);
      const std::size_t lane = leak_lane_width(width);
      for (std::size_t i = 0; i + lane < width; ++i) CHECK(out.bit(i) == in.bit(i));
      observed.push_back(out);
    }
    const auto got = recover_leaked_secret(observed, 0xbeef, 40);
    REQUIRE(got.has_value());
    CHECK(*got == secret);
    CHECK(recover_leaked_secret(observed, 0xbeee, 40) != secret);
  }
  CHECK_FALSE(recover_leaked_secret(std::vector<Word>{Word(8)}, 0xbeef, 40).has_value());
}

TEST_CASE("secret cursor wraps after the last bit") {
  const Word secret(3, 0b101);
  VariantInstance v(make_variant(TrojanSpec{AlwaysTrigger{}, LeakXorPrng{secret, 0x0001}}), 8);
  Lfsr prng(0x0001);
  for (std::uint64_t c = 0; c < 9; ++c) {
    const bool top = v.evaluate(Word(8), c).bit(7);
    CHECK(top == (prng.next() != secret.bit(c % 3)));
  }
}

TEST_CASE("alu operations") {
  GoldenModel alu(GoldenKind::Alu, 10);  // operands 4 bits each, op in bits 9..8
  auto in = [](unsigned op, unsigned a, unsigned b) { return Word(10, (op << 8) | (b << 4) | a); };
  CHECK(alu.eval(in(0, 9, 8)) == Word(10, 17));  // 9 + 8 with carry into bit 4
  CHECK(alu.eval(in(0, 3, 4)) == Word(10, 7));
  CHECK(alu.eval(in(1, 0b1100, 0b1010)) == Word(10, 0b1000));
  CHECK(alu.eval(in(2, 0b1100, 0b1010)) == Word(10, 0b0110));
  CHECK(alu.eval(in(3, 0b1100, 0)) == Word(10, 0b0011));
}

TEST_CASE("serializer replays each frame eight cycles later") {
  GoldenModel ser(GoldenKind::Serializer, 1);
  std::mt19937_64 gen(1);
  std::vector<bool> in;
  for (int c = 0; c < 80; ++c) {
    in.push_back(gen() & 1u);
    const bool out = ser.eval(Word(1, in.back())).bit(0);
    CHECK(out == (c >= 8 && in[c - 8]));
  }
}

TEST_CASE("golden kind names") {
  for (auto k : {GoldenKind::Identity, GoldenKind::Alu, GoldenKind::Serializer}) {
    CHECK(golden_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(golden_kind_from_string("uart"), ConfigError);
}
