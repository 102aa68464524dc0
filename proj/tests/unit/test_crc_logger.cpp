#include <doctest.h>

#include <deque>
#include <random>
#include <sstream>

#include "tguard/crc_logger.hpp"
#include "tguard/error.hpp"

using namespace tguard;
using namespace tguard::logger;

namespace {

struct Drive {
  std::vector<Word> inputs;
  std::vector<LogEntry> entries;
  std::uint64_t overwrites = 0;
};

// Runs `cycles` random inputs through `kind` with an optional output flip
// on the cycles `corrupt` selects.
template <class Corrupt>
Drive drive(std::size_t width, GoldenKind kind, LoggerConfig cfg, std::uint64_t cycles,
            std::uint64_t seed, Corrupt corrupt) {
  CrcLogger log(width, cfg, seed);
  GoldenModel model(kind, width);
  std::mt19937_64 gen(seed);
  Drive d;
  for (std::uint64_t c = 0; c < cycles; ++c) {
    d.inputs.emplace_back(width, gen());
    Word out = model.eval(d.inputs.back());
    if (auto mask = corrupt(c)) out ^= *mask;
    log.log_cycle(c, d.inputs.back(), out);
  }
  d.entries = log.entries();
  d.overwrites = log.overwrites();
  return d;
}

auto none = [](std::uint64_t) -> std::optional<Word> { return std::nullopt; };

}  // namespace

TEST_CASE("capacity four keeps the newest four entries") {
  CrcLogger log(8, LoggerConfig{4, AlwaysOn{}}, 1);
  for (std::uint64_t c = 0; c < 6; ++c) log.log_cycle(c, Word(8, c), Word(8, c + 100));
  const auto e = log.entries();
  REQUIRE(e.size() == 4);
  CHECK(e[0] == LogEntry{4, Direction::Input, crc5(4)});
  CHECK(e[1] == LogEntry{4, Direction::Output, crc5(104)});
  CHECK(e[2] == LogEntry{5, Direction::Input, crc5(5)});
  CHECK(e[3] == LogEntry{5, Direction::Output, crc5(105)});
  CHECK(log.overwrites() == 8);
}

TEST_CASE("ring matches a reference list model") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t width = std::array<std::size_t, 4>{8, 16, 24, 64}[trial % 4];
    const std::size_t capacity = 1 + gen() % 40;
    const std::uint64_t lo = gen() % 50, hi = lo + gen() % 50;
    CrcLogger log(width, LoggerConfig{capacity, Windows{{{lo, hi}}}}, 1);
    std::vector<LogEntry> all;
    for (std::uint64_t c = 0; c < 120; ++c) {
      Word in(width, gen()), out(width, gen());
      log.log_cycle(c, in, out);
      if (c < lo || c > hi) continue;
      for (std::size_t b = 0; b < width / 8; ++b) all.push_back({c, Direction::Input, crc5(in.byte(b))});
      for (std::size_t b = 0; b < width / 8; ++b) all.push_back({c, Direction::Output, crc5(out.byte(b))});
    }
    const std::size_t keep = std::min(capacity, all.size());
    const std::vector<LogEntry> expect(all.end() - static_cast<std::ptrdiff_t>(keep), all.end());
    CHECK(log.entries() == expect);
    CHECK(log.overwrites() == all.size() - keep);
  }
}

TEST_CASE("window gating and duty extremes") {
  CrcLogger windowed(8, LoggerConfig{16, Windows{{{10, 20}}}}, 1);
  windowed.log_cycle(5, Word(8, 1), Word(8, 1));
  CHECK(windowed.entries().empty());

  const auto a = drive(8, GoldenKind::Identity, LoggerConfig{64, AlwaysOn{}}, 40, 3, none);
  const auto b = drive(8, GoldenKind::Identity, LoggerConfig{64, RandomDuty{1.0}}, 40, 3, none);
  CHECK(a.entries == b.entries);
  const auto z = drive(8, GoldenKind::Identity, LoggerConfig{64, RandomDuty{0.0}}, 40, 3, none);
  CHECK(z.entries.empty());
  CHECK_THROWS_AS((LoggerConfig{8, RandomDuty{1.5}}.validate()), ConfigError);
  CHECK_THROWS_AS((LoggerConfig{0, AlwaysOn{}}.validate()), ConfigError);
}

TEST_CASE("sub-byte widths log only fully enabled blocks") {
  // W=2: blocks cover cycles 4k..4k+3.
  CrcLogger log(2, LoggerConfig{64, Windows{{{2, 9}}}}, 1);
  for (std::uint64_t c = 0; c < 16; ++c) log.log_cycle(c, Word(2, c), Word(2, c));
  const auto e = log.entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].cycle == 7);
  const unsigned block = 0 | (1 << 2) | (2 << 4) | (3 << 6);  // cycles 4..7
  CHECK(e[0].crc == crc5(static_cast<std::uint8_t>(block)));
  CHECK_THROWS_AS(CrcLogger(3, LoggerConfig{}, 1), ConfigError);
}

TEST_CASE("clean logs compare clean") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t width = std::array<std::size_t, 5>{1, 2, 4, 8, 32}[trial % 5];
    const auto kind = width == 1 ? GoldenKind::Serializer
                                 : (width == 32 ? GoldenKind::Alu : GoldenKind::Identity);
    LoggerConfig cfg;
    cfg.capacity = 1 + gen() % 300;
    switch (trial % 3) {
      case 0:
        cfg.mode = AlwaysOn{};
        break;
      case 1:
        cfg.mode = RandomDuty{static_cast<double>(gen() % 100) / 100.0};
        break;
      default:
        cfg.mode = Windows{{{gen() % 100, 100 + gen() % 200}}};
        break;
    }
    const auto d = drive(width, kind, cfg, 400, gen(), none);
    CHECK(extract_and_compare(d.entries, kind, d.inputs).empty());
  }
}

TEST_CASE("always-on disrupt shows up at every logged output") {
  const auto d = drive(8, GoldenKind::Identity, LoggerConfig{1000, AlwaysOn{}}, 50, 2,
                       [](std::uint64_t) { return std::optional<Word>(Word(8, 1)); });
  const auto m = extract_and_compare(d.entries, GoldenKind::Identity, d.inputs);
  REQUIRE(m.size() == 50);
  for (std::uint64_t c = 0; c < 50; ++c) CHECK(m[c] == Mismatch{c, Direction::Output});
}

TEST_CASE("odd-cycle Trojan mismatches at odd cycles inside windows") {
  const LoggerConfig cfg{1000, Windows{{{10, 30}, {60, 70}}}};
  const auto d = drive(16, GoldenKind::Identity, cfg, 100, 4, [](std::uint64_t c) {
    return trigger_fires(OddCyclesTrigger{}, Word(16), c) ? std::optional<Word>(Word(16, 0x100))
                                                          : std::nullopt;
  });
  const auto m = extract_and_compare(d.entries, GoldenKind::Identity, d.inputs);
  std::vector<std::uint64_t> cycles;
  for (const auto& x : m) cycles.push_back(x.cycle);
  std::vector<std::uint64_t> expect;
  for (std::uint64_t c = 0; c < 100; ++c) {
    if (c % 2 == 1 && ((c >= 10 && c <= 30) || (c >= 60 && c <= 70))) expect.push_back(c);
  }
  CHECK(cycles == expect);
}

TEST_CASE("any single flipped bit in a retained block is reported") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t width = std::array<std::size_t, 3>{2, 8, 24}[trial % 3];
    const std::uint64_t cycles = 64;
    const std::uint64_t target = gen() % cycles;
    const std::size_t bit = gen() % width;
    const auto d = drive(width, GoldenKind::Identity, LoggerConfig{10000, AlwaysOn{}}, cycles,
                         gen(), [&](std::uint64_t c) {
                           std::optional<Word> m;
                           if (c == target) {
                             m = Word(width);
                             m->set_bit(bit, true);
                           }
                           return m;
                         });
    const auto m = extract_and_compare(d.entries, GoldenKind::Identity, d.inputs);
    REQUIRE(m.size() == 1);
    const std::uint64_t per_block = width < 8 ? 8 / width : 1;
    CHECK(m[0].cycle == (target / per_block) * per_block + per_block - 1);
  }
}

TEST_CASE("a truncated oldest group still aligns") {
  // Capacity 5 with 3 blocks per direction leaves a partial first group.
  const auto d = drive(24, GoldenKind::Identity, LoggerConfig{5, AlwaysOn{}}, 10, 6, none);
  REQUIRE(d.entries.size() == 5);
  CHECK(d.entries[0].direction == Direction::Input);
  CHECK(d.entries[1].direction == Direction::Input);
  CHECK(d.entries[2].direction == Direction::Output);
  CHECK(extract_and_compare(d.entries, GoldenKind::Identity, d.inputs).empty());
}

TEST_CASE("misaligned trace is rejected with the divergent cycle") {
  auto d = drive(8, GoldenKind::Identity, LoggerConfig{100, AlwaysOn{}}, 20, 8, none);
  auto wrong = d.inputs;
  wrong[13] ^= Word(8, 0x40);
  try {
    extract_and_compare(d.entries, GoldenKind::Identity, wrong);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.cycle() == 13);
  }
  const std::vector<Word> short_trace(d.inputs.begin(), d.inputs.begin() + 10);
  CHECK_THROWS_AS(extract_and_compare(d.entries, GoldenKind::Identity, short_trace),
                  AlignmentError);
}

TEST_CASE("export and import round trip") {
  const auto d = drive(16, GoldenKind::Identity, LoggerConfig{30, AlwaysOn{}}, 20, 9, none);
  std::stringstream ss;
  export_log(ss, d.entries);
  // 30 of 80 entries survive: the output half of cycle 12, then cycles 13..19.
  CHECK(ss.str().rfind("12,out,", 0) == 0);
  CHECK(import_log(ss) == d.entries);
  std::istringstream bad("12,sideways,05\n");
  CHECK_THROWS_AS(import_log(bad), ConfigError);
  std::istringstream worse("x,in,05\n");
  CHECK_THROWS_AS(import_log(worse), ConfigError);
}
