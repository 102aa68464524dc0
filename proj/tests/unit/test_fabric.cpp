#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tguard/error.hpp"
#include "tguard/fabric.hpp"

using namespace tguard;

namespace {

std::vector<IpVariant> variants(std::size_t n, GoldenKind kind = GoldenKind::Identity) {
  std::vector<IpVariant> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    IpVariant v;
    v.id = IpId{i};
    v.vendor = "vendor" + std::to_string(i);
    v.core = "core" + std::to_string(i);
    v.function = kind;
    out.push_back(v);
  }
  return out;
}

std::size_t accounted(const Fabric& f) {
  std::size_t n = f.queue().size() + f.discarded().size();
  for (std::size_t s = 0; s < f.slot_count(); ++s) {
    if (!std::holds_alternative<SlotEmpty>(f.slot(s))) ++n;
  }
  return n;
}

std::set<std::uint32_t> all_placed_ids(const Fabric& f) {
  std::set<std::uint32_t> ids;
  for (auto ip : f.queue()) ids.insert(ip.value);
  for (auto ip : f.discarded()) ids.insert(ip.value);
  for (std::size_t s = 0; s < f.slot_count(); ++s) {
    if (auto p = f.programmed_ip(s)) ids.insert(p->value);
    if (const auto* sw = std::get_if<SlotSwapping>(&f.slot(s))) ids.insert(sw->incoming.value);
  }
  return ids;
}

}  // namespace

TEST_CASE("cost model") {
  CHECK(PrCostModel{}.swap_cycles == 8);
  CHECK(PrCostModel{}.full_program_cycles == 100);
  CHECK(PrCostModel::from_full_program(1000).swap_cycles == 80);
  CHECK(PrCostModel::from_full_program(5500).swap_cycles == 440);
  CHECK(PrCostModel::from_full_program(5).swap_cycles == 1);
  CHECK(PrCostModel::from_full_program(100).ratio() == doctest::Approx(0.08));
  CHECK_THROWS_AS(PrCostModel::from_full_program(0), ConfigError);
}

TEST_CASE("step yields one word per programmed slot") {
  Fabric f(8, 3, PrCostModel{}, variants(4));
  const auto out = f.step(Word(8, 0x0f));
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i].slot == i);
    CHECK(out[i].ip == IpId{static_cast<std::uint32_t>(i)});
    CHECK(out[i].word == Word(8, 0x0f));
  }
  CHECK(f.cycle() == 1);
  CHECK(f.golden_output() == Word(8, 0x0f));
  CHECK(f.queue().size() == 1);
  CHECK_THROWS_AS(f.step(Word(4)), ConfigError);
}

TEST_CASE("swap countdown and transition") {
  Fabric f(8, 3, PrCostModel{2, 25}, variants(4));
  f.begin_swap(1, Outgoing::Requeue);
  const auto* sw = std::get_if<SlotSwapping>(&f.slot(1));
  REQUIRE(sw != nullptr);
  CHECK(sw->remaining_cycles == 2);
  CHECK(sw->incoming == IpId{3});
  CHECK(f.queue().back() == IpId{1});

  auto out = f.step(Word(8));
  CHECK(out.size() == 2);
  CHECK(std::get<SlotSwapping>(f.slot(1)).remaining_cycles == 1);
  out = f.step(Word(8));
  CHECK(out.size() == 2);
  CHECK(f.programmed_ip(1) == IpId{3});
  CHECK(f.step(Word(8)).size() == 3);
}

TEST_CASE("swap errors") {
  Fabric f(8, 3, PrCostModel{}, variants(4));
  f.begin_swap(0, Outgoing::Discard);
  CHECK_THROWS_AS(f.begin_swap(0, Outgoing::Requeue), SwapError);
  CHECK_THROWS_AS(f.begin_swap(1, Outgoing::Requeue), SwapError);  // queue empty now
  CHECK_THROWS_AS(Fabric(8, 3, PrCostModel{}, variants(2)), ConfigError);
  auto dup = variants(3);
  dup[2].id = IpId{0};
  CHECK_THROWS_AS(Fabric(8, 3, PrCostModel{}, dup), ConfigError);
  auto mixed = variants(3, GoldenKind::Alu);
  mixed[1].function = GoldenKind::Identity;
  CHECK_THROWS_AS(Fabric(8, 3, PrCostModel{}, mixed), ConfigError);
}

TEST_CASE("discarded IPs never come back") {
  Fabric f(8, 3, PrCostModel{1, 12}, variants(6));
  f.begin_swap(2, Outgoing::Discard);
  for (int i = 0; i < 5; ++i) f.step(Word(8));
  PeriodicRotation rot(3);
  for (std::uint64_t c = 5; c < 200; ++c) {
    rot.tick(f, c);
    const auto out = f.step(Word(8));
    for (const auto& o : out) CHECK(o.ip != IpId{2});
    CHECK(std::find(f.queue().begin(), f.queue().end(), IpId{2}) == f.queue().end());
  }
}

TEST_CASE("evict leaves the slot empty") {
  Fabric f(8, 3, PrCostModel{}, variants(3));
  f.evict(0);
  CHECK(std::holds_alternative<SlotEmpty>(f.slot(0)));
  CHECK(f.step(Word(8)).size() == 2);
  CHECK(f.discarded().size() == 1);
}

TEST_CASE("conservation and single ownership under random operations") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t slots = 1 + gen() % 4;
    const std::size_t total = slots + gen() % 4;
    Fabric f(8, slots, PrCostModel{1 + gen() % 5, 50}, variants(total));
    for (int c = 0; c < 300; ++c) {
      const std::size_t s = gen() % slots;
      const auto op = gen() % 10;
      try {
        if (op == 0) f.begin_swap(s, Outgoing::Discard);
        if (op == 1 || op == 2) f.begin_swap(s, Outgoing::Requeue);
        if (op == 3 && gen() % 5 == 0) f.evict(s);
      } catch (const SwapError&) {
      }
      f.step(Word(8, gen()));
      REQUIRE(accounted(f) == total);
      REQUIRE(all_placed_ids(f).size() == total);
    }
  }
}

TEST_CASE("a swapped slot is silent for exactly swap_cycles cycles") {
  for (std::uint64_t cost : {1u, 3u, 8u, 80u}) {
    Fabric f(8, 3, PrCostModel{cost, 1000}, variants(4));
    f.step(Word(8));
    f.begin_swap(2, Outgoing::Requeue);
    std::uint64_t silent = 0;
    for (int c = 0; c < 200; ++c) {
      const auto out = f.step(Word(8));
      const bool live = std::any_of(out.begin(), out.end(), [](auto& o) { return o.slot == 2; });
      if (!live) ++silent;
    }
    CHECK(silent == cost);
  }
}

TEST_CASE("incoming serializer resumes from the reference state") {
  Fabric f(1, 1, PrCostModel{3, 40}, variants(2, GoldenKind::Serializer));
  std::mt19937_64 gen(2);
  std::vector<bool> in;
  for (int c = 0; c < 64; ++c) {
    if (c == 20) f.begin_swap(0, Outgoing::Requeue);
    in.push_back(gen() & 1u);
    const auto out = f.step(Word(1, in.back()));
    for (const auto& o : out) CHECK(o.word.bit(0) == (c >= 8 && in[c - 8]));
  }
}

TEST_CASE("identical inputs give identical outputs") {
  auto run = [] {
    Fabric f(16, 3, PrCostModel{}, variants(5, GoldenKind::Alu));
    PeriodicRotation rot(7);
    std::mt19937_64 gen(9);
    std::vector<SlotOutput> trace;
    for (std::uint64_t c = 0; c < 300; ++c) {
      rot.tick(f, c);
      for (auto& o : f.step(Word(16, gen()))) trace.push_back(o);
    }
    return trace;
  };
  const auto a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].slot == b[i].slot);
    CHECK(a[i].ip == b[i].ip);
    CHECK(a[i].word == b[i].word);
  }
}

TEST_CASE("periodic rotation walks the slots round robin") {
  Fabric f(8, 3, PrCostModel{}, variants(5));
  PeriodicRotation rot(200);
  std::vector<std::size_t> hit;
  for (std::uint64_t c = 0; c < 700; ++c) {
    const auto r = rot.tick(f, c);
    if (r.outcome == RotationOutcome::Rotated) {
      hit.push_back(r.slot);
      CHECK(c % 200 == 0);
    }
    f.step(Word(8));
  }
  CHECK(hit == std::vector<std::size_t>{0, 1, 2});
  CHECK(rot.next_slot() == 0);
}

TEST_CASE("rotation with an empty queue is skipped") {
  Fabric f(8, 3, PrCostModel{}, variants(3));
  PeriodicRotation rot(10);
  const auto r = rot.tick(f, 10);
  CHECK(r.outcome == RotationOutcome::SkippedEmptyQueue);
  CHECK(rot.next_slot() == 0);
}

TEST_CASE("rotation onto a swapping slot is deferred") {
  Fabric f(8, 3, PrCostModel{50, 625}, variants(6));
  f.begin_swap(0, Outgoing::Discard);
  PeriodicRotation rot(10);
  f.step(Word(8));
  const auto r = rot.tick(f, 10);
  CHECK(r.outcome == RotationOutcome::DeferredSwapInProgress);
  CHECK(rot.next_slot() == 0);
}
