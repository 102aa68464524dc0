#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "tguard/error.hpp"
#include "tguard/harness.hpp"

using namespace tguard;

namespace {

const char* kBase = R"({
  "scheme": "mcrc", "width": 8, "cycles": 2000, "slots": 3, "seed": 11,
  "threshold": 50,
  "variants": [
    {"id": 0, "vendor": "acme"},
    {"id": 1, "vendor": "bolt"},
    {"id": 2, "vendor": "crux",
     "trojan": {"trigger": "internal_counter", "period": 5, "payload": "leak_xor_prng",
                "secret": "0xc0ffee42"}},
    {"id": 3, "vendor": "dyne"}
  ]
})";

std::map<std::string, std::string> fields(const std::string& report) {
  std::map<std::string, std::string> out;
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    REQUIRE(colon != std::string::npos);
    out[line.substr(0, colon)] = line.substr(colon + 2);
  }
  return out;
}

Scenario sb_scenario(std::size_t family, std::uint64_t period, std::size_t width = 16) {
  Scenario s;
  s.scheme = Scheme::SB;
  s.width = width;
  s.cycles = 400;
  s.slots = 1;
  s.seed = 5;
  s.sb = SbConfig{true, family, period};
  IpVariant v;
  v.id = IpId{0};
  v.vendor = "crux";
  v.core = "c";
  v.trojan = TrojanSpec{AlwaysTrigger{}, LeakXorPrng{Word::from_hex(40, "0x5ecb17c0de"), 0xace1}};
  s.variants.push_back(v);
  return s;
}

}  // namespace

TEST_CASE("scenario parsing") {
  const auto s = parse_scenario(kBase);
  CHECK(s.scheme == Scheme::MCRC);
  CHECK(s.thresholds.replace == 50);
  CHECK(s.thresholds.warn == 2);
  CHECK(s.cost.swap_cycles == 8);
  CHECK(s.variants.size() == 4);
  CHECK(s.variants[0].core == "ip0");
  CHECK(s.variants[2].infected());
  const auto& leak = std::get<LeakXorPrng>(s.variants[2].trojan->payload);
  CHECK(leak.secret.width() == 32);
  CHECK(leak.lfsr_seed == 0xace1);
  CHECK(s.first_infected() == IpId{2});
}

TEST_CASE("scenario errors name the problem") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_scenario(text);
      FAIL("expected ConfigError for " << text);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  expect_error(R"({"scheme":"mv","width":8,"cycles":1,"slots":4,"seed":1,
                   "variants":[{"id":0},{"id":1},{"id":2},{"id":3}]})", "odd");
  expect_error(R"({"scheme":"mcrc","width":8,"cycles":1,"slots":2,"seed":1,
                   "variants":[{"id":0},{"id":1}]})", "3");
  expect_error(R"({"scheme":"mrvo","width":8,"cycles":1,"slots":3,"seed":1,"colour":1,
                   "variants":[{"id":0},{"id":1},{"id":2}]})", "colour");
  expect_error(R"({"scheme":"warp","width":8,"cycles":1,"slots":3,"seed":1,"variants":[]})", "warp");
  expect_error(R"({"scheme":"mrvo","width":8,"cycles":1,"slots":3,"seed":1,
                   "variants":[{"id":0},{"id":1}]})", "variants");
  expect_error("not json", "JSON");
}

TEST_CASE("initial weights file resolves against the scenario directory") {
  const auto dir = std::filesystem::temp_directory_path() / ("tguard_h_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "w.json") << R"({"weights": {"ip2": 0, "ip1": 64}})";
  std::ofstream(dir / "s.json") << R"({"scheme":"mrvo","width":8,"cycles":100,"slots":3,"seed":1,
    "selection":"biased","initial_weights_file":"w.json",
    "variants":[{"id":0},{"id":1},{"id":2,"trojan":{"trigger":"always","payload":"disrupt_flip","mask":"0x01"}}]})";
  const auto s = load_scenario(dir / "s.json");
  CHECK(s.initial_weights.at("ip2") == 0);
  CHECK(s.initial_weights.at("ip1") == 64);
  CHECK(run_scenario(s).infected_ip_rate == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reports are deterministic and well formed") {
  const auto s = parse_scenario(kBase);
  const auto a = format_report(run_scenario(s));
  const auto b = format_report(run_scenario(s));
  CHECK(a == b);
  const auto f = fields(a);
  for (const char* key : {"scheme", "infected_ip_rate", "infected_output_rate", "leak_window",
                          "first_detection_cycle", "mismatches", "events.CRC_MINORITY",
                          "protection.leaking_information", "protection.overall"}) {
    CHECK_MESSAGE(f.count(key) == 1, key);
  }
  CHECK(f.at("scheme") == "mcrc");
  CHECK(f.at("protection.overall") == "1.8 1.4 2.2 3.0");
  CHECK(f.at("infected_ip_rate").size() == 6);
  CHECK(f.at("first_detection_cycle") != "none");
}

TEST_CASE("rates stay in range for every scheme") {
  for (const char* scheme : {"mrvo", "mcrc", "mv"}) {
    auto s = parse_scenario(kBase);
    s.scheme = scheme_from_string(scheme);
    const auto r = run_scenario(s);
    for (double v : {r.infected_ip_rate, r.infected_output_rate, r.leak_window, r.exposure}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.mismatches <= r.cycles);
  }
}

TEST_CASE("disrupt-only payload: output rate never exceeds IP rate") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (bool odd : {false, true}) {
      for (auto mode : {SelectionMode::Unbiased, SelectionMode::Biased}) {
        const auto r = run_scenario(selection_bench(mode, odd, seed));
        CHECK(r.infected_output_rate <= r.infected_ip_rate);
      }
    }
  }
}

TEST_CASE("obfuscation defeats the attacker oracle") {
  for (std::size_t family : {1u, 2u, 4u}) {
    for (std::size_t width : {8u, 16u, 33u}) {
      const auto o = run_sb(sb_scenario(family, 50, width));
      REQUIRE(o.attacker_recovered_secret.has_value());
      CHECK_FALSE(*o.attacker_recovered_secret);
      CHECK(o.sb_decode_failures == 0);
    }
  }
}

TEST_CASE("logger runner checks its log offline") {
  Scenario s;
  s.scheme = Scheme::LoggerOnly;
  s.width = 8;
  s.cycles = 300;
  s.slots = 1;
  s.seed = 2;
  s.logger = logger::LoggerConfig{64, logger::AlwaysOn{}};
  IpVariant v;
  v.id = IpId{0};
  v.vendor = "x";
  v.core = "x";
  v.trojan = TrojanSpec{InternalCounterTrigger{10}, DisruptFlip{Word(8, 0x80)}};
  s.variants.push_back(v);
  const auto o = run_logger(s);
  CHECK(o.log_entries == 64);
  CHECK(o.log_overwrites == 600 - 64);
  CHECK(o.log_mismatches == 3);  // cycles 270, 280, 290 retained
  s.variants[0].trojan.reset();
  CHECK(run_logger(s).log_mismatches == 0);
}

TEST_CASE("scheme comparison ordering") {
  const auto c = compare_schemes(parse_scenario(kBase));
  REQUIRE(c.rows.size() == 3);
  CHECK(c.rows[0].scheme == Scheme::MRVO);
  CHECK_FALSE(c.rows[0].first_detection_cycle.has_value());
  CHECK(c.rows[1].first_detection_cycle.has_value());
  CHECK(c.rows[2].mismatches == 0);
  CHECK(c.rows[2].exposure == 0.0);
  CHECK(c.ordering_holds);
  const auto text = format_comparison(c);
  CHECK(text.find("mrvo") != std::string::npos);
  CHECK(text.find(" inf ") != std::string::npos);
  CHECK(text.find("ordering: holds") != std::string::npos);
}

TEST_CASE("disrupt Trojan: MRVO leaks corrupted words, MV none") {
  auto s = selection_bench(SelectionMode::Unbiased, false, 3);
  CHECK(run_scenario(s).mismatches > 0);
  s.scheme = Scheme::MV;
  CHECK(run_scenario(s).mismatches == 0);
}

TEST_CASE("comparison needs exactly one infected variant") {
  auto s = parse_scenario(kBase);
  s.variants[2].trojan.reset();
  CHECK_THROWS_AS(compare_schemes(s), ConfigError);
}
