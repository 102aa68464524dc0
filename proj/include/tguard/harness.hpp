#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tguard/scenario.hpp"

namespace tguard {

/// Qualitative protection score (0 none .. 3 strong) of each scheme against
/// one attack class, echoed verbatim in every report.
struct ProtectionScore {
  std::string_view attack;
  int sb, mrvo, mcrc, mv;
};

inline constexpr std::array<ProtectionScore, 5> kProtectionScores{{
    {"externally_triggered", 3, 1, 2, 3},
    {"internally_triggered", 3, 1, 2, 3},
    {"leaking_information", 3, 1, 2, 3},
    {"disturbing_functionality", 0, 1, 2, 3},
    {"power_timing_side_channel", 0, 3, 3, 3},
}};
/// Sum of a scheme's column scaled to 3.
double overall_protection(Scheme s);

struct RunReport {
  Scheme scheme = Scheme::MRVO;
  std::size_t width = 0;
  std::uint64_t cycles = 0;
  std::size_t slots = 0;
  std::uint64_t seed = 0;
  SelectionMode selection = SelectionMode::Unbiased;

  double infected_ip_rate = 0.0;
  double infected_output_rate = 0.0;
  double leak_window = 0.0;
  bool leak_window_flagged = false;  // never detected: window is the whole run
  double exposure = 0.0;             // infected-selected cycles / all cycles
  std::optional<std::uint64_t> first_detection_cycle;
  std::uint64_t mismatches = 0;  // emitted != golden

  RunOutcome outcome;
};

/// Runs one scenario with the scheme it names. Deterministic in the seed.
RunReport run_scenario(const Scenario& s);

/// Fixed `key: value` lines; rates with four decimals.
std::string format_report(const RunReport& r);

/// Single-IP obfuscated channel. The Trojan sits before the obfuscator; the
/// attacker sees encoded words on the cycles its Trojan fired and tries to
/// undo its own PRNG.
RunOutcome run_sb(const Scenario& s);
/// Single IP with a first-party CRC logger; the retained log is checked
/// offline against the golden model at the end of the run.
RunOutcome run_logger(const Scenario& s);

struct ComparisonRow {
  Scheme scheme = Scheme::MRVO;
  double leak_window = 0.0;
  double exposure = 0.0;
  std::optional<std::uint64_t> first_detection_cycle;
  std::uint64_t mismatches = 0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // MRVO, MCRC, MV
  /// exposure(MV) == 0 <= exposure(MCRC) < exposure(MRVO).
  bool ordering_holds = false;
};

/// Runs the base scenario under MRVO, MCRC and MV. The base needs an odd
/// slot count of at least three and one infected variant.
Comparison compare_schemes(const Scenario& base);
std::string format_comparison(const Comparison& c);

}  // namespace tguard
