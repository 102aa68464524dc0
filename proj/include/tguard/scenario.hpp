#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tguard/crc_logger.hpp"
#include "tguard/detection.hpp"
#include "tguard/fabric.hpp"
#include "tguard/rng.hpp"
#include "tguard/sb_obfuscation.hpp"
#include "tguard/trojans.hpp"
#include "tguard/word.hpp"

namespace tguard {

enum class Scheme { SB, MRVO, MCRC, MV, LoggerOnly };
enum class SelectionMode { Unbiased, Biased };
enum class InputMode { Random, Counter };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);
std::string_view to_string(SelectionMode m);
SelectionMode selection_from_string(std::string_view name);

/// Output-line obfuscation. Under the SB scheme it guards the single IP's
/// channel; with any other scheme it wraps every slot's output lines.
struct SbConfig {
  bool enabled = false;
  std::size_t family_size = 2;
  std::uint64_t period = 0;  // 0: never rotate
};

struct Scenario {
  Scheme scheme = Scheme::MRVO;
  std::size_t width = 8;
  std::uint64_t cycles = 1000;
  std::size_t slots = 3;
  std::uint64_t seed = 1;
  PrCostModel cost = PrCostModel::from_full_program(PrCostModel::kDefaultFullProgramCycles);
  InputMode input = InputMode::Random;
  SelectionMode selection = SelectionMode::Unbiased;
  Thresholds thresholds;
  std::uint64_t rotation_period = 0;
  SbConfig sb;
  logger::LoggerConfig logger;
  /// Initial MRVO weights keyed by core id (an authority export).
  std::map<std::string, std::uint8_t> initial_weights;
  std::vector<IpVariant> variants;

  /// Enforces the scheme constraints; throws ConfigError naming the violated
  /// one (MV: odd slots >= 3; MCRC: slots >= 3; MRVO: slots >= 2; SB and
  /// logger: one slot).
  void validate() const;

  std::size_t infected_count() const;
  /// The first infected variant, if any.
  std::optional<IpId> first_infected() const;
};

/// Parses the JSON scenario schema documented in README.md. Relative
/// `initial_weights_file` paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text,
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// The selection bench: three 8-bit identity cores, variant 2 infected with
/// a single-bit disrupt Trojan that is always active or active on odd cycles.
Scenario selection_bench(SelectionMode mode, bool odd_cycles_only, std::uint64_t seed,
                            std::size_t ips = 3, std::uint64_t cycles = 1000);

/// Per-cycle input stimulus, independent of the scheme's own randomness.
class InputSource {
 public:
  InputSource(InputMode mode, std::size_t width, std::uint64_t seed);
  Word next();

 private:
  InputMode mode_;
  std::size_t width_;
  Rng rng_;
  std::uint64_t count_ = 0;
};

/// Per-slot obfuscation channels between the slots and the trusted
/// receiver. Transparent by construction; decode failures are counted.
class ObfuscationLayer {
 public:
  ObfuscationLayer(const SbConfig& config, std::size_t slots);
  void tick(std::uint64_t cycle);
  /// Encodes and decodes every output in place.
  void apply(std::vector<SlotOutput>& outputs);
  std::uint64_t decode_failures() const { return decode_failures_; }
  bool enabled() const { return enabled_; }

 private:
  bool enabled_;
  std::vector<sb::Channel> channels_;
  std::uint64_t decode_failures_ = 0;
};

/// Everything a scheme run measures. Rates are derived by the caller.
struct RunOutcome {
  Scheme scheme = Scheme::MRVO;
  std::uint64_t cycles = 0;
  std::size_t infected_variants = 0;
  std::optional<IpId> tracked_infected;

  std::uint64_t infected_selected = 0;   // emitted word taken from the infected IP
  std::uint64_t corrupted_emitted = 0;   // emitted word != golden word
  std::uint64_t no_output_cycles = 0;

  // Up to and including the cycle on which the tracked IP was replaced, or
  // the whole run if it never was.
  std::uint64_t pre_detection_cycles = 0;
  std::uint64_t pre_detection_infected_selected = 0;
  std::optional<std::uint64_t> detection_cycle;

  std::uint64_t voting_events = 0;
  std::uint64_t no_majority = 0;
  std::uint64_t degraded_votes = 0;
  std::uint64_t golden_disagreements = 0;  // majority CRC/word != golden
  std::uint64_t rotations = 0;
  std::vector<std::pair<std::uint64_t, std::size_t>> rotation_slots;  // (cycle, slot)
  std::uint64_t sb_decode_failures = 0;

  std::vector<std::string> suspected_vendors;
  std::map<IpId, std::uint32_t> final_counters;
  std::map<IpId, std::uint8_t> final_weights;
  EventLog events;

  // SB scheme.
  std::optional<bool> attacker_recovered_secret;
  // Logger scheme.
  std::uint64_t log_entries = 0;
  std::uint64_t log_overwrites = 0;
  std::uint64_t log_mismatches = 0;
};

namespace detail {

/// Marks one emitted cycle in `outcome`. `from_infected` says whether the
/// emitted word is the tracked infected IP's.
void account_emitted(RunOutcome& outcome, const std::optional<Word>& emitted,
                     const Word& golden, bool from_infected, bool detected);

/// Applies Warn / Replace actions: logs them, removes replaced IPs through
/// the fabric (queue head as successor, or an empty slot when the queue is
/// empty) and records the suspected vendor.
void apply_alarms(Fabric& fabric, ErrorCounters& counters,
                  std::span<const AlarmAction> actions, std::uint64_t cycle,
                  RunOutcome& outcome);

/// Runs one periodic-rotation check and logs it with the outgoing IP's
/// error counter (0 when `counters` is null).
void rotate_if_due(PeriodicRotation& rotation, Fabric& fabric, std::uint64_t cycle,
                   const ErrorCounters* counters, RunOutcome& outcome);

Fabric make_fabric(const Scenario& s);

}  // namespace detail

}  // namespace tguard
