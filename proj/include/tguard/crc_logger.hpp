#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tguard/crc5.hpp"
#include "tguard/rng.hpp"
#include "tguard/trojans.hpp"
#include "tguard/word.hpp"

namespace tguard::logger {

enum class Direction { Input, Output };

struct LogEntry {
  std::uint64_t cycle = 0;
  Direction direction = Direction::Input;
  CrcValue crc;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct AlwaysOn {};
/// Inclusive cycle range.
struct CycleWindow {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};
struct Windows {
  std::vector<CycleWindow> ranges;
};
struct RandomDuty {
  double probability = 1.0;
};
using EnableMode = std::variant<AlwaysOn, Windows, RandomDuty>;

struct LoggerConfig {
  std::size_t capacity = 1024;
  EnableMode mode = AlwaysOn{};

  /// Throws ConfigError unless capacity >= 1 and 0 <= p <= 1.
  void validate() const;
};

/// First-party CRC logger attached to one third-party IP.
///
/// Supports widths that are a multiple of 8 (W/8 blocks per cycle) or a
/// divisor of 8 (one block per 8/W cycles, aligned to cycle 0). A block is
/// stored only if every cycle it covers was enabled. Storage is a ring that
/// overwrites the oldest entry when full.
class CrcLogger {
 public:
  /// `seed` drives RandomDuty enablement.
  CrcLogger(std::size_t width, LoggerConfig config, std::uint64_t seed);

  /// Records one cycle of the IP's input and output.
  void log_cycle(std::uint64_t cycle, const Word& input, const Word& output);

  std::vector<LogEntry> entries() const { return {ring_.begin(), ring_.end()}; }
  std::uint64_t overwrites() const { return overwrites_; }
  std::size_t width() const { return width_; }
  const LoggerConfig& config() const { return config_; }

 private:
  bool enabled(std::uint64_t cycle);
  void store(LogEntry e);

  std::size_t width_;
  LoggerConfig config_;
  Rng rng_;
  std::deque<LogEntry> ring_;
  std::uint64_t overwrites_ = 0;
  // Sub-byte widths: partial blocks and whether all their cycles were enabled.
  std::uint8_t in_acc_ = 0;
  std::uint8_t out_acc_ = 0;
  bool block_ok_ = true;
};

/// Throws ConfigError unless width % 8 == 0 or 8 % width == 0.
void check_loggable_width(std::size_t width);

struct Mismatch {
  std::uint64_t cycle = 0;
  Direction direction = Direction::Output;

  friend bool operator==(const Mismatch&, const Mismatch&) = default;
};

/// Offline check of a retained log against the golden model.
///
/// Replays `input_trace` (cycle 0 onward) through a fresh golden model,
/// recomputes the CRC of every logged block and reports each output entry
/// whose CRC differs. Logged input CRCs must match the trace exactly;
/// otherwise AlignmentError names the first divergent cycle.
std::vector<Mismatch> extract_and_compare(std::span<const LogEntry> entries,
                                          GoldenKind golden,
                                          std::span<const Word> input_trace);

/// `cycle,direction,crc-hex` per line; direction is `in` or `out`.
void export_log(std::ostream& os, std::span<const LogEntry> entries);
std::vector<LogEntry> import_log(std::istream& is);

}  // namespace tguard::logger
