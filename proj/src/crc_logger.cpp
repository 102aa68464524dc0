#include "tguard/crc_logger.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "tguard/error.hpp"

namespace tguard::logger {

void LoggerConfig::validate() const {
  if (capacity < 1) throw ConfigError("logger capacity must be >= 1");
  if (const auto* duty = std::get_if<RandomDuty>(&mode)) {
    if (!(duty->probability >= 0.0 && duty->probability <= 1.0)) {
      throw ConfigError("logger duty probability must be in [0, 1]");
    }
  }
  if (const auto* w = std::get_if<Windows>(&mode)) {
    for (const auto& r : w->ranges) {
      if (r.first > r.last) throw ConfigError("logger window has first > last");
    }
  }
}

void check_loggable_width(std::size_t width) {
  if (width == 0 || (width % 8 != 0 && 8 % width != 0)) {
    throw ConfigError("CRC blocks need width to be a multiple or a divisor of 8, got " +
                      std::to_string(width));
  }
}

CrcLogger::CrcLogger(std::size_t width, LoggerConfig config, std::uint64_t seed)
    : width_(width), config_(std::move(config)), rng_(seed, streams::kLogger) {
  check_loggable_width(width);
  config_.validate();
}

bool CrcLogger::enabled(std::uint64_t cycle) {
  struct Visitor {
    std::uint64_t cycle;
    Rng& rng;
    bool operator()(const AlwaysOn&) const { return true; }
    bool operator()(const Windows& w) const {
      for (const auto& r : w.ranges) {
        if (cycle >= r.first && cycle <= r.last) return true;
      }
      return false;
    }
    bool operator()(const RandomDuty& d) const { return rng.bernoulli(d.probability); }
  };
  return std::visit(Visitor{cycle, rng_}, config_.mode);
}

void CrcLogger::store(LogEntry e) {
  if (ring_.size() == config_.capacity) {
    ring_.pop_front();
    ++overwrites_;
  }
  ring_.push_back(e);
}

void CrcLogger::log_cycle(std::uint64_t cycle, const Word& input, const Word& output) {
  if (input.width() != width_ || output.width() != width_) {
    throw ConfigError("logger width mismatch");
  }
  const bool on = enabled(cycle);

  if (width_ % 8 == 0) {
    if (!on) return;
    const std::size_t blocks = width_ / 8;
    for (std::size_t b = 0; b < blocks; ++b) {
      store({cycle, Direction::Input, crc5(input.byte(b))});
    }
    for (std::size_t b = 0; b < blocks; ++b) {
      store({cycle, Direction::Output, crc5(output.byte(b))});
    }
    return;
  }

  const std::uint64_t cycles_per_block = 8 / width_;
  const auto slot = static_cast<unsigned>(cycle % cycles_per_block);
  if (slot == 0) {
    in_acc_ = 0;
    out_acc_ = 0;
    block_ok_ = true;
  }
  if (!on) block_ok_ = false;
  const auto shift = static_cast<unsigned>(slot * width_);
  in_acc_ |= static_cast<std::uint8_t>(input.byte(0) << shift);
  out_acc_ |= static_cast<std::uint8_t>(output.byte(0) << shift);
  if (slot + 1 == cycles_per_block && block_ok_) {
    store({cycle, Direction::Input, crc5(in_acc_)});
    store({cycle, Direction::Output, crc5(out_acc_)});
  }
}

namespace {

// CRCs of the blocks of `trace` (or of the golden outputs) completing at
// each cycle.
std::vector<std::vector<CrcValue>> blocks_by_cycle(std::span<const Word> words) {
  std::vector<std::vector<CrcValue>> out(words.size());
  CrcStream stream;
  for (std::size_t c = 0; c < words.size(); ++c) out[c] = stream.push(words[c]);
  return out;
}

}  // namespace

std::vector<Mismatch> extract_and_compare(std::span<const LogEntry> entries,
                                          GoldenKind golden,
                                          std::span<const Word> input_trace) {
  std::vector<Mismatch> report;
  if (entries.empty()) return report;
  if (input_trace.empty()) {
    throw AlignmentError(entries.front().cycle, "empty input trace");
  }
  const std::size_t width = input_trace.front().width();
  check_loggable_width(width);

  GoldenModel model(golden, width);
  std::vector<Word> golden_out;
  golden_out.reserve(input_trace.size());
  for (const auto& in : input_trace) golden_out.push_back(model.eval(in));

  const auto in_blocks = blocks_by_cycle(input_trace);
  const auto out_blocks = blocks_by_cycle(golden_out);

  // Entries of one (cycle, direction) group are consecutive blocks of that
  // cycle. Only the oldest retained group can have lost its leading blocks to
  // ring overwrites, so it is aligned from its end.
  std::size_t i = 0;
  bool first_group = true;
  while (i < entries.size()) {
    const auto cycle = entries[i].cycle;
    const auto dir = entries[i].direction;
    std::size_t j = i;
    while (j < entries.size() && entries[j].cycle == cycle && entries[j].direction == dir) ++j;
    const std::size_t group = j - i;

    if (cycle >= input_trace.size()) {
      throw AlignmentError(cycle, "log entry at cycle " + std::to_string(cycle) +
                                      " lies beyond the input trace");
    }
    const auto& expected = (dir == Direction::Input ? in_blocks : out_blocks)[cycle];
    if (group > expected.size() || (!first_group && group != expected.size())) {
      throw AlignmentError(cycle, "log and trace disagree on block count at cycle " +
                                      std::to_string(cycle));
    }
    const std::size_t offset = expected.size() - group;
    for (std::size_t k = 0; k < group; ++k) {
      if (entries[i + k].crc == expected[offset + k]) continue;
      if (dir == Direction::Input) {
        throw AlignmentError(cycle, "logged input CRC diverges from the trace at cycle " +
                                        std::to_string(cycle));
      }
      report.push_back({cycle, Direction::Output});
      break;
    }
    first_group = false;
    i = j;
  }
  return report;
}

void export_log(std::ostream& os, std::span<const LogEntry> entries) {
  for (const auto& e : entries) {
    os << e.cycle << ',' << (e.direction == Direction::Input ? "in" : "out") << ','
       << e.crc.to_hex() << '\n';
  }
}

std::vector<LogEntry> import_log(std::istream& is) {
  std::vector<LogEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cycle, dir, crc;
    if (!std::getline(ls, cycle, ',') || !std::getline(ls, dir, ',') ||
        !std::getline(ls, crc)) {
      throw ConfigError("malformed log line " + std::to_string(lineno));
    }
    LogEntry e;
    try {
      e.cycle = std::stoull(cycle);
      e.crc = CrcValue(static_cast<unsigned>(std::stoul(crc, nullptr, 16)));
    } catch (const std::logic_error&) {
      throw ConfigError("malformed log line " + std::to_string(lineno));
    }
    if (dir == "in") {
      e.direction = Direction::Input;
    } else if (dir == "out") {
      e.direction = Direction::Output;
    } else {
      throw ConfigError("bad direction on log line " + std::to_string(lineno));
    }
    entries.push_back(e);
  }
  return entries;
}

}  // namespace tguard::logger
