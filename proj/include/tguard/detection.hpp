#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tguard/trojans.hpp"

namespace tguard {

/// Alarm thresholds shared by the CRC voter and the majority voter. A
/// counter equal to `warn` raises a warning; a counter strictly greater than
/// `replace` removes the IP.
struct Thresholds {
  std::uint32_t warn = 2;
  std::uint32_t replace = 5;

  /// Throws ConfigError unless 1 <= warn < replace.
  void validate() const;
};

enum class AlarmKind { None, Warn, Replace };

struct AlarmAction {
  AlarmKind kind = AlarmKind::None;
  IpId ip;
  std::uint32_t counter = 0;

  friend bool operator==(const AlarmAction&, const AlarmAction&) = default;
};

/// Per-physical-IP error counters.
///
/// Counters only grow on minority events and are dropped when the IP is
/// replaced. Replace is issued at most once per IP.
class ErrorCounters {
 public:
  explicit ErrorCounters(Thresholds thresholds);

  /// Registers one minority event for each listed IP and returns the
  /// resulting Warn / Replace actions (None entries are omitted).
  std::vector<AlarmAction> record_minority(std::span<const IpId> ips);
  /// Forgets the IP's counter after its removal.
  void reset(IpId ip);

  std::uint32_t count(IpId ip) const;
  const std::map<IpId, std::uint32_t>& counts() const { return counts_; }
  const Thresholds& thresholds() const { return thresholds_; }

 private:
  Thresholds thresholds_;
  std::map<IpId, std::uint32_t> counts_;
  std::set<IpId> replaced_;
};

enum class EventKind {
  CrcMinority,
  Dissent,
  Warn,
  Replace,
  Rotate,
  RotateSkipped,
  NoMajority,
  QueueEmpty,
};

std::string_view to_string(EventKind kind);

struct Event {
  std::uint64_t cycle = 0;
  EventKind kind = EventKind::NoMajority;
  std::optional<IpId> ip;
  std::uint32_t counter = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Detector event log; one text line per event: `cycle,EVENT,ip,counter`
/// with `-` when the event has no IP.
class EventLog {
 public:
  void append(Event e) { events_.push_back(e); }
  const std::vector<Event>& events() const { return events_; }
  std::size_t count(EventKind kind) const;
  std::optional<Event> first(EventKind kind) const;
  std::string to_text() const;

 private:
  std::vector<Event> events_;
};

std::string format_event(const Event& e);

}  // namespace tguard
