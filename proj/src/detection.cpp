#include "tguard/detection.hpp"

#include <algorithm>

#include "tguard/error.hpp"

namespace tguard {

void Thresholds::validate() const {
  if (warn < 1 || warn >= replace) {
    throw ConfigError("thresholds need 1 <= warn_threshold < threshold (got warn=" +
                      std::to_string(warn) + ", threshold=" + std::to_string(replace) +
                      ")");
  }
}

ErrorCounters::ErrorCounters(Thresholds thresholds) : thresholds_(thresholds) {
  thresholds_.validate();
}

std::vector<AlarmAction> ErrorCounters::record_minority(std::span<const IpId> ips) {
  std::vector<AlarmAction> actions;
  for (const IpId ip : ips) {
    if (replaced_.contains(ip)) continue;
    const std::uint32_t c = ++counts_[ip];
    if (c > thresholds_.replace) {
      replaced_.insert(ip);
      actions.push_back({AlarmKind::Replace, ip, c});
    } else if (c == thresholds_.warn) {
      actions.push_back({AlarmKind::Warn, ip, c});
    }
  }
  return actions;
}

void ErrorCounters::reset(IpId ip) { counts_.erase(ip); }

std::uint32_t ErrorCounters::count(IpId ip) const {
  const auto it = counts_.find(ip);
  return it == counts_.end() ? 0 : it->second;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::CrcMinority:
      return "CRC_MINORITY";
    case EventKind::Dissent:
      return "DISSENT";
    case EventKind::Warn:
      return "WARN";
    case EventKind::Replace:
      return "REPLACE";
    case EventKind::Rotate:
      return "ROTATE";
    case EventKind::RotateSkipped:
      return "ROTATE_SKIPPED";
    case EventKind::NoMajority:
      return "NO_MAJORITY";
    case EventKind::QueueEmpty:
      return "QUEUE_EMPTY";
  }
  return "?";
}

std::size_t EventLog::count(EventKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      events_.begin(), events_.end(), [kind](const Event& e) { return e.kind == kind; }));
}

std::optional<Event> EventLog::first(EventKind kind) const {
  for (const auto& e : events_) {
    if (e.kind == kind) return e;
  }
  return std::nullopt;
}

std::string format_event(const Event& e) {
  std::string line = std::to_string(e.cycle);
  line += ',';
  line += to_string(e.kind);
  line += ',';
  line += e.ip ? std::to_string(e.ip->value) : std::string("-");
  line += ',';
  line += std::to_string(e.counter);
  return line;
}

std::string EventLog::to_text() const {
  std::string out;
  for (const auto& e : events_) {
    out += format_event(e);
    out += '\n';
  }
  return out;
}

}  // namespace tguard
