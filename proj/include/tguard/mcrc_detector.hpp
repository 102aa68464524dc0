#pragma once

#include <span>
#include <vector>

#include "tguard/crc5.hpp"
#include "tguard/detection.hpp"
#include "tguard/scenario.hpp"

namespace tguard::mcrc {

struct CrcVote {
  IpId ip;
  CrcValue crc;
};

enum class VerdictKind {
  Majority,    // major_crc held by a strict majority
  NoMajority,  // no value reaches a strict majority; counters untouched
  Degraded,    // fewer than three live CRCs; no vote
};

struct DetectorVerdict {
  VerdictKind kind = VerdictKind::Degraded;
  CrcValue major_crc;
  std::vector<IpId> minority_ips;
};

/// CRC voting circuit: strict-majority CRC over at least three live IPs.
DetectorVerdict vote_crc(std::span<const CrcVote> crcs);

/// Feeds a verdict's minority IPs to the shared error counters.
std::vector<AlarmAction> on_verdict(ErrorCounters& counters, const DetectorVerdict& verdict);

struct LeakWindow {
  double fraction = 0.0;
  /// Set when the tracked infected IP was never replaced (window = whole run).
  bool undetected = false;
};

/// Share of pre-detection cycles on which the infected IP's word reached the
/// output.
LeakWindow measure_leak_window(const RunOutcome& outcome);

/// Output multiplexing plus per-block CRC voting, error counters,
/// threshold-triggered replacement and periodic rotation. Widths that are a
/// multiple of 8 vote once per 8-bit block each cycle; widths dividing 8 vote
/// once per 8/W cycles on blocks accumulated per slot.
RunOutcome run_mcrc(const Scenario& s);

}  // namespace tguard::mcrc
