#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tguard/detection.hpp"
#include "tguard/fabric.hpp"
#include "tguard/scenario.hpp"

namespace tguard::mv {

struct MajorityVerdict {
  bool has_majority = false;
  Word output;
  std::vector<IpId> dissenters;
  bool unanimous = false;
};

/// Word-level majority over the live outputs. Three or more: the word held
/// by a strict majority, or no majority. Two: agreement check. Fewer than
/// two: no majority.
MajorityVerdict majority_vote(std::span<const SlotOutput> outputs);

/// Same counter contract as the CRC voter; a verdict without majority
/// changes nothing.
std::vector<AlarmAction> on_dissent(ErrorCounters& counters, const MajorityVerdict& verdict);

/// Multiple-variant execution: emits the majority word every cycle, counts
/// dissents per IP and replaces IPs whose counter exceeds the threshold.
RunOutcome run_mv(const Scenario& s);

}  // namespace tguard::mv
