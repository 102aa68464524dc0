#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "tguard/trojans.hpp"
#include "tguard/word.hpp"

namespace tguard {

/// Partial-reconfiguration timing in abstract cycles.
struct PrCostModel {
  /// One region swap costs this fraction of a full-device program
  /// (450 ms against 5.5 s on the reference board).
  static constexpr double kSwapRatio = 0.08;
  static constexpr std::uint64_t kDefaultFullProgramCycles = 100;

  std::uint64_t swap_cycles = 8;
  std::uint64_t full_program_cycles = kDefaultFullProgramCycles;

  /// swap_cycles = round(kSwapRatio * full), at least 1.
  static PrCostModel from_full_program(std::uint64_t full_program_cycles);
  double ratio() const {
    return static_cast<double>(swap_cycles) / static_cast<double>(full_program_cycles);
  }
};

struct SlotEmpty {};
struct SlotProgrammed {
  IpId ip;
};
struct SlotSwapping {
  IpId incoming;
  std::uint64_t remaining_cycles;
};
using SlotState = std::variant<SlotEmpty, SlotProgrammed, SlotSwapping>;

/// What happens to the IP leaving a slot.
enum class Outgoing {
  Requeue,  // periodic rotation: back to the queue tail
  Discard,  // infection removal: never comes back
};

/// One live slot's output on one cycle.
struct SlotOutput {
  std::size_t slot;
  IpId ip;
  Word word;
};

/// The reconfigurable fabric: a row of PR slots, a waiting queue of
/// variants, and the trusted static region's lockstep golden model.
///
/// All variants in one fabric implement the same function at the same
/// width. The first `slot_count` variants start programmed; the rest wait in
/// the queue in declaration order.
class Fabric {
 public:
  Fabric(std::size_t width, std::size_t slot_count, PrCostModel cost,
         std::vector<IpVariant> variants);

  /// Advances one cycle. Every programmed slot yields one word; swapping
  /// slots count down and yield nothing. Returns live outputs in slot order.
  /// Throws ConfigError on an input width mismatch.
  std::vector<SlotOutput> step(const Word& input);

  /// Output of the trusted golden copy on the last step.
  const Word& golden_output() const { return golden_output_; }
  /// Whether `ip`'s Trojan fired on the last step it was evaluated.
  bool fired_last(IpId ip) const;

  /// Starts reprogramming `slot` with the queue head. The slot must not be
  /// swapping and the queue must not be empty (SwapError otherwise).
  void begin_swap(std::size_t slot, Outgoing outgoing);
  /// Removes the slot's IP for good without a successor; the slot goes Empty.
  void evict(std::size_t slot);

  std::uint64_t cycle() const { return cycle_; }
  std::size_t width() const { return width_; }
  std::size_t slot_count() const { return slots_.size(); }
  const SlotState& slot(std::size_t index) const { return slots_.at(index); }
  std::optional<IpId> programmed_ip(std::size_t index) const;
  bool is_swapping(std::size_t index) const {
    return std::holds_alternative<SlotSwapping>(slots_.at(index));
  }
  const std::deque<IpId>& queue() const { return queue_; }
  const std::vector<IpId>& discarded() const { return discarded_; }
  const PrCostModel& cost_model() const { return cost_; }
  const IpVariant& variant(IpId ip) const;
  std::size_t variant_count() const { return instances_.size(); }

 private:
  VariantInstance& instance(IpId ip);

  std::size_t width_;
  PrCostModel cost_;
  std::vector<SlotState> slots_;
  std::deque<IpId> queue_;
  std::vector<IpId> discarded_;
  std::map<IpId, VariantInstance> instances_;
  GoldenModel reference_;
  Word golden_output_;
  std::uint64_t cycle_ = 0;
};

/// Outcome of one periodic-rotation check.
enum class RotationOutcome {
  NotDue,
  Rotated,
  SkippedEmptyQueue,
  DeferredSwapInProgress,
};

struct RotationResult {
  RotationOutcome outcome = RotationOutcome::NotDue;
  std::size_t slot = 0;
  std::optional<IpId> outgoing;
  std::optional<IpId> incoming;
};

/// Round-robin periodic replacement: at every positive multiple of the
/// period, slot i is swapped with the queue head and i advances modulo the
/// slot count. A skipped or deferred rotation leaves i unchanged.
class PeriodicRotation {
 public:
  explicit PeriodicRotation(std::uint64_t period) : period_(period) {}

  /// Checks `cycle` (the cycle about to run) and swaps if due.
  RotationResult tick(Fabric& fabric, std::uint64_t cycle);

  std::size_t next_slot() const { return next_slot_; }
  std::uint64_t period() const { return period_; }

 private:
  std::uint64_t period_;
  std::size_t next_slot_ = 0;
};

}  // namespace tguard
