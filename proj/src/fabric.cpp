#include "tguard/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "tguard/error.hpp"

namespace tguard {

PrCostModel PrCostModel::from_full_program(std::uint64_t full_program_cycles) {
  if (full_program_cycles == 0) {
    throw ConfigError("full_program_cycles must be positive");
  }
  const auto swap = static_cast<std::uint64_t>(
      std::llround(kSwapRatio * static_cast<double>(full_program_cycles)));
  return PrCostModel{std::max<std::uint64_t>(1, swap), full_program_cycles};
}

namespace {

GoldenKind common_function(const std::vector<IpVariant>& variants) {
  if (variants.empty()) throw ConfigError("fabric needs at least one variant");
  const GoldenKind kind = variants.front().function;
  for (const auto& v : variants) {
    if (v.function != kind) {
      throw ConfigError("all variants must implement the same function");
    }
  }
  return kind;
}

}  // namespace

Fabric::Fabric(std::size_t width, std::size_t slot_count, PrCostModel cost,
               std::vector<IpVariant> variants)
    : width_(width),
      cost_(cost),
      reference_(common_function(variants), width),
      golden_output_(width) {
  if (slot_count == 0) throw ConfigError("fabric needs at least one slot");
  if (variants.size() < slot_count) {
    throw ConfigError("need at least " + std::to_string(slot_count) +
                      " variants to fill the slots, got " +
                      std::to_string(variants.size()));
  }
  if (cost_.swap_cycles == 0) throw ConfigError("swap_cycles must be positive");

  std::set<IpId> seen;
  for (auto& v : variants) {
    if (!seen.insert(v.id).second) {
      throw ConfigError("duplicate ip id " + std::to_string(v.id.value));
    }
    const IpId id = v.id;
    if (slots_.size() < slot_count) {
      slots_.emplace_back(SlotProgrammed{id});
    } else {
      queue_.push_back(id);
    }
    instances_.emplace(id, VariantInstance(std::move(v), width));
  }
}

std::vector<SlotOutput> Fabric::step(const Word& input) {
  if (input.width() != width_) {
    throw ConfigError("input width " + std::to_string(input.width()) +
                      " does not match scenario width " + std::to_string(width_));
  }
  std::vector<SlotOutput> out;
  out.reserve(slots_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    auto& state = slots_[s];
    if (const auto* p = std::get_if<SlotProgrammed>(&state)) {
      out.push_back({s, p->ip, instance(p->ip).evaluate(input, cycle_)});
    }
  }
  golden_output_ = reference_.eval(input);

  // Swap countdown after evaluation so an incoming IP starts from the
  // reference state as it stands after this cycle.
  for (auto& state : slots_) {
    if (auto* sw = std::get_if<SlotSwapping>(&state)) {
      if (--sw->remaining_cycles == 0) {
        const IpId ip = sw->incoming;
        instance(ip).golden().sync_state_from(reference_);
        state = SlotProgrammed{ip};
      }
    }
  }
  ++cycle_;
  return out;
}

bool Fabric::fired_last(IpId ip) const { return instances_.at(ip).fired_last(); }

void Fabric::begin_swap(std::size_t slot, Outgoing outgoing) {
  auto& state = slots_.at(slot);
  if (std::holds_alternative<SlotSwapping>(state)) {
    throw SwapError("swap in progress on slot " + std::to_string(slot));
  }
  if (queue_.empty()) {
    throw SwapError("no queued IP to program into slot " + std::to_string(slot));
  }
  if (const auto* p = std::get_if<SlotProgrammed>(&state)) {
    if (outgoing == Outgoing::Requeue) {
      queue_.push_back(p->ip);
    } else {
      discarded_.push_back(p->ip);
    }
  }
  const IpId incoming = queue_.front();
  queue_.pop_front();
  state = SlotSwapping{incoming, cost_.swap_cycles};
}

void Fabric::evict(std::size_t slot) {
  auto& state = slots_.at(slot);
  if (std::holds_alternative<SlotSwapping>(state)) {
    throw SwapError("swap in progress on slot " + std::to_string(slot));
  }
  if (const auto* p = std::get_if<SlotProgrammed>(&state)) {
    discarded_.push_back(p->ip);
  }
  state = SlotEmpty{};
}

std::optional<IpId> Fabric::programmed_ip(std::size_t index) const {
  if (const auto* p = std::get_if<SlotProgrammed>(&slots_.at(index))) return p->ip;
  return std::nullopt;
}

const IpVariant& Fabric::variant(IpId ip) const {
  return instances_.at(ip).variant();
}

VariantInstance& Fabric::instance(IpId ip) { return instances_.at(ip); }

RotationResult PeriodicRotation::tick(Fabric& fabric, std::uint64_t cycle) {
  RotationResult r;
  if (period_ == 0 || cycle == 0 || cycle % period_ != 0) return r;
  r.slot = next_slot_;
  if (fabric.queue().empty()) {
    r.outcome = RotationOutcome::SkippedEmptyQueue;
    return r;
  }
  if (fabric.is_swapping(next_slot_)) {
    r.outcome = RotationOutcome::DeferredSwapInProgress;
    return r;
  }
  r.outgoing = fabric.programmed_ip(next_slot_);
  r.incoming = fabric.queue().front();
  fabric.begin_swap(next_slot_, Outgoing::Requeue);
  r.outcome = RotationOutcome::Rotated;
  next_slot_ = (next_slot_ + 1) % fabric.slot_count();
  return r;
}

}  // namespace tguard
