#include "tguard/mcrc_detector.hpp"

#include <array>

#include "tguard/mrvo_selection.hpp"

namespace tguard::mcrc {

DetectorVerdict vote_crc(std::span<const CrcVote> crcs) {
  DetectorVerdict v;
  if (crcs.size() < 3) return v;

  std::array<std::size_t, 32> tally{};
  for (const auto& c : crcs) ++tally[c.crc.value()];
  for (unsigned value = 0; value < tally.size(); ++value) {
    if (2 * tally[value] <= crcs.size()) continue;
    v.kind = VerdictKind::Majority;
    v.major_crc = CrcValue(value);
    for (const auto& c : crcs) {
      if (c.crc != v.major_crc) v.minority_ips.push_back(c.ip);
    }
    return v;
  }
  v.kind = VerdictKind::NoMajority;
  return v;
}

std::vector<AlarmAction> on_verdict(ErrorCounters& counters, const DetectorVerdict& verdict) {
  if (verdict.kind != VerdictKind::Majority) return {};
  return counters.record_minority(verdict.minority_ips);
}

LeakWindow measure_leak_window(const RunOutcome& o) {
  LeakWindow w;
  w.undetected = !o.detection_cycle.has_value();
  if (o.pre_detection_cycles > 0) {
    w.fraction = static_cast<double>(o.pre_detection_infected_selected) /
                 static_cast<double>(o.pre_detection_cycles);
  }
  return w;
}

namespace {

// Sub-byte widths: one partial block per slot, valid only if the same IP
// was live on every cycle of the block.
struct SlotBlock {
  std::optional<IpId> ip;
  std::uint8_t acc = 0;
  bool ok = false;
};

class Voter {
 public:
  Voter(const Scenario& s, Fabric& fabric, RunOutcome& o)
      : fabric_(fabric), o_(o), counters_(s.thresholds), width_(s.width),
        blocks_(s.slots) {}

  void on_cycle(std::uint64_t cycle, std::span<const SlotOutput> outputs, const Word& golden) {
    std::vector<AlarmAction> actions;
    if (width_ % 8 == 0) {
      std::vector<CrcVote> votes(outputs.size());
      for (std::size_t b = 0; b < width_ / 8; ++b) {
        for (std::size_t i = 0; i < outputs.size(); ++i) {
          votes[i] = {outputs[i].ip, crc5(outputs[i].word.byte(b))};
        }
        vote(cycle, votes, crc5(golden.byte(b)), actions);
      }
    } else {
      accumulate(cycle, outputs, golden, actions);
    }
    detail::apply_alarms(fabric_, counters_, actions, cycle, o_);
  }

  const ErrorCounters& counters() const { return counters_; }

 private:
  void accumulate(std::uint64_t cycle, std::span<const SlotOutput> outputs, const Word& golden,
                  std::vector<AlarmAction>& actions) {
    const std::uint64_t per_block = 8 / width_;
    const auto pos = static_cast<unsigned>(cycle % per_block);
    if (pos == 0) {
      for (std::size_t s = 0; s < blocks_.size(); ++s) {
        blocks_[s] = {fabric_.programmed_ip(s), 0, true};
      }
      golden_acc_ = 0;
    }
    std::vector<bool> live(blocks_.size(), false);
    for (const auto& out : outputs) {
      auto& blk = blocks_[out.slot];
      live[out.slot] = true;
      if (blk.ip != out.ip) blk.ok = false;
      blk.acc |= static_cast<std::uint8_t>(out.word.byte(0) << (pos * width_));
    }
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      if (!live[s]) blocks_[s].ok = false;
    }
    golden_acc_ |= static_cast<std::uint8_t>(golden.byte(0) << (pos * width_));
    if (pos + 1 != per_block) return;

    std::vector<CrcVote> votes;
    for (const auto& blk : blocks_) {
      if (blk.ok && blk.ip) votes.push_back({*blk.ip, crc5(blk.acc)});
    }
    vote(cycle, votes, crc5(golden_acc_), actions);
  }

  void vote(std::uint64_t cycle, std::span<const CrcVote> votes, CrcValue golden_crc,
            std::vector<AlarmAction>& actions) {
    const auto verdict = vote_crc(votes);
    switch (verdict.kind) {
      case VerdictKind::Degraded:
        ++o_.degraded_votes;
        return;
      case VerdictKind::NoMajority:
        ++o_.voting_events;
        ++o_.no_majority;
        o_.events.append({cycle, EventKind::NoMajority, std::nullopt, 0});
        return;
      case VerdictKind::Majority:
        break;
    }
    ++o_.voting_events;
    if (verdict.major_crc != golden_crc) ++o_.golden_disagreements;
    auto fresh = on_verdict(counters_, verdict);
    for (const IpId ip : verdict.minority_ips) {
      o_.events.append({cycle, EventKind::CrcMinority, ip, counters_.count(ip)});
    }
    actions.insert(actions.end(), fresh.begin(), fresh.end());
  }

  Fabric& fabric_;
  RunOutcome& o_;
  ErrorCounters counters_;
  std::size_t width_;
  std::vector<SlotBlock> blocks_;
  std::uint8_t golden_acc_ = 0;
};

}  // namespace

RunOutcome run_mcrc(const Scenario& s) {
  s.validate();
  RunOutcome o;
  o.scheme = Scheme::MCRC;
  o.cycles = s.cycles;
  o.infected_variants = s.infected_count();
  o.tracked_infected = s.first_infected();

  Fabric fabric = detail::make_fabric(s);
  InputSource inputs(s.input, s.width, s.seed);
  Rng rng(s.seed, streams::kSelection);
  ObfuscationLayer sb(s.sb, s.slots);
  PeriodicRotation rotation(s.rotation_period);
  mrvo::WeightTable weights = mrvo::initial_weights(s);
  Voter voter(s, fabric, o);

  for (std::uint64_t c = 0; c < s.cycles; ++c) {
    detail::rotate_if_due(rotation, fabric, c, &voter.counters(), o);
    sb.tick(c);
    auto outputs = fabric.step(inputs.next());
    sb.apply(outputs);

    const auto chosen = mrvo::select_output(outputs, s.selection, weights, rng);
    std::optional<Word> emitted;
    bool from_infected = false;
    if (chosen) {
      emitted = chosen->word;
      from_infected = o.tracked_infected && chosen->ip == *o.tracked_infected;
    }
    detail::account_emitted(o, emitted, fabric.golden_output(), from_infected,
                            o.detection_cycle.has_value());
    mrvo::update_weights(weights, outputs);
    voter.on_cycle(c, outputs, fabric.golden_output());
  }

  for (const auto& [ip, n] : voter.counters().counts()) o.final_counters[ip] = n;
  for (const auto& v : s.variants) o.final_weights[v.id] = weights.weight(v.id);
  o.sb_decode_failures = sb.decode_failures();
  return o;
}

}  // namespace tguard::mcrc
