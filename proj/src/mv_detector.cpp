#include "tguard/mv_detector.hpp"

namespace tguard::mv {

MajorityVerdict majority_vote(std::span<const SlotOutput> outputs) {
  MajorityVerdict v;
  if (outputs.size() < 2) return v;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::size_t n = 0;
    for (const auto& o : outputs) n += o.word == outputs[i].word ? 1 : 0;
    if (2 * n <= outputs.size()) continue;
    v.has_majority = true;
    v.output = outputs[i].word;
    for (const auto& o : outputs) {
      if (o.word != v.output) v.dissenters.push_back(o.ip);
    }
    v.unanimous = v.dissenters.empty();
    return v;
  }
  return v;
}

std::vector<AlarmAction> on_dissent(ErrorCounters& counters, const MajorityVerdict& verdict) {
  if (!verdict.has_majority) return {};
  return counters.record_minority(verdict.dissenters);
}

RunOutcome run_mv(const Scenario& s) {
  s.validate();
  RunOutcome o;
  o.scheme = Scheme::MV;
  o.cycles = s.cycles;
  o.infected_variants = s.infected_count();
  o.tracked_infected = s.first_infected();

  Fabric fabric = detail::make_fabric(s);
  InputSource inputs(s.input, s.width, s.seed);
  ObfuscationLayer sb(s.sb, s.slots);
  ErrorCounters counters(s.thresholds);

  for (std::uint64_t c = 0; c < s.cycles; ++c) {
    sb.tick(c);
    auto outputs = fabric.step(inputs.next());
    sb.apply(outputs);
    const Word& golden = fabric.golden_output();

    const auto verdict = majority_vote(outputs);
    std::optional<Word> emitted;
    bool from_infected = false;
    if (verdict.has_majority) {
      emitted = verdict.output;
      ++o.voting_events;
      if (verdict.output != golden) ++o.golden_disagreements;
      for (const auto& out : outputs) {
        if (o.tracked_infected && out.ip == *o.tracked_infected) {
          from_infected = out.word == verdict.output && out.word != golden;
        }
      }
    } else if (outputs.size() < 2) {
      ++o.degraded_votes;
      ++o.no_majority;
      o.events.append({c, EventKind::NoMajority, std::nullopt, 0});
    } else {
      ++o.voting_events;
      ++o.no_majority;
      o.events.append({c, EventKind::NoMajority, std::nullopt, 0});
    }
    detail::account_emitted(o, emitted, golden, from_infected, o.detection_cycle.has_value());

    const auto actions = on_dissent(counters, verdict);
    for (const IpId ip : verdict.dissenters) {
      o.events.append({c, EventKind::Dissent, ip, counters.count(ip)});
    }
    detail::apply_alarms(fabric, counters, actions, c, o);
  }

  for (const auto& [ip, n] : counters.counts()) o.final_counters[ip] = n;
  o.sb_decode_failures = sb.decode_failures();
  return o;
}

}  // namespace tguard::mv
