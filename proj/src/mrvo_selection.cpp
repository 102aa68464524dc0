#include "tguard/mrvo_selection.hpp"

#include "tguard/error.hpp"

namespace tguard::mrvo {

std::uint8_t WeightTable::weight(IpId ip) const {
  const auto it = weights_.find(ip);
  return it == weights_.end() ? kInitial : it->second;
}

void WeightTable::increment(IpId ip) {
  const auto w = weight(ip);
  weights_[ip] = w == kMax ? w : static_cast<std::uint8_t>(w + 1);
}

void WeightTable::decrement(IpId ip) {
  const auto w = weight(ip);
  weights_[ip] = w == 0 ? w : static_cast<std::uint8_t>(w - 1);
}

std::optional<Selection> select_output(std::span<const SlotOutput> outputs,
                                       SelectionMode mode, const WeightTable& weights,
                                       Rng& rng) {
  if (outputs.empty()) return std::nullopt;
  std::size_t pick = 0;
  std::uint64_t total = 0;
  if (mode == SelectionMode::Biased) {
    for (const auto& o : outputs) total += weights.weight(o.ip);
  }
  if (total == 0) {
    pick = static_cast<std::size_t>(rng.uniform_below(outputs.size()));
  } else {
    std::uint64_t r = rng.uniform_below(total);
    for (pick = 0; pick < outputs.size(); ++pick) {
      const std::uint64_t w = weights.weight(outputs[pick].ip);
      if (r < w) break;
      r -= w;
    }
  }
  const auto& o = outputs[pick];
  return Selection{o.slot, o.ip, o.word};
}

namespace {

std::optional<Word> strict_majority(std::span<const SlotOutput> outputs) {
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    std::size_t n = 0;
    for (const auto& o : outputs) n += o.word == outputs[i].word ? 1 : 0;
    if (2 * n > outputs.size()) return outputs[i].word;
  }
  return std::nullopt;
}

}  // namespace

bool update_weights(WeightTable& weights, std::span<const SlotOutput> outputs) {
  if (outputs.size() < 3) return false;
  const auto majority = strict_majority(outputs);
  if (!majority) return false;
  for (const auto& o : outputs) {
    if (o.word == *majority) {
      weights.increment(o.ip);
    } else {
      weights.decrement(o.ip);
    }
  }
  return true;
}

WeightTable initial_weights(const Scenario& s) {
  WeightTable table;
  for (const auto& v : s.variants) {
    const auto it = s.initial_weights.find(v.core);
    if (it != s.initial_weights.end()) table.set(v.id, it->second);
  }
  return table;
}

RunOutcome run_mrvo(const Scenario& s) {
  s.validate();
  RunOutcome o;
  o.scheme = Scheme::MRVO;
  o.cycles = s.cycles;
  o.infected_variants = s.infected_count();
  o.tracked_infected = s.first_infected();

  Fabric fabric = detail::make_fabric(s);
  InputSource inputs(s.input, s.width, s.seed);
  Rng rng(s.seed, streams::kSelection);
  ObfuscationLayer sb(s.sb, s.slots);
  PeriodicRotation rotation(s.rotation_period);
  WeightTable weights = initial_weights(s);

  for (std::uint64_t c = 0; c < s.cycles; ++c) {
    detail::rotate_if_due(rotation, fabric, c, nullptr, o);
    sb.tick(c);
    auto outputs = fabric.step(inputs.next());
    sb.apply(outputs);
    const auto chosen = select_output(outputs, s.selection, weights, rng);
    std::optional<Word> emitted;
    bool from_infected = false;
    if (chosen) {
      emitted = chosen->word;
      from_infected = o.tracked_infected && chosen->ip == *o.tracked_infected;
    }
    detail::account_emitted(o, emitted, fabric.golden_output(), from_infected, false);
    update_weights(weights, outputs);
  }
  for (const auto& v : s.variants) o.final_weights[v.id] = weights.weight(v.id);
  o.sb_decode_failures = sb.decode_failures();
  return o;
}

SelectionStats selection_stats(const RunOutcome& o) {
  SelectionStats st;
  if (o.infected_variants == 0) {
    st.no_infected_variant = true;
    return st;
  }
  const auto cycles = static_cast<double>(o.cycles);
  st.infected_ip_rate = static_cast<double>(o.infected_selected) / cycles;
  st.infected_output_rate = static_cast<double>(o.corrupted_emitted) / cycles;
  return st;
}

SelectionStats run_mrvo_scenario(const Scenario& s) { return selection_stats(run_mrvo(s)); }

}  // namespace tguard::mrvo
