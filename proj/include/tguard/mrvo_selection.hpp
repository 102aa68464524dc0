#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>

#include "tguard/fabric.hpp"
#include "tguard/rng.hpp"
#include "tguard/scenario.hpp"

namespace tguard::mrvo {

/// 8-bit per-IP selection weights. Unknown IPs start at half scale.
class WeightTable {
 public:
  static constexpr std::uint8_t kInitial = 128;
  static constexpr std::uint8_t kMax = 255;

  std::uint8_t weight(IpId ip) const;
  void set(IpId ip, std::uint8_t w) { weights_[ip] = w; }
  void increment(IpId ip);
  void decrement(IpId ip);
  const std::map<IpId, std::uint8_t>& entries() const { return weights_; }

 private:
  std::map<IpId, std::uint8_t> weights_;
};

struct Selection {
  std::size_t slot = 0;
  IpId ip;
  Word word;
};

/// Picks one live output. Unbiased: uniform over live slots. Biased:
/// P(i) = w_i / sum(w) over live slots, uniform if every weight is zero.
/// Returns nullopt when no slot is live.
std::optional<Selection> select_output(std::span<const SlotOutput> outputs,
                                       SelectionMode mode, const WeightTable& weights,
                                       Rng& rng);

/// Reinforces agreement. With at least three live outputs and a word held by
/// a strict majority, agreeing IPs gain one and the rest lose one, both
/// saturating in [0, 255]. Returns whether an update happened.
bool update_weights(WeightTable& weights, std::span<const SlotOutput> outputs);

struct SelectionStats {
  double infected_ip_rate = 0.0;
  double infected_output_rate = 0.0;
  /// Set when the scenario has no infected variant (rates are then 0).
  bool no_infected_variant = false;
};

/// Output multiplexing for `s.cycles` cycles with optional periodic IP
/// replacement (`s.rotation_period`). Weights learn from raw outputs every
/// cycle with at least three live outputs, in either selection mode.
RunOutcome run_mrvo(const Scenario& s);

/// Selection rates of a run: the fraction of cycles on which the infected
/// IP was chosen, and on which the chosen word differed from golden.
SelectionStats selection_stats(const RunOutcome& outcome);
SelectionStats run_mrvo_scenario(const Scenario& s);

/// Seeds a weight table from an authority export keyed by core id.
WeightTable initial_weights(const Scenario& s);

}  // namespace tguard::mrvo
