#include "tguard/harness.hpp"

#include <cstdio>

#include "tguard/error.hpp"
#include "tguard/mcrc_detector.hpp"
#include "tguard/mrvo_selection.hpp"
#include "tguard/mv_detector.hpp"

namespace tguard {

double overall_protection(Scheme s) {
  int sum = 0;
  for (const auto& row : kProtectionScores) {
    switch (s) {
      case Scheme::SB:
        sum += row.sb;
        break;
      case Scheme::MRVO:
        sum += row.mrvo;
        break;
      case Scheme::MCRC:
        sum += row.mcrc;
        break;
      case Scheme::MV:
        sum += row.mv;
        break;
      case Scheme::LoggerOnly:
        return 0.0;
    }
  }
  return 3.0 * sum / (3.0 * static_cast<double>(kProtectionScores.size()));
}

RunOutcome run_sb(const Scenario& s) {
  s.validate();
  RunOutcome o;
  o.scheme = Scheme::SB;
  o.cycles = s.cycles;
  o.infected_variants = s.infected_count();
  o.tracked_infected = s.first_infected();

  Fabric fabric = detail::make_fabric(s);
  InputSource inputs(s.input, s.width, s.seed);
  sb::Channel channel(s.sb.family_size, s.sb.period);
  std::vector<Word> observed;

  for (std::uint64_t c = 0; c < s.cycles; ++c) {
    channel.tick(c);
    const auto outputs = fabric.step(inputs.next());
    std::optional<Word> emitted;
    bool from_infected = false;
    if (!outputs.empty()) {
      const auto& out = outputs.front();
      const Word wire = channel.encode(out.word);
      if (fabric.fired_last(out.ip)) observed.push_back(wire);
      emitted = channel.decode(wire);
      if (*emitted != out.word) ++o.sb_decode_failures;
      from_infected = o.tracked_infected && out.ip == *o.tracked_infected;
    }
    detail::account_emitted(o, emitted, fabric.golden_output(), from_infected, false);
  }
  o.rotations = channel.rotations();

  if (o.tracked_infected) {
    const auto& v = fabric.variant(*o.tracked_infected);
    if (const auto* leak = std::get_if<LeakXorPrng>(&v.trojan->payload)) {
      const auto guess = recover_leaked_secret(observed, leak->lfsr_seed, leak->secret.width());
      o.attacker_recovered_secret = guess && *guess == leak->secret;
    }
  }
  return o;
}

RunOutcome run_logger(const Scenario& s) {
  s.validate();
  RunOutcome o;
  o.scheme = Scheme::LoggerOnly;
  o.cycles = s.cycles;
  o.infected_variants = s.infected_count();
  o.tracked_infected = s.first_infected();

  Fabric fabric = detail::make_fabric(s);
  InputSource inputs(s.input, s.width, s.seed);
  logger::CrcLogger log(s.width, s.logger, s.seed);
  std::vector<Word> trace;
  trace.reserve(s.cycles);

  for (std::uint64_t c = 0; c < s.cycles; ++c) {
    trace.push_back(inputs.next());
    const auto outputs = fabric.step(trace.back());
    std::optional<Word> emitted;
    bool from_infected = false;
    if (!outputs.empty()) {
      const auto& out = outputs.front();
      log.log_cycle(c, trace.back(), out.word);
      emitted = out.word;
      from_infected = o.tracked_infected && out.ip == *o.tracked_infected;
    }
    detail::account_emitted(o, emitted, fabric.golden_output(), from_infected, false);
  }

  const auto entries = log.entries();
  o.log_entries = entries.size();
  o.log_overwrites = log.overwrites();
  const auto kind = s.variants.front().function;
  o.log_mismatches = logger::extract_and_compare(entries, kind, trace).size();
  return o;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

RunOutcome dispatch(const Scenario& s) {
  switch (s.scheme) {
    case Scheme::SB:
      return run_sb(s);
    case Scheme::MRVO:
      return mrvo::run_mrvo(s);
    case Scheme::MCRC:
      return mcrc::run_mcrc(s);
    case Scheme::MV:
      return mv::run_mv(s);
    case Scheme::LoggerOnly:
      return run_logger(s);
  }
  throw ConfigError("unknown scheme");
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string cycle_or_none(const std::optional<std::uint64_t>& c) {
  return c ? std::to_string(*c) : "none";
}

bool significant(EventKind k) {
  switch (k) {
    case EventKind::Warn:
    case EventKind::Replace:
    case EventKind::Rotate:
    case EventKind::RotateSkipped:
    case EventKind::QueueEmpty:
      return true;
    default:
      return false;
  }
}

}  // namespace

RunReport run_scenario(const Scenario& s) {
  RunReport r;
  r.scheme = s.scheme;
  r.width = s.width;
  r.cycles = s.cycles;
  r.slots = s.slots;
  r.seed = s.seed;
  r.selection = s.selection;
  r.outcome = dispatch(s);

  const auto& o = r.outcome;
  if (o.infected_variants > 0) {
    r.infected_ip_rate = ratio(o.infected_selected, o.cycles);
    r.infected_output_rate = ratio(o.corrupted_emitted, o.cycles);
  }
  const auto w = mcrc::measure_leak_window(o);
  r.leak_window = w.fraction;
  r.leak_window_flagged = w.undetected && o.infected_variants > 0;
  r.exposure = ratio(o.infected_selected, o.cycles);
  r.first_detection_cycle = o.detection_cycle;
  r.mismatches = o.corrupted_emitted;
  return r;
}

std::string format_report(const RunReport& r) {
  const auto& o = r.outcome;
  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) {
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  };
  line("scheme", std::string(to_string(r.scheme)));
  line("width", std::to_string(r.width));
  line("slots", std::to_string(r.slots));
  line("cycles", std::to_string(r.cycles));
  line("seed", std::to_string(r.seed));
  line("selection", std::string(to_string(r.selection)));
  line("infected_variants", std::to_string(o.infected_variants));
  line("infected_ip_rate", fixed4(r.infected_ip_rate));
  line("infected_output_rate", fixed4(r.infected_output_rate));
  line("leak_window", fixed4(r.leak_window));
  line("leak_window_flagged", r.leak_window_flagged ? "true" : "false");
  line("exposure", fixed4(r.exposure));
  line("first_detection_cycle", cycle_or_none(r.first_detection_cycle));
  line("mismatches", std::to_string(r.mismatches));
  line("no_output_cycles", std::to_string(o.no_output_cycles));
  line("voting_events", std::to_string(o.voting_events));
  line("no_majority", std::to_string(o.no_majority));
  line("degraded_votes", std::to_string(o.degraded_votes));
  line("golden_disagreements", std::to_string(o.golden_disagreements));
  line("rotations", std::to_string(o.rotations));
  line("sb_decode_failures", std::to_string(o.sb_decode_failures));
  std::string vendors;
  for (const auto& v : o.suspected_vendors) vendors += (vendors.empty() ? "" : ",") + v;
  line("suspected_vendors", vendors.empty() ? "none" : vendors);
  if (o.attacker_recovered_secret) {
    line("attacker_recovered_secret", *o.attacker_recovered_secret ? "true" : "false");
  }
  if (r.scheme == Scheme::LoggerOnly) {
    line("log_entries", std::to_string(o.log_entries));
    line("log_overwrites", std::to_string(o.log_overwrites));
    line("log_mismatches", std::to_string(o.log_mismatches));
  }
  for (const auto& [ip, n] : o.final_counters) {
    line("counter." + std::to_string(ip.value), std::to_string(n));
  }
  for (const auto& [ip, w] : o.final_weights) {
    line("weight." + std::to_string(ip.value), std::to_string(w));
  }
  line("events", std::to_string(o.events.events().size()));
  for (const auto kind : {EventKind::CrcMinority, EventKind::Dissent, EventKind::Warn,
                          EventKind::Replace, EventKind::Rotate, EventKind::RotateSkipped,
                          EventKind::NoMajority, EventKind::QueueEmpty}) {
    line("events." + std::string(to_string(kind)), std::to_string(o.events.count(kind)));
  }
  for (const auto& e : o.events.events()) {
    if (significant(e.kind)) line("event", format_event(e));
  }
  for (const auto& row : kProtectionScores) {
    line("protection." + std::string(row.attack),
         std::to_string(row.sb) + " " + std::to_string(row.mrvo) + " " +
             std::to_string(row.mcrc) + " " + std::to_string(row.mv));
  }
  line("protection.overall",
       fixed1(overall_protection(Scheme::SB)) + " " + fixed1(overall_protection(Scheme::MRVO)) +
           " " + fixed1(overall_protection(Scheme::MCRC)) + " " +
           fixed1(overall_protection(Scheme::MV)));
  return out;
}

Comparison compare_schemes(const Scenario& base) {
  if (base.infected_count() != 1) {
    throw ConfigError("scheme comparison needs exactly one infected variant");
  }
  Comparison c;
  for (const Scheme scheme : {Scheme::MRVO, Scheme::MCRC, Scheme::MV}) {
    Scenario s = base;
    s.scheme = scheme;
    if (scheme == Scheme::MV) s.rotation_period = 0;
    const auto r = run_scenario(s);
    ComparisonRow row;
    row.scheme = scheme;
    row.leak_window = r.leak_window;
    row.exposure = r.exposure;
    row.first_detection_cycle = r.first_detection_cycle;
    row.mismatches = r.mismatches;
    c.rows.push_back(row);
  }
  const auto& mrvo = c.rows[0];
  const auto& mcrc = c.rows[1];
  const auto& mv = c.rows[2];
  c.ordering_holds = mv.exposure == 0.0 && mv.exposure <= mcrc.exposure &&
                     mcrc.exposure < mrvo.exposure;
  return c;
}

std::string format_comparison(const Comparison& c) {
  std::string out = "scheme leak_window exposure first_detection_cycle mismatches\n";
  for (const auto& row : c.rows) {
    out += std::string(to_string(row.scheme)) + " " + fixed4(row.leak_window) + " " +
           fixed4(row.exposure) + " " +
           (row.first_detection_cycle ? std::to_string(*row.first_detection_cycle) : "inf") +
           " " + std::to_string(row.mismatches) + "\n";
  }
  out += std::string("ordering: ") + (c.ordering_holds ? "holds" : "violated") + "\n";
  return out;
}

}  // namespace tguard
