#include "tguard/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tguard/error.hpp"
#include "tguard/json_io.hpp"

namespace tguard {

using nlohmann::json;

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::SB:
      return "sb";
    case Scheme::MRVO:
      return "mrvo";
    case Scheme::MCRC:
      return "mcrc";
    case Scheme::MV:
      return "mv";
    case Scheme::LoggerOnly:
      return "logger";
  }
  return "?";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "sb") return Scheme::SB;
  if (name == "mrvo") return Scheme::MRVO;
  if (name == "mcrc") return Scheme::MCRC;
  if (name == "mv") return Scheme::MV;
  if (name == "logger") return Scheme::LoggerOnly;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(SelectionMode m) {
  return m == SelectionMode::Biased ? "biased" : "unbiased";
}

SelectionMode selection_from_string(std::string_view name) {
  if (name == "unbiased") return SelectionMode::Unbiased;
  if (name == "biased") return SelectionMode::Biased;
  throw ConfigError("unknown selection mode '" + std::string(name) + "'");
}

void Scenario::validate() const {
  if (width < 1 || width > Word::kMaxWidth) {
    throw ConfigError("width must be in [1, 256]");
  }
  if (cycles == 0) throw ConfigError("cycles must be positive");
  if (slots == 0) throw ConfigError("slots must be positive");
  if (variants.size() < slots) {
    throw ConfigError("scenario declares " + std::to_string(slots) + " slots but only " +
                      std::to_string(variants.size()) + " variants");
  }
  switch (scheme) {
    case Scheme::MV:
      if (slots < 3 || slots % 2 == 0) {
        throw ConfigError("MV needs an odd number of slots >= 3, got " +
                          std::to_string(slots));
      }
      break;
    case Scheme::MCRC:
      if (slots < 3) {
        throw ConfigError("MCRC needs at least 3 slots, got " + std::to_string(slots));
      }
      logger::check_loggable_width(width);
      break;
    case Scheme::MRVO:
      if (slots < 2) {
        throw ConfigError("MRVO needs at least 2 slots, got " + std::to_string(slots));
      }
      break;
    case Scheme::SB:
      if (slots != 1) throw ConfigError("SB guards exactly one IP channel (slots = 1)");
      break;
    case Scheme::LoggerOnly:
      if (slots != 1) throw ConfigError("logger scheme runs exactly one IP (slots = 1)");
      logger::check_loggable_width(width);
      logger.validate();
      break;
  }
  thresholds.validate();
  if (sb.family_size == 0) throw ConfigError("sb.family_size must be >= 1");
  if (cost.swap_cycles == 0 || cost.full_program_cycles == 0) {
    throw ConfigError("cost model cycles must be positive");
  }
  std::set<IpId> ids;
  for (const auto& v : variants) {
    if (!ids.insert(v.id).second) {
      throw ConfigError("duplicate variant id " + std::to_string(v.id.value));
    }
    if (v.function != variants.front().function) {
      throw ConfigError("all variants must implement the same function");
    }
    // Instantiating checks Trojan parameter widths and function/width fit.
    VariantInstance probe(v, width);
  }
}

std::size_t Scenario::infected_count() const {
  std::size_t n = 0;
  for (const auto& v : variants) n += v.infected() ? 1 : 0;
  return n;
}

std::optional<IpId> Scenario::first_infected() const {
  for (const auto& v : variants) {
    if (v.infected()) return v.id;
  }
  return std::nullopt;
}

namespace {

std::uint64_t parse_u64(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text, &used, 0);
      if (used == text.size()) return v;
    } catch (const std::logic_error&) {
    }
  }
  throw ConfigError(std::string("field '") + what + "' must be a non-negative integer");
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing required field '") + key + "'");
  return j.at(key);
}

std::string get_string(const json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const char* where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown field '") + key + "' in " + where);
  }
}

Word parse_word(const json& j, std::size_t width, const char* what) {
  if (j.is_string()) return Word::from_hex(width, j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = parse_u64(j, what);
    Word w(width, v);
    if (w.low64() != v) {
      throw ConfigError(std::string("value of '") + what + "' exceeds the word width");
    }
    return w;
  }
  throw ConfigError(std::string("field '") + what + "' must be a hex string or integer");
}

logger::LoggerConfig parse_logger(const json& j) {
  reject_unknown(j, {"capacity", "mode", "windows", "probability"}, "logger");
  logger::LoggerConfig cfg;
  if (j.contains("capacity")) cfg.capacity = parse_u64(j.at("capacity"), "logger.capacity");
  const std::string mode = j.contains("mode") ? get_string(j, "mode") : "always";
  if (mode == "always") {
    cfg.mode = logger::AlwaysOn{};
  } else if (mode == "windows") {
    logger::Windows w;
    for (const auto& r : require(j, "windows")) {
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("logger windows are [first, last] pairs");
      }
      w.ranges.push_back({parse_u64(r[0], "window"), parse_u64(r[1], "window")});
    }
    cfg.mode = std::move(w);
  } else if (mode == "random") {
    const auto& p = require(j, "probability");
    if (!p.is_number()) throw ConfigError("logger.probability must be a number");
    cfg.mode = logger::RandomDuty{p.get<double>()};
  } else {
    throw ConfigError("unknown logger mode '" + mode + "'");
  }
  cfg.validate();
  return cfg;
}

std::map<std::string, std::uint8_t> parse_weights(const json& j) {
  std::map<std::string, std::uint8_t> out;
  if (!j.is_object()) throw ConfigError("initial weights must be an object");
  for (const auto& [core, w] : j.items()) {
    const auto v = parse_u64(w, "initial weight");
    if (v > 255) throw ConfigError("initial weight for '" + core + "' exceeds 255");
    out[core] = static_cast<std::uint8_t>(v);
  }
  return out;
}

}  // namespace

json trojan_to_json(const TrojanSpec& t) {
  json j;
  std::visit(
      [&j](const auto& trig) {
        using T = std::decay_t<decltype(trig)>;
        if constexpr (std::is_same_v<T, AlwaysTrigger>) {
          j["trigger"] = "always";
        } else if constexpr (std::is_same_v<T, OddCyclesTrigger>) {
          j["trigger"] = "odd_cycles";
        } else if constexpr (std::is_same_v<T, InternalCounterTrigger>) {
          j["trigger"] = "internal_counter";
          j["period"] = trig.period;
        } else {
          j["trigger"] = "external_pattern";
          j["pattern"] = trig.pattern.to_hex();
        }
      },
      t.trigger);
  if (const auto* flip = std::get_if<DisruptFlip>(&t.payload)) {
    j["payload"] = "disrupt_flip";
    j["mask"] = flip->mask.to_hex();
  } else {
    const auto& leak = std::get<LeakXorPrng>(t.payload);
    j["payload"] = "leak_xor_prng";
    j["secret"] = leak.secret.to_hex();
    j["secret_width"] = leak.secret.width();
    j["lfsr_seed"] = leak.lfsr_seed;
  }
  return j;
}

TrojanSpec trojan_from_json(const json& j, std::size_t width) {
  if (!j.is_object()) throw ConfigError("trojan must be an object");
  reject_unknown(j,
                 {"trigger", "period", "pattern", "payload", "mask", "secret",
                  "secret_width", "lfsr_seed"},
                 "trojan");
  TrojanSpec t{AlwaysTrigger{}, DisruptFlip{Word(width, 1)}};
  const std::string trig = get_string(j, "trigger");
  if (trig == "always") {
    t.trigger = AlwaysTrigger{};
  } else if (trig == "odd_cycles") {
    t.trigger = OddCyclesTrigger{};
  } else if (trig == "internal_counter") {
    const auto period = parse_u64(require(j, "period"), "period");
    if (period == 0) throw ConfigError("internal_counter period must be positive");
    t.trigger = InternalCounterTrigger{period};
  } else if (trig == "external_pattern") {
    t.trigger = ExternalPatternTrigger{parse_word(require(j, "pattern"), width, "pattern")};
  } else {
    throw ConfigError("unknown trigger '" + trig + "'");
  }

  const std::string payload = get_string(j, "payload");
  if (payload == "disrupt_flip") {
    t.payload = DisruptFlip{parse_word(require(j, "mask"), width, "mask")};
  } else if (payload == "leak_xor_prng") {
    const auto& secret_json = require(j, "secret");
    if (!secret_json.is_string()) throw ConfigError("secret must be a hex string");
    std::string hex = secret_json.get<std::string>();
    std::size_t secret_width = 0;
    if (j.contains("secret_width")) {
      secret_width = parse_u64(j.at("secret_width"), "secret_width");
    } else {
      const std::size_t prefix = (hex.starts_with("0x") || hex.starts_with("0X")) ? 2 : 0;
      secret_width = 4 * (hex.size() - prefix);
    }
    LeakXorPrng leak;
    leak.secret = Word::from_hex(secret_width, hex);
    const auto seed = j.contains("lfsr_seed") ? parse_u64(j.at("lfsr_seed"), "lfsr_seed")
                                              : std::uint64_t{0xace1};
    if (seed == 0 || seed > 0xffff) throw ConfigError("lfsr_seed must be in [1, 0xffff]");
    leak.lfsr_seed = static_cast<std::uint16_t>(seed);
    t.payload = leak;
  } else {
    throw ConfigError("unknown payload '" + payload + "'");
  }
  return t;
}

json variant_to_json(const IpVariant& v) {
  json j;
  j["id"] = v.id.value;
  j["vendor"] = v.vendor;
  j["core"] = v.core;
  j["function"] = std::string(to_string(v.function));
  if (v.trojan) j["trojan"] = trojan_to_json(*v.trojan);
  return j;
}

IpVariant variant_from_json(const json& j, std::size_t width) {
  if (!j.is_object()) throw ConfigError("variant must be an object");
  reject_unknown(j, {"id", "vendor", "core", "function", "trojan"}, "variant");
  IpVariant v;
  const auto id = parse_u64(require(j, "id"), "id");
  if (id > 0xffffffffu) throw ConfigError("variant id too large");
  v.id = IpId{static_cast<std::uint32_t>(id)};
  v.vendor = j.contains("vendor") ? get_string(j, "vendor") : "vendor" + std::to_string(id);
  v.core = j.contains("core") ? get_string(j, "core") : "ip" + std::to_string(id);
  v.function = j.contains("function") ? golden_kind_from_string(get_string(j, "function"))
                                      : GoldenKind::Identity;
  if (j.contains("trojan") && !j.at("trojan").is_null()) {
    v.trojan = trojan_from_json(j.at("trojan"), width);
  }
  return v;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  reject_unknown(j,
                 {"scheme", "width", "cycles", "slots", "seed", "input", "selection",
                  "threshold", "warn_threshold", "rotation_period", "cost_model", "sb",
                  "logger", "initial_weights", "initial_weights_file", "variants"},
                 "scenario");

  Scenario s;
  s.scheme = scheme_from_string(get_string(j, "scheme"));
  s.width = parse_u64(require(j, "width"), "width");
  if (s.width < 1 || s.width > Word::kMaxWidth) throw ConfigError("width must be in [1, 256]");
  s.cycles = parse_u64(require(j, "cycles"), "cycles");
  s.slots = parse_u64(require(j, "slots"), "slots");
  s.seed = parse_u64(require(j, "seed"), "seed");

  if (j.contains("input")) {
    const auto mode = get_string(j, "input");
    if (mode == "random") {
      s.input = InputMode::Random;
    } else if (mode == "counter") {
      s.input = InputMode::Counter;
    } else {
      throw ConfigError("unknown input mode '" + mode + "'");
    }
  }
  if (j.contains("selection")) s.selection = selection_from_string(get_string(j, "selection"));
  if (j.contains("threshold")) {
    s.thresholds.replace = static_cast<std::uint32_t>(parse_u64(j.at("threshold"), "threshold"));
  }
  if (j.contains("warn_threshold")) {
    s.thresholds.warn =
        static_cast<std::uint32_t>(parse_u64(j.at("warn_threshold"), "warn_threshold"));
  }
  if (j.contains("rotation_period")) {
    s.rotation_period = parse_u64(j.at("rotation_period"), "rotation_period");
  }
  if (j.contains("cost_model")) {
    const auto& c = j.at("cost_model");
    reject_unknown(c, {"full_program_cycles", "swap_cycles"}, "cost_model");
    const auto full = c.contains("full_program_cycles")
                          ? parse_u64(c.at("full_program_cycles"), "full_program_cycles")
                          : PrCostModel::kDefaultFullProgramCycles;
    s.cost = PrCostModel::from_full_program(full);
    if (c.contains("swap_cycles")) s.cost.swap_cycles = parse_u64(c.at("swap_cycles"), "swap_cycles");
  }
  if (j.contains("sb")) {
    const auto& sbj = j.at("sb");
    reject_unknown(sbj, {"enabled", "family_size", "period"}, "sb");
    s.sb.enabled = sbj.value("enabled", true);
    if (sbj.contains("family_size")) s.sb.family_size = parse_u64(sbj.at("family_size"), "family_size");
    if (sbj.contains("period")) s.sb.period = parse_u64(sbj.at("period"), "period");
  }
  if (j.contains("logger")) s.logger = parse_logger(j.at("logger"));
  if (j.contains("initial_weights_file")) {
    std::filesystem::path p = get_string(j, "initial_weights_file");
    if (p.is_relative()) p = base_dir / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open initial weights file " + p.string());
    json w;
    try {
      w = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("bad weights file: " + std::string(e.what()));
    }
    s.initial_weights = parse_weights(w.contains("weights") ? w.at("weights") : w);
  }
  if (j.contains("initial_weights")) {
    for (const auto& [core, w] : parse_weights(j.at("initial_weights"))) {
      s.initial_weights[core] = w;
    }
  }
  const auto& vars = require(j, "variants");
  if (!vars.is_array()) throw ConfigError("variants must be an array");
  for (const auto& v : vars) s.variants.push_back(variant_from_json(v, s.width));

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

Scenario selection_bench(SelectionMode mode, bool odd_cycles_only, std::uint64_t seed,
                         std::size_t ips, std::uint64_t cycles) {
  Scenario s;
  s.scheme = Scheme::MRVO;
  s.width = 8;
  s.cycles = cycles;
  s.slots = ips;
  s.seed = seed;
  s.selection = mode;
  for (std::uint32_t i = 0; i < ips; ++i) {
    IpVariant v;
    v.id = IpId{i};
    v.vendor = "vendor" + std::to_string(i);
    v.core = "rs_tx_n" + std::to_string(i + 1);
    v.function = GoldenKind::Identity;
    s.variants.push_back(std::move(v));
  }
  auto& infected = s.variants.back();
  infected.trojan = TrojanSpec{
      odd_cycles_only ? Trigger{OddCyclesTrigger{}} : Trigger{AlwaysTrigger{}},
      DisruptFlip{Word(8, 0x01)}};
  s.validate();
  return s;
}

InputSource::InputSource(InputMode mode, std::size_t width, std::uint64_t seed)
    : mode_(mode), width_(width), rng_(seed, streams::kInput) {}

Word InputSource::next() {
  if (mode_ == InputMode::Counter) return Word(width_, count_++);
  return rng_.word(width_);
}

ObfuscationLayer::ObfuscationLayer(const SbConfig& config, std::size_t slots)
    : enabled_(config.enabled) {
  if (enabled_) channels_.assign(slots, sb::Channel(config.family_size, config.period));
}

void ObfuscationLayer::tick(std::uint64_t cycle) {
  for (auto& c : channels_) c.tick(cycle);
}

void ObfuscationLayer::apply(std::vector<SlotOutput>& outputs) {
  if (!enabled_) return;
  for (auto& out : outputs) {
    const auto& channel = channels_.at(out.slot);
    const Word received = channel.decode(channel.encode(out.word));
    if (received != out.word) ++decode_failures_;
    out.word = received;
  }
}

namespace detail {

void account_emitted(RunOutcome& o, const std::optional<Word>& emitted, const Word& golden,
                     bool from_infected, bool detected) {
  if (!detected) ++o.pre_detection_cycles;
  if (!emitted) {
    ++o.no_output_cycles;
    return;
  }
  if (*emitted != golden) ++o.corrupted_emitted;
  if (from_infected) {
    ++o.infected_selected;
    if (!detected) ++o.pre_detection_infected_selected;
  }
}

void apply_alarms(Fabric& fabric, ErrorCounters& counters,
                  std::span<const AlarmAction> actions, std::uint64_t cycle,
                  RunOutcome& o) {
  for (const auto& a : actions) {
    if (a.kind == AlarmKind::Warn) {
      o.events.append({cycle, EventKind::Warn, a.ip, a.counter});
      continue;
    }
    if (a.kind != AlarmKind::Replace) continue;
    o.events.append({cycle, EventKind::Replace, a.ip, a.counter});
    if (o.tracked_infected && *o.tracked_infected == a.ip && !o.detection_cycle) {
      o.detection_cycle = cycle;
    }
    const auto& vendor = fabric.variant(a.ip).vendor;
    if (std::find(o.suspected_vendors.begin(), o.suspected_vendors.end(), vendor) ==
        o.suspected_vendors.end()) {
      o.suspected_vendors.push_back(vendor);
    }
    for (std::size_t s = 0; s < fabric.slot_count(); ++s) {
      if (fabric.programmed_ip(s) != a.ip) continue;
      if (fabric.queue().empty()) {
        fabric.evict(s);
        o.events.append({cycle, EventKind::QueueEmpty, a.ip, a.counter});
      } else {
        fabric.begin_swap(s, Outgoing::Discard);
      }
      break;
    }
    o.final_counters[a.ip] = a.counter;
    counters.reset(a.ip);
  }
}

void rotate_if_due(PeriodicRotation& rotation, Fabric& fabric, std::uint64_t cycle,
                   const ErrorCounters* counters, RunOutcome& o) {
  const auto r = rotation.tick(fabric, cycle);
  if (r.outcome == RotationOutcome::NotDue) return;
  const auto ip = r.outgoing ? r.outgoing : fabric.programmed_ip(r.slot);
  const std::uint32_t counter = (ip && counters) ? counters->count(*ip) : 0;
  if (r.outcome == RotationOutcome::Rotated) {
    ++o.rotations;
    o.rotation_slots.emplace_back(cycle, r.slot);
    o.events.append({cycle, EventKind::Rotate, ip, counter});
  } else {
    o.events.append({cycle, EventKind::RotateSkipped, ip, counter});
  }
}

Fabric make_fabric(const Scenario& s) {
  return Fabric(s.width, s.slots, s.cost, s.variants);
}

}  // namespace detail

}  // namespace tguard
