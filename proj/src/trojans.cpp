#include "tguard/trojans.hpp"

#include "tguard/error.hpp"

namespace tguard {

Lfsr::Lfsr(std::uint16_t seed) : state_(seed) {
  if (seed == 0) throw ConfigError("LFSR seed must be nonzero");
}

bool Lfsr::next() {
  // Taps 16, 14, 13, 11 correspond to register bits 0, 2, 3, 5.
  const unsigned bit =
      (state_ ^ (state_ >> 2) ^ (state_ >> 3) ^ (state_ >> 5)) & 1u;
  state_ = static_cast<std::uint16_t>((state_ >> 1) | (bit << 15));
  return bit != 0;
}

bool trigger_fires(const Trigger& trigger, const Word& input, std::uint64_t cycle) {
  struct Visitor {
    const Word& input;
    std::uint64_t cycle;
    bool operator()(const AlwaysTrigger&) const { return true; }
    bool operator()(const OddCyclesTrigger&) const { return cycle % 2 == 1; }
    bool operator()(const InternalCounterTrigger& t) const {
      return cycle > 0 && cycle % t.period == 0;
    }
    bool operator()(const ExternalPatternTrigger& t) const {
      return input == t.pattern;
    }
  };
  return std::visit(Visitor{input, cycle}, trigger);
}

std::size_t leak_lane_width(std::size_t width) { return (width + 7) / 8; }

std::string_view to_string(GoldenKind kind) {
  switch (kind) {
    case GoldenKind::Identity:
      return "identity";
    case GoldenKind::Alu:
      return "alu";
    case GoldenKind::Serializer:
      return "serializer";
  }
  return "?";
}

GoldenKind golden_kind_from_string(std::string_view name) {
  if (name == "identity") return GoldenKind::Identity;
  if (name == "alu") return GoldenKind::Alu;
  if (name == "serializer") return GoldenKind::Serializer;
  throw ConfigError("unknown IP function '" + std::string(name) + "'");
}

GoldenModel::GoldenModel(GoldenKind kind, std::size_t width)
    : kind_(kind), width_(width) {
  if (kind == GoldenKind::Alu && width < 4) {
    throw ConfigError("ALU model needs width >= 4");
  }
}

Word GoldenModel::eval(const Word& input) {
  switch (kind_) {
    case GoldenKind::Identity:
      return input;
    case GoldenKind::Alu:
      return eval_alu(input);
    case GoldenKind::Serializer: {
      Word out(width_);
      out.set_bit(0, (tx_ >> pos_) & 1u);
      if (input.bit(0)) rx_ |= static_cast<std::uint8_t>(1u << pos_);
      if (++pos_ == 8) {
        tx_ = rx_;
        rx_ = 0;
        pos_ = 0;
      }
      return out;
    }
  }
  return input;
}

// Operand bits [0, half) and [half, width-2); opcode in the top two bits.
Word GoldenModel::eval_alu(const Word& input) const {
  const std::size_t operand_bits = width_ - 2;
  const std::size_t half = operand_bits / 2;
  const unsigned op = (input.bit(width_ - 1) ? 2u : 0u) | (input.bit(width_ - 2) ? 1u : 0u);
  Word out(width_);
  bool carry = false;
  for (std::size_t i = 0; i < half; ++i) {
    const bool a = input.bit(i);
    const std::size_t bi = half + i;
    const bool b = bi < operand_bits && input.bit(bi);
    switch (op) {
      case 0:
        out.set_bit(i, a ^ b ^ carry);
        carry = (a && b) || (carry && (a ^ b));
        break;
      case 1:
        out.set_bit(i, a && b);
        break;
      case 2:
        out.set_bit(i, a ^ b);
        break;
      default:
        out.set_bit(i, !a);
        break;
    }
  }
  if (op == 0 && half < width_) out.set_bit(half, carry);
  return out;
}

void GoldenModel::sync_state_from(const GoldenModel& other) {
  if (other.kind_ != kind_) {
    throw ConfigError("cannot sync state between different IP functions");
  }
  rx_ = other.rx_;
  tx_ = other.tx_;
  pos_ = other.pos_;
}

VariantInstance::VariantInstance(IpVariant variant, std::size_t width)
    : variant_(std::move(variant)), golden_(variant_.function, width) {
  if (!variant_.trojan) return;
  if (const auto* leak = std::get_if<LeakXorPrng>(&variant_.trojan->payload)) {
    if (leak->secret.width() == 0) throw ConfigError("leak secret must be non-empty");
    lfsr_.emplace(leak->lfsr_seed);
  } else {
    const auto& flip = std::get<DisruptFlip>(variant_.trojan->payload);
    if (flip.mask.width() != width) {
      throw ConfigError("disrupt mask width must equal the scenario word width");
    }
  }
  if (const auto* pat = std::get_if<ExternalPatternTrigger>(&variant_.trojan->trigger)) {
    if (pat->pattern.width() != width) {
      throw ConfigError("trigger pattern width must equal the scenario word width");
    }
  }
  if (const auto* ctr = std::get_if<InternalCounterTrigger>(&variant_.trojan->trigger)) {
    if (ctr->period == 0) throw ConfigError("internal counter period must be positive");
  }
}

Word VariantInstance::evaluate(const Word& input, std::uint64_t cycle) {
  Word out = golden_.eval(input);
  fired_last_ = variant_.trojan && trigger_fires(variant_.trojan->trigger, input, cycle);
  if (!fired_last_) return out;

  if (const auto* flip = std::get_if<DisruptFlip>(&variant_.trojan->payload)) {
    return out ^ flip->mask;
  }
  const auto& leak = std::get<LeakXorPrng>(variant_.trojan->payload);
  const std::size_t w = out.width();
  const std::size_t lane = leak_lane_width(w);
  for (std::size_t j = 0; j < lane; ++j) {
    const bool prng = lfsr_->next();
    out.set_bit(w - lane + j, prng != leak.secret.bit(secret_cursor_));
    secret_cursor_ = (secret_cursor_ + 1) % leak.secret.width();
  }
  return out;
}

std::optional<Word> recover_leaked_secret(std::span<const Word> fired_words,
                                          std::uint16_t lfsr_seed,
                                          std::size_t secret_width) {
  Lfsr prng(lfsr_seed);
  Word secret(secret_width);
  std::size_t recovered = 0;
  for (const auto& w : fired_words) {
    const std::size_t lane = leak_lane_width(w.width());
    for (std::size_t j = 0; j < lane; ++j) {
      const bool bit = w.bit(w.width() - lane + j) != prng.next();
      if (recovered < secret_width) secret.set_bit(recovered, bit);
      ++recovered;
    }
    if (recovered >= secret_width) return secret;
  }
  return std::nullopt;
}

}  // namespace tguard
