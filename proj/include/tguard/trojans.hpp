#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "tguard/word.hpp"

namespace tguard {

/// Identity of one physical IP variant across its whole lifetime in a run.
struct IpId {
  std::uint32_t value = 0;
  friend auto operator<=>(const IpId&, const IpId&) = default;
};

/// 16-bit Fibonacci LFSR with taps {16, 14, 13, 11} (maximal length).
class Lfsr {
 public:
  /// Throws ConfigError on an all-zero seed.
  explicit Lfsr(std::uint16_t seed);

  /// Shifts once and returns the feedback bit.
  bool next();
  std::uint16_t state() const { return state_; }

 private:
  std::uint16_t state_;
};

// Triggers. Cycles are 0-based run cycles.
struct AlwaysTrigger {
  friend bool operator==(const AlwaysTrigger&, const AlwaysTrigger&) = default;
};
struct OddCyclesTrigger {
  friend bool operator==(const OddCyclesTrigger&, const OddCyclesTrigger&) = default;
};
struct InternalCounterTrigger {
  std::uint64_t period = 1;  // fires when cycle % period == 0 and cycle > 0
  friend bool operator==(const InternalCounterTrigger&,
                         const InternalCounterTrigger&) = default;
};
struct ExternalPatternTrigger {
  Word pattern;
  friend bool operator==(const ExternalPatternTrigger&,
                         const ExternalPatternTrigger&) = default;
};
using Trigger = std::variant<AlwaysTrigger, OddCyclesTrigger,
                             InternalCounterTrigger, ExternalPatternTrigger>;

/// Replaces the output's leak lane with PRNG bits XOR secret bits.
struct LeakXorPrng {
  Word secret;  // its own width; bits leak from bit 0 upward, then wrap
  std::uint16_t lfsr_seed = 0xace1;
  friend bool operator==(const LeakXorPrng&, const LeakXorPrng&) = default;
};
/// XORs the output with a fixed mask.
struct DisruptFlip {
  Word mask;
  friend bool operator==(const DisruptFlip&, const DisruptFlip&) = default;
};
using Payload = std::variant<LeakXorPrng, DisruptFlip>;

struct TrojanSpec {
  Trigger trigger;
  Payload payload;
  friend bool operator==(const TrojanSpec&, const TrojanSpec&) = default;
};

bool trigger_fires(const Trigger& trigger, const Word& input, std::uint64_t cycle);

/// Number of most-significant output bits a leak payload overwrites:
/// ceil(width / 8).
std::size_t leak_lane_width(std::size_t width);

/// Functional models shared by every vendor's implementation of a core.
enum class GoldenKind {
  Identity,    // out = in
  Alu,         // op in the top two bits selects add / and / xor / not
  Serializer,  // bit 0 in, bit 0 out; each 8-cycle frame is replayed one frame later
};

std::string_view to_string(GoldenKind kind);
/// Throws ConfigError for unknown names.
GoldenKind golden_kind_from_string(std::string_view name);

/// Deterministic golden functional model with its internal state.
class GoldenModel {
 public:
  /// Throws ConfigError if the function cannot run at this width (ALU needs
  /// width >= 4).
  GoldenModel(GoldenKind kind, std::size_t width);

  Word eval(const Word& input);
  GoldenKind kind() const { return kind_; }
  std::size_t width() const { return width_; }

  /// Copies functional state from another model of the same kind.
  void sync_state_from(const GoldenModel& other);

  friend bool operator==(const GoldenModel&, const GoldenModel&) = default;

 private:
  Word eval_alu(const Word& input) const;

  GoldenKind kind_;
  std::size_t width_;
  // Serializer frame registers.
  std::uint8_t rx_ = 0;
  std::uint8_t tx_ = 0;
  std::uint8_t pos_ = 0;
};

/// A vendor-attributed implementation of a core, optionally Trojan-infected.
struct IpVariant {
  IpId id;
  std::string vendor;
  std::string core;  // authority database key
  GoldenKind function = GoldenKind::Identity;
  std::optional<TrojanSpec> trojan;

  bool infected() const { return trojan.has_value(); }
};

/// Per-run mutable state of one variant: its functional model plus the
/// Trojan's PRNG and secret cursor.
class VariantInstance {
 public:
  VariantInstance(IpVariant variant, std::size_t width);

  /// One clock of the variant. Golden output unless the trigger fires, in
  /// which case the payload is applied.
  Word evaluate(const Word& input, std::uint64_t cycle);

  const IpVariant& variant() const { return variant_; }
  bool fired_last() const { return fired_last_; }
  GoldenModel& golden() { return golden_; }
  const GoldenModel& golden() const { return golden_; }

 private:
  IpVariant variant_;
  GoldenModel golden_;
  std::optional<Lfsr> lfsr_;
  std::size_t secret_cursor_ = 0;
  bool fired_last_ = false;
};

/// The adversary's decoder: knows the LFSR seed, takes the words observed on
/// cycles where the Trojan fired, and XORs the lane with the regenerated PRNG.
/// Returns nullopt when the observations carry fewer than `secret_width` bits.
std::optional<Word> recover_leaked_secret(std::span<const Word> fired_words,
                                          std::uint16_t lfsr_seed,
                                          std::size_t secret_width);

}  // namespace tguard
