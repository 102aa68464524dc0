#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tguard/scenario.hpp"
#include "tguard/trojans.hpp"
#include "tguard/word.hpp"

namespace tguard::authority {

enum class Status { Safe, Buggy, Infected };

std::string_view to_string(Status s);

/// Safe at 0, Buggy below the threshold, Infected at or above it.
/// Throws AuthorityError when threshold is 0.
Status classify(std::uint64_t score, std::uint64_t infection_threshold);

/// Evidence attached to a core record.
struct ReportRef {
  std::string id;
  std::string source;  // reporter id, or "batch"
  std::string note;

  friend bool operator==(const ReportRef&, const ReportRef&) = default;
};

struct TrojanReport {
  std::string reporter_id;
  std::string core_id;
  std::vector<Word> input_vector;
  std::vector<Word> observed_output;
  std::string claim;

  friend bool operator==(const TrojanReport&, const TrojanReport&) = default;
};

/// A core's replayable model: its variant definition at a given width.
struct ReferenceModel {
  std::size_t width = 8;
  nlohmann::json variant;

  friend bool operator==(const ReferenceModel&, const ReferenceModel&) = default;
};

struct CoreRecord {
  std::string vendor_id;
  std::string core_id;
  std::uint64_t warning_score = 0;
  Status status = Status::Safe;
  std::vector<ReportRef> evidence;
  std::vector<ReportRef> archived;    // evidence cleared by a vendor fix
  std::vector<ReportRef> unverified;  // reports whose replay showed no dissent
  std::vector<TrojanReport> pending;  // waiting for enough reference models
  std::optional<ReferenceModel> model;

  friend bool operator==(const CoreRecord&, const CoreRecord&) = default;
};

/// The reputation database. Records are keyed by core id.
class AuthorityDb {
 public:
  static constexpr std::uint64_t kDefaultThreshold = 5;
  static constexpr std::uint64_t kDefaultWeightK = 16;
  static constexpr int kFormatVersion = 1;

  explicit AuthorityDb(std::uint64_t infection_threshold = kDefaultThreshold,
                       std::uint64_t weight_k = kDefaultWeightK);

  std::uint64_t infection_threshold() const { return threshold_; }
  std::uint64_t weight_k() const { return weight_k_; }

  /// Throws AuthorityError on a duplicate core id.
  CoreRecord& add_core(std::string vendor_id, std::string core_id,
                       std::optional<ReferenceModel> model = std::nullopt);
  const CoreRecord* find(std::string_view core_id) const;
  /// Throws AuthorityError on an unknown core id.
  CoreRecord& at(std::string_view core_id);
  const std::map<std::string, CoreRecord, std::less<>>& records() const { return records_; }

  /// Adds to the warning score with one evidence entry and reclassifies.
  void add_score(std::string_view core_id, std::uint64_t amount, ReportRef evidence);
  /// The vendor proved the fault is a bug: score back to 0, evidence archived.
  void vendor_fix(std::string_view core_id, const std::string& note);

  std::string next_ref_id(std::string_view prefix);

  /// Line-delimited records: a header line, then one record per core in core
  /// id order.
  std::string serialize() const;
  static AuthorityDb parse(std::string_view text);
  /// Writes through a temporary file and a rename.
  void save(const std::filesystem::path& path) const;
  static AuthorityDb load(const std::filesystem::path& path);

  friend bool operator==(const AuthorityDb&, const AuthorityDb&) = default;

 private:
  std::uint64_t threshold_;
  std::uint64_t weight_k_;
  std::uint64_t next_ref_ = 1;
  std::map<std::string, CoreRecord, std::less<>> records_;
};

/// Exclusive advisory lock on `<db>.lock`, held for the object's lifetime.
class DbLock {
 public:
  explicit DbLock(const std::filesystem::path& db_path);
  ~DbLock();
  DbLock(const DbLock&) = delete;
  DbLock& operator=(const DbLock&) = delete;

 private:
  int fd_ = -1;
};

struct BatchSpec {
  std::size_t width = 8;
  std::uint64_t cycles = 1000;
  std::uint64_t seed = 1;
  InputMode input = InputMode::Random;
  /// Odd count >= 3, distinct vendors, one shared function.
  std::vector<IpVariant> variants;
};

struct BatchResult {
  RunOutcome outcome;
  std::vector<std::string> infected_cores;
  std::map<std::string, std::uint64_t> score_delta;
};

/// Evaluates submitted variants against each other under majority voting for
/// `spec.cycles` cycles. Variants whose dissent counter exceeds the
/// database threshold are replaced and end up Infected; every variant's
/// counter is added to its warning score at the end. Unknown cores are
/// registered together with their reference model.
BatchResult run_evaluation_batch(AuthorityDb& db, const BatchSpec& spec);

enum class ReportVerdict { Verified, Unverified, Pending };

std::string_view to_string(ReportVerdict v);

struct ReportResult {
  ReportVerdict verdict = ReportVerdict::Pending;
  std::optional<std::size_t> dissent_index;  // first dissenting vector entry
};

/// Replays the report's input vector on every stored reference model of the
/// core's function and width. A dissent of the named core from the majority
/// adds one to its score; no dissent archives the report as unverified;
/// fewer than three models leave it pending. Unknown core: AuthorityError.
ReportResult ingest_report(AuthorityDb& db, const TrojanReport& report);

/// Retries every pending report. Returns how many left the pending state.
std::size_t retry_pending(AuthorityDb& db);

/// Initial MRVO weights: Safe 128, Buggy max(1, 128 - k * score), Infected 0.
std::map<std::string, std::uint8_t> export_weights(const AuthorityDb& db);
std::uint8_t weight_for(const CoreRecord& r, std::uint64_t weight_k);

nlohmann::json report_to_json(const TrojanReport& r);
/// Words are read at `width` bits.
TrojanReport report_from_json(const nlohmann::json& j, std::size_t width);
/// Reads a report file, taking the word width from the named core's model.
TrojanReport load_report(const std::filesystem::path& path, const AuthorityDb& db);

}  // namespace tguard::authority
