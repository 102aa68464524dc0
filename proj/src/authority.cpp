#include "tguard/authority.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tguard/error.hpp"
#include "tguard/json_io.hpp"
#include "tguard/mv_detector.hpp"

namespace tguard::authority {

using nlohmann::json;

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Safe:
      return "safe";
    case Status::Buggy:
      return "buggy";
    case Status::Infected:
      return "infected";
  }
  return "?";
}

namespace {

Status status_from_string(std::string_view s) {
  if (s == "safe") return Status::Safe;
  if (s == "buggy") return Status::Buggy;
  if (s == "infected") return Status::Infected;
  throw AuthorityError("unknown status '" + std::string(s) + "'");
}

}  // namespace

Status classify(std::uint64_t score, std::uint64_t infection_threshold) {
  if (infection_threshold == 0) throw AuthorityError("infection threshold must be >= 1");
  if (score == 0) return Status::Safe;
  return score < infection_threshold ? Status::Buggy : Status::Infected;
}

AuthorityDb::AuthorityDb(std::uint64_t infection_threshold, std::uint64_t weight_k)
    : threshold_(infection_threshold), weight_k_(weight_k) {
  if (threshold_ == 0) throw AuthorityError("infection threshold must be >= 1");
}

CoreRecord& AuthorityDb::add_core(std::string vendor_id, std::string core_id,
                                  std::optional<ReferenceModel> model) {
  if (core_id.empty()) throw AuthorityError("empty core id");
  if (records_.contains(core_id)) throw AuthorityError("duplicate core id '" + core_id + "'");
  CoreRecord r;
  r.vendor_id = std::move(vendor_id);
  r.core_id = core_id;
  r.model = std::move(model);
  return records_.emplace(std::move(core_id), std::move(r)).first->second;
}

const CoreRecord* AuthorityDb::find(std::string_view core_id) const {
  const auto it = records_.find(core_id);
  return it == records_.end() ? nullptr : &it->second;
}

CoreRecord& AuthorityDb::at(std::string_view core_id) {
  const auto it = records_.find(core_id);
  if (it == records_.end()) throw AuthorityError("unknown core '" + std::string(core_id) + "'");
  return it->second;
}

void AuthorityDb::add_score(std::string_view core_id, std::uint64_t amount, ReportRef evidence) {
  auto& r = at(core_id);
  r.warning_score += amount;
  r.evidence.push_back(std::move(evidence));
  r.status = classify(r.warning_score, threshold_);
}

void AuthorityDb::vendor_fix(std::string_view core_id, const std::string& note) {
  auto& r = at(core_id);
  for (auto& e : r.evidence) r.archived.push_back(std::move(e));
  r.evidence.clear();
  r.archived.push_back({next_ref_id("f"), "vendor", note});
  r.warning_score = 0;
  r.status = Status::Safe;
}

std::string AuthorityDb::next_ref_id(std::string_view prefix) {
  return std::string(prefix) + std::to_string(next_ref_++);
}

namespace {

json ref_to_json(const ReportRef& r) { return {{"id", r.id}, {"source", r.source}, {"note", r.note}}; }

ReportRef ref_from_json(const json& j) {
  return {j.at("id").get<std::string>(), j.at("source").get<std::string>(),
          j.at("note").get<std::string>()};
}

json refs_to_json(const std::vector<ReportRef>& refs) {
  json a = json::array();
  for (const auto& r : refs) a.push_back(ref_to_json(r));
  return a;
}

std::vector<ReportRef> refs_from_json(const json& a) {
  std::vector<ReportRef> out;
  for (const auto& j : a) out.push_back(ref_from_json(j));
  return out;
}

json words_to_json(const std::vector<Word>& words) {
  json a = json::array();
  for (const auto& w : words) a.push_back(w.to_hex());
  return a;
}

std::vector<Word> words_from_json(const json& a, std::size_t width, const char* field) {
  if (!a.is_array()) throw AuthorityError(std::string(field) + " must be an array of hex words");
  std::vector<Word> out;
  for (const auto& j : a) {
    if (!j.is_string()) throw AuthorityError(std::string(field) + " entries must be hex strings");
    try {
      out.push_back(Word::from_hex(width, j.get<std::string>()));
    } catch (const ConfigError& e) {
      throw AuthorityError(std::string(field) + ": " + e.what());
    }
  }
  return out;
}

json record_to_json(const CoreRecord& r) {
  json j;
  j["core"] = r.core_id;
  j["vendor"] = r.vendor_id;
  j["score"] = r.warning_score;
  j["status"] = std::string(to_string(r.status));
  j["evidence"] = refs_to_json(r.evidence);
  j["archived"] = refs_to_json(r.archived);
  j["unverified"] = refs_to_json(r.unverified);
  json pending = json::array();
  for (const auto& p : r.pending) {
    pending.push_back({{"width", p.input_vector.front().width()}, {"report", report_to_json(p)}});
  }
  j["pending"] = pending;
  if (r.model) {
    j["model"] = {{"width", r.model->width}, {"variant", r.model->variant}};
  } else {
    j["model"] = nullptr;
  }
  return j;
}

CoreRecord record_from_json(const json& j, std::uint64_t threshold) {
  CoreRecord r;
  r.core_id = j.at("core").get<std::string>();
  r.vendor_id = j.at("vendor").get<std::string>();
  r.warning_score = j.at("score").get<std::uint64_t>();
  r.status = status_from_string(j.at("status").get<std::string>());
  if (r.status != classify(r.warning_score, threshold)) {
    throw AuthorityError("record '" + r.core_id + "' status does not match its score");
  }
  r.evidence = refs_from_json(j.at("evidence"));
  r.archived = refs_from_json(j.at("archived"));
  r.unverified = refs_from_json(j.at("unverified"));
  for (const auto& p : j.at("pending")) {
    r.pending.push_back(report_from_json(p.at("report"), p.at("width").get<std::size_t>()));
  }
  if (!j.at("model").is_null()) {
    const auto& m = j.at("model");
    r.model = ReferenceModel{m.at("width").get<std::size_t>(), m.at("variant")};
  }
  return r;
}

}  // namespace

std::string AuthorityDb::serialize() const {
  std::string out;
  json header = {{"format", "tguard-authority"},
                 {"version", kFormatVersion},
                 {"infection_threshold", threshold_},
                 {"weight_k", weight_k_},
                 {"next_ref", next_ref_}};
  out += header.dump() + "\n";
  for (const auto& [id, r] : records_) out += record_to_json(r).dump() + "\n";
  return out;
}

AuthorityDb AuthorityDb::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw AuthorityError("empty database");
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "tguard-authority") {
      throw AuthorityError("not an authority database");
    }
    if (header.at("version").get<int>() != kFormatVersion) {
      throw AuthorityError("unsupported database version");
    }
    AuthorityDb db(header.at("infection_threshold").get<std::uint64_t>(),
                   header.at("weight_k").get<std::uint64_t>());
    db.next_ref_ = header.at("next_ref").get<std::uint64_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto r = record_from_json(json::parse(line), db.threshold_);
      const std::string id = r.core_id;
      if (!db.records_.emplace(id, std::move(r)).second) {
        throw AuthorityError("duplicate core id '" + id + "' in database");
      }
    }
    return db;
  } catch (const json::exception& e) {
    throw AuthorityError(std::string("malformed database: ") + e.what());
  }
}

void AuthorityDb::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw AuthorityError("cannot write " + tmp.string());
    out << serialize();
    out.flush();
    if (!out) throw AuthorityError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AuthorityDb AuthorityDb::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuthorityError("cannot open database " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

DbLock::DbLock(const std::filesystem::path& db_path) {
  auto lock_path = db_path;
  lock_path += ".lock";
  fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
  if (fd_ < 0) throw AuthorityError("cannot open lock file " + lock_path.string());
  if (::flock(fd_, LOCK_EX) != 0) {
    ::close(fd_);
    throw AuthorityError("cannot lock " + lock_path.string());
  }
}

DbLock::~DbLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

BatchResult run_evaluation_batch(AuthorityDb& db, const BatchSpec& spec) {
  const auto& vars = spec.variants;
  std::set<std::string> vendors, cores;
  for (const auto& v : vars) {
    if (!vendors.insert(v.vendor).second) {
      throw AuthorityError("duplicate vendor '" + v.vendor + "' in one batch");
    }
    if (!cores.insert(v.core).second) {
      throw AuthorityError("duplicate core '" + v.core + "' in one batch");
    }
    if (const auto* r = db.find(v.core); r && r->vendor_id != v.vendor) {
      throw AuthorityError("core '" + v.core + "' belongs to vendor '" + r->vendor_id + "'");
    }
  }
  if (vars.size() < 3) throw AuthorityError("a batch needs at least three variants");
  if (db.infection_threshold() < 2) {
    throw AuthorityError("batch evaluation needs an infection threshold >= 2");
  }

  Scenario s;
  s.scheme = Scheme::MV;
  s.width = spec.width;
  s.cycles = spec.cycles;
  s.slots = vars.size();
  s.seed = spec.seed;
  s.input = spec.input;
  s.thresholds.replace = static_cast<std::uint32_t>(db.infection_threshold());
  s.thresholds.warn = std::min<std::uint32_t>(2, s.thresholds.replace - 1);
  s.variants = vars;

  BatchResult result;
  result.outcome = mv::run_mv(s);
  const auto& o = result.outcome;

  for (const auto& v : vars) {
    if (!db.find(v.core)) {
      db.add_core(v.vendor, v.core, ReferenceModel{spec.width, variant_to_json(v)});
    }
    const auto it = o.final_counters.find(v.id);
    const std::uint64_t counter = it == o.final_counters.end() ? 0 : it->second;
    std::optional<std::uint64_t> replaced_at;
    for (const auto& e : o.events.events()) {
      if (e.kind == EventKind::Replace && e.ip == v.id) {
        replaced_at = e.cycle;
        break;
      }
    }
    if (counter == 0) continue;
    std::string note = std::to_string(counter) + " dissents in " + std::to_string(spec.cycles) +
                       " cycles";
    if (replaced_at) note += ", replaced at cycle " + std::to_string(*replaced_at);
    db.add_score(v.core, counter, {db.next_ref_id("b"), "batch", note});
    result.score_delta[v.core] = counter;
    if (replaced_at) result.infected_cores.push_back(v.core);
  }
  return result;
}

std::string_view to_string(ReportVerdict v) {
  switch (v) {
    case ReportVerdict::Verified:
      return "verified";
    case ReportVerdict::Unverified:
      return "unverified";
    case ReportVerdict::Pending:
      return "pending";
  }
  return "?";
}

namespace {

// nullopt: not enough reference models to replay.
std::optional<ReportResult> replay(const AuthorityDb& db, const TrojanReport& report) {
  const auto* named = db.find(report.core_id);
  if (!named->model) return std::nullopt;
  const auto& model = *named->model;
  const json function = model.variant.value("function", json("identity"));

  std::vector<VariantInstance> instances;
  std::size_t named_index = 0;
  std::uint32_t next_id = 0;
  for (const auto& [id, r] : db.records()) {
    if (!r.model || r.model->width != model.width) continue;
    if (r.model->variant.value("function", json("identity")) != function) continue;
    auto v = variant_from_json(r.model->variant, r.model->width);
    v.id = IpId{next_id++};
    if (id == report.core_id) named_index = instances.size();
    instances.emplace_back(std::move(v), r.model->width);
  }
  if (instances.size() < 3) return std::nullopt;

  ReportResult result;
  result.verdict = ReportVerdict::Unverified;
  for (std::size_t k = 0; k < report.input_vector.size(); ++k) {
    const Word& in = report.input_vector[k];
    if (in.width() != model.width) {
      throw AuthorityError("report input width does not match core '" + report.core_id + "'");
    }
    std::vector<SlotOutput> outs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      outs.push_back({i, instances[i].variant().id, instances[i].evaluate(in, k)});
    }
    const auto verdict = mv::majority_vote(outs);
    if (verdict.has_majority && outs[named_index].word != verdict.output &&
        !result.dissent_index) {
      result.verdict = ReportVerdict::Verified;
      result.dissent_index = k;
    }
  }
  return result;
}

}  // namespace

ReportResult ingest_report(AuthorityDb& db, const TrojanReport& report) {
  if (!db.find(report.core_id)) throw AuthorityError("unknown core '" + report.core_id + "'");
  if (report.input_vector.empty()) throw AuthorityError("report has an empty input vector");
  const auto replayed = replay(db, report);
  auto& rec = db.at(report.core_id);
  if (!replayed) {
    rec.pending.push_back(report);
    return {};
  }
  const std::string ref = db.next_ref_id("r");
  if (replayed->verdict == ReportVerdict::Verified) {
    db.add_score(report.core_id, 1,
                 {ref, report.reporter_id,
                  "dissent at vector index " + std::to_string(*replayed->dissent_index) +
                      (report.claim.empty() ? "" : ": " + report.claim)});
  } else {
    rec.unverified.push_back({ref, report.reporter_id, report.claim});
  }
  return *replayed;
}

std::size_t retry_pending(AuthorityDb& db) {
  std::size_t resolved = 0;
  std::vector<TrojanReport> all;
  for (const auto& [id, r] : db.records()) {
    all.insert(all.end(), r.pending.begin(), r.pending.end());
  }
  for (const auto& [id, r] : db.records()) db.at(id).pending.clear();
  for (const auto& rep : all) {
    if (ingest_report(db, rep).verdict != ReportVerdict::Pending) ++resolved;
  }
  return resolved;
}

std::uint8_t weight_for(const CoreRecord& r, std::uint64_t weight_k) {
  switch (r.status) {
    case Status::Safe:
      return 128;
    case Status::Infected:
      return 0;
    case Status::Buggy:
      break;
  }
  const std::uint64_t penalty = weight_k * r.warning_score;
  return penalty >= 127 ? 1 : static_cast<std::uint8_t>(128 - penalty);
}

std::map<std::string, std::uint8_t> export_weights(const AuthorityDb& db) {
  std::map<std::string, std::uint8_t> out;
  for (const auto& [id, r] : db.records()) out[id] = weight_for(r, db.weight_k());
  return out;
}

json report_to_json(const TrojanReport& r) {
  return {{"reporter", r.reporter_id},
          {"core", r.core_id},
          {"inputs", words_to_json(r.input_vector)},
          {"observed", words_to_json(r.observed_output)},
          {"claim", r.claim}};
}

TrojanReport report_from_json(const json& j, std::size_t width) {
  if (!j.is_object()) throw AuthorityError("report must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known = {"reporter", "core", "inputs", "observed",
                                                "claim", "width"};
    if (!known.contains(key)) throw AuthorityError("unknown report key '" + key + "'");
  }
  TrojanReport r;
  try {
    r.reporter_id = j.at("reporter").get<std::string>();
    r.core_id = j.at("core").get<std::string>();
    r.claim = j.value("claim", "");
  } catch (const json::exception& e) {
    throw AuthorityError(std::string("malformed report: ") + e.what());
  }
  if (!j.contains("inputs")) throw AuthorityError("report is missing 'inputs'");
  r.input_vector = words_from_json(j.at("inputs"), width, "inputs");
  if (j.contains("observed")) r.observed_output = words_from_json(j.at("observed"), width, "observed");
  if (r.input_vector.empty()) throw AuthorityError("report has an empty input vector");
  return r;
}

TrojanReport load_report(const std::filesystem::path& path, const AuthorityDb& db) {
  std::ifstream in(path);
  if (!in) throw AuthorityError("cannot open report " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw AuthorityError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("core") || !j.at("core").is_string()) {
    throw AuthorityError("report must name a core");
  }
  const auto* rec = db.find(j.at("core").get<std::string>());
  if (!rec) throw AuthorityError("unknown core '" + j.at("core").get<std::string>() + "'");
  std::size_t width = 0;
  if (j.contains("width")) {
    width = j.at("width").get<std::size_t>();
  } else if (rec->model) {
    width = rec->model->width;
  } else {
    throw AuthorityError("report needs a 'width' for a core without a stored model");
  }
  return report_from_json(j, width);
}

}  // namespace tguard::authority
