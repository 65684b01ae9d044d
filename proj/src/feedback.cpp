#include "cryptomate/feedback.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cryptomate {

using nlohmann::json;

std::string_view toString(VerdictKind v) { return v == VerdictKind::FalsePositive ? "fp" : "tp"; }

std::optional<VerdictKind> parseVerdict(std::string_view s) {
  if (s == "fp") return VerdictKind::FalsePositive;
  if (s == "tp") return VerdictKind::TruePositive;
  return std::nullopt;
}

void FeedbackStore::recordVerdict(const std::string& fingerprint, VerdictKind verdict,
                                  const std::string& ruleId, Strategy strategy, std::string at) {
  FeedbackRecord& rec = records[fingerprint];
  if (rec.ruleId.empty()) rec.ruleId = ruleId;
  if (!rec.verdicts.empty() && at < rec.verdicts.back().at) at = rec.verdicts.back().at;
  rec.verdicts.push_back({verdict, strategy, std::move(at)});
}

namespace {
void tally(VerdictCounts& c, VerdictKind v) {
  (v == VerdictKind::FalsePositive ? c.fp : c.tp) += 1;
}
}  // namespace

VerdictCounts FeedbackStore::counts(const std::string& fingerprint) const {
  VerdictCounts c;
  auto it = records.find(fingerprint);
  if (it == records.end()) return c;
  for (const auto& v : it->second.verdicts) tally(c, v.verdict);
  return c;
}

VerdictCounts FeedbackStore::counts(const std::string& ruleId, Strategy strategy) const {
  VerdictCounts c;
  for (const auto& [fp, rec] : records) {
    if (rec.ruleId != ruleId) continue;
    for (const auto& v : rec.verdicts)
      if (v.strategy == strategy) tally(c, v.verdict);
  }
  return c;
}

double smoothedRate(const VerdictCounts& c) {
  return (static_cast<double>(c.fp) + 1.0) / (static_cast<double>(c.total()) + 2.0);
}

double FeedbackStore::fpRate(const std::string& fingerprint) const {
  return smoothedRate(counts(fingerprint));
}

double FeedbackStore::fpRate(const std::string& ruleId, Strategy strategy) const {
  return smoothedRate(counts(ruleId, strategy));
}

StoreCorrupt::StoreCorrupt(std::filesystem::path path, const std::string& reason)
    : std::runtime_error(path.string() + ": " + reason), path_(std::move(path)) {}

std::string toJson(const FeedbackStore& store) {
  json records = json::object();
  for (const auto& [fp, rec] : store.records) {
    json verdicts = json::array();
    for (const auto& v : rec.verdicts)
      verdicts.push_back({{"verdict", toString(v.verdict)},
                          {"strategy", toString(v.strategy)},
                          {"at", v.at}});
    records[fp] = {{"rule_id", rec.ruleId}, {"verdicts", std::move(verdicts)}};
  }
  json doc = {{"version", FeedbackStore::kVersion}, {"records", std::move(records)}};
  return doc.dump(2) + "\n";
}

FeedbackStore storeFromJson(const std::string& text) {
  json doc = json::parse(text);  // parse_error derives from std::exception
  auto fail = [](const std::string& why) { throw std::runtime_error(why); };
  if (!doc.is_object()) fail("top level must be an object");
  if (doc.value("version", 0) != FeedbackStore::kVersion) fail("unsupported version");
  if (!doc.contains("records") || !doc["records"].is_object()) fail("records must be an object");
  FeedbackStore store;
  for (const auto& [fp, rec] : doc["records"].items()) {
    if (!rec.is_object() || !rec.contains("rule_id") || !rec["rule_id"].is_string() ||
        !rec.contains("verdicts") || !rec["verdicts"].is_array())
      fail("malformed record " + fp);
    FeedbackRecord out;
    out.ruleId = rec["rule_id"].get<std::string>();
    for (const auto& v : rec["verdicts"]) {
      if (!v.is_object()) fail("malformed verdict in " + fp);
      auto kind = parseVerdict(v.value("verdict", ""));
      auto strategy = parseStrategy(v.value("strategy", ""));
      if (!kind || !strategy || !v.contains("at") || !v["at"].is_string())
        fail("malformed verdict in " + fp);
      out.verdicts.push_back({*kind, *strategy, v["at"].get<std::string>()});
    }
    store.records.emplace(fp, std::move(out));
  }
  return store;
}

FeedbackStore loadStore(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(path, ec)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreCorrupt(path, "cannot read file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return storeFromJson(buf.str());
  } catch (const std::exception& e) {
    fs::path backup = path;
    backup += ".bad";
    fs::copy_file(path, backup, fs::copy_options::overwrite_existing, ec);
    throw StoreCorrupt(path, e.what());
  }
}

void saveStore(const FeedbackStore& store, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << toJson(store);
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string isoTimestamp(std::chrono::system_clock::time_point t) {
  std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace cryptomate
