#include "cryptomate/pipeline.hpp"

#include <algorithm>
#include <tuple>

#include "cryptomate/cfg.hpp"
#include "cryptomate/objects.hpp"

namespace cryptomate {

AnalysisUnit buildUnit(const std::string& file, const syntax::CompilationUnit& cu) {
  AnalysisUnit unit;
  unit.file = file;
  unit.cfgs.reserve(cu.methods.size());
  for (const auto& m : cu.methods) unit.cfgs.push_back(buildCfg(m));
  for (const auto& cfg : unit.cfgs) unit.objects.push_back(extractObjects(cfg));
  return unit;
}

void sortNotifications(std::vector<Notification>& ns) {
  std::stable_sort(ns.begin(), ns.end(), [](const Notification& a, const Notification& b) {
    const auto& la = a.finding.location;
    const auto& lb = b.finding.location;
    if (la != lb) return la < lb;
    if (notificationBefore(a, b)) return true;
    if (notificationBefore(b, a)) return false;
    return findingLess(a.finding, b.finding);
  });
}

DocumentAnalysis analyzeDocument(const std::string& file, std::string_view source,
                                 const RuleSet& rules, const AnalysisConfig& config,
                                 const CostModel& cost, const FeedbackStore& stats) {
  DocumentAnalysis out;
  out.file = file;
  syntax::ParseResult parsed;
  try {
    parsed = syntax::parseSource(source, file);
  } catch (const syntax::LexError& e) {
    out.syntaxErrors.push_back({e.line(), e.col(), e.what()});
    return out;
  }
  for (const auto& err : parsed.errors) out.syntaxErrors.push_back({err.line, err.col, err.message()});

  AnalysisUnit unit = buildUnit(file, parsed.unit);
  out.schedule = runSchedule(rules, unit, config, cost, stats);

  std::vector<Notification> ns;
  ns.reserve(out.schedule.findings.size());
  for (const Finding& f : out.schedule.findings) {
    const CompiledRule* rule = rules.find(f.ruleId);
    if (!rule) continue;
    Notification n = renderNotification(f, rule->rule);
    n.effectiveConfidence = effectiveConfidence(f, stats);
    n.quickfix = buildQuickfix(f, rule->rule, source);
    ns.push_back(std::move(n));
  }
  ns = applySuppressions(std::move(ns), source, stats);
  sortNotifications(ns);
  out.notifications = std::move(ns);
  return out;
}

nlohmann::ordered_json findingJson(const Notification& n) {
  const Finding& f = n.finding;
  nlohmann::ordered_json j;
  j["rule_id"] = f.ruleId;
  j["file"] = f.file;
  j["line"] = f.location.line;
  j["col"] = f.location.col;
  j["end_line"] = f.location.endLine;
  j["end_col"] = f.location.endCol;
  j["kind"] = toString(f.kind);
  j["severity"] = toString(n.severity);
  j["strategy"] = toString(f.strategy);
  j["certainty"] = toString(f.certainty);
  j["confidence"] = n.effectiveConfidence;
  j["message"] = n.title;
  j["fingerprint"] = n.fingerprint.hex();
  j["suppressed"] = n.suppressed;
  return j;
}

nlohmann::ordered_json findingsReport(const std::vector<Notification>& ns) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& n : ns) arr.push_back(findingJson(n));
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["findings"] = std::move(arr);
  return doc;
}

}  // namespace cryptomate
