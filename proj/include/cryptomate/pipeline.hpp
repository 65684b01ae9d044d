// One document from source text to prioritized notifications. Shared by the
// command line and the language server so both report the same findings.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cryptomate/notify.hpp"
#include "cryptomate/scheduler.hpp"
#include "cryptomate/syntax.hpp"
#include "json.hpp"

namespace cryptomate {

struct Diagnostic {
  int line = 1;
  int col = 1;
  std::string message;
};

struct DocumentAnalysis {
  std::string file;
  /// Lex and parse problems. Methods before the first parse error are still
  /// analyzed; a lex error leaves nothing to analyze.
  std::vector<Diagnostic> syntaxErrors;
  std::vector<Notification> notifications;  // location order, prioritized within a range
  ScheduleResult schedule;

  bool hasSyntaxErrors() const { return !syntaxErrors.empty(); }
};

/// Builds CFGs and tracked objects for every method that parsed.
AnalysisUnit buildUnit(const std::string& file, const syntax::CompilationUnit& cu);

DocumentAnalysis analyzeDocument(const std::string& file, std::string_view source,
                                 const RuleSet& rules, const AnalysisConfig& config,
                                 const CostModel& cost, const FeedbackStore& stats);

/// Location, then severity, confidence and rule id within one range.
void sortNotifications(std::vector<Notification>& ns);

/// One element of the "findings" array of the JSON report. Field order is
/// part of the output format.
nlohmann::ordered_json findingJson(const Notification& n);

/// {"version":1,"findings":[...]}
nlohmann::ordered_json findingsReport(const std::vector<Notification>& ns);

}  // namespace cryptomate
