// Adaptive strategy selection under a time budget.
//
// Every (rule, tracked object) pair is analyzed at least at S0. The initial
// strategy for a pair is the cheapest one whose best achievable confidence,
// discounted by the recorded false-positive rate for (rule, strategy), meets
// the configured minimum. Findings that remain below minimum + margin are
// re-run one level higher while the estimated budget allows.
//
// Budget accounting uses a snapshot of the cost model, never wall time, so a
// run is a pure function of its inputs. Both the initial upgrades and the
// escalations are taken as the longest prefix of a fixed, budget-independent
// sequence of steps; a larger budget therefore never lowers any pair's
// strategy.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cryptomate/analysis.hpp"
#include "cryptomate/feedback.hpp"
#include "cryptomate/rules.hpp"

namespace cryptomate {

struct AnalysisConfig {
  int budgetMs = 500;
  double minConfidence = 0.50;
  double escalationMargin = 0.10;
  int pathBound = kDefaultPathBound;

  /// Throws std::invalid_argument when budgetMs <= 0 or minConfidence is
  /// outside [0, 1].
  void validate() const;
};

class CostModel {
 public:
  static constexpr double kAlpha = 0.3;
  static constexpr double kFloorMs = 0.1;
  static double seedMs(Strategy s);

  double estimate(const std::string& ruleId, Strategy s) const;
  /// avg <- alpha * elapsed + (1 - alpha) * avg, clamped at kFloorMs.
  void record(const std::string& ruleId, Strategy s, double elapsedMs);

 private:
  std::map<std::pair<std::string, Strategy>, double> movingAvg_;
};

CostModel recordCost(CostModel cost, const std::string& ruleId, Strategy s, double elapsedMs);

/// base confidence x (1 - smoothed FP rate of (rule, strategy)).
double effectiveConfidence(const Finding& f, const FeedbackStore& stats);

/// The methods of one document, ready for analysis.
struct AnalysisUnit {
  std::string file;
  std::vector<Cfg> cfgs;
  std::vector<std::vector<TrackedObject>> objects;  // parallel to cfgs
};

struct Task {
  std::string ruleId;
  size_t method = 0;
  size_t object = 0;
  Severity severity = Severity::Error;
  Strategy preferred = Strategy::S0;  // choice with unlimited budget
  Strategy strategy = Strategy::S0;   // planned
  double estimatedMs = 0.0;           // of the planned strategy
};

struct Plan {
  std::vector<Task> tasks;
  double estimatedMs = 0.0;
  /// Even S0 for every pair exceeds the budget; S0 is planned anyway.
  bool overBudget = false;
  /// Some pair was planned below its preferred strategy.
  bool truncated = false;
};

Strategy initialStrategy(const std::string& ruleId, const AnalysisConfig& config,
                         const FeedbackStore& stats);

Plan planInitial(const RuleSet& rules, const AnalysisUnit& unit, const AnalysisConfig& config,
                 const CostModel& cost, const FeedbackStore& stats);

struct EscalationDecision {
  bool rerun = false;
  Strategy next = Strategy::S0;
};

/// Precondition: f.strategy < S2.
EscalationDecision escalate(const Finding& f, double remainingMs, const AnalysisConfig& config,
                            const CostModel& cost, const FeedbackStore& stats);

struct EscalationStep {
  Strategy from = Strategy::S0;
  Strategy to = Strategy::S0;
  std::vector<Finding> before;
  std::vector<Finding> after;
  /// A rerun whose findings are less confident than the ones it would
  /// replace is discarded.
  bool accepted = false;
};

struct PairOutcome {
  Task task;
  Strategy finalStrategy = Strategy::S0;
  std::vector<Finding> findings;  // typestate findings then constraint findings
  std::vector<EscalationStep> escalations;
};

struct CostSample {
  std::string ruleId;
  Strategy strategy;
  double elapsedMs;
};

struct ScheduleResult {
  std::vector<Finding> findings;  // sorted
  std::vector<PairOutcome> pairs;  // plan order
  Plan plan;
  double estimatedSpentMs = 0.0;
  std::vector<CostSample> samples;  // measured run times, for the cost model
};

ScheduleResult runSchedule(const RuleSet& rules, const AnalysisUnit& unit,
                           const AnalysisConfig& config, const CostModel& cost,
                           const FeedbackStore& stats);

}  // namespace cryptomate
