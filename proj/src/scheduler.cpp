#include "cryptomate/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <stdexcept>
#include <tuple>

namespace cryptomate {

void AnalysisConfig::validate() const {
  if (budgetMs <= 0) throw std::invalid_argument("budget_ms must be positive");
  if (!(minConfidence >= 0.0 && minConfidence <= 1.0))
    throw std::invalid_argument("min_confidence must be within [0, 1]");
  if (pathBound < 1) throw std::invalid_argument("path bound must be at least 1");
}

double CostModel::seedMs(Strategy s) {
  switch (s) {
    case Strategy::S0: return 1.0;
    case Strategy::S1: return 5.0;
    case Strategy::S2: return 25.0;
  }
  return 25.0;
}

double CostModel::estimate(const std::string& ruleId, Strategy s) const {
  auto it = movingAvg_.find({ruleId, s});
  return it == movingAvg_.end() ? seedMs(s) : it->second;
}

void CostModel::record(const std::string& ruleId, Strategy s, double elapsedMs) {
  double prev = estimate(ruleId, s);
  double next = kAlpha * std::max(0.0, elapsedMs) + (1.0 - kAlpha) * prev;
  movingAvg_[{ruleId, s}] = std::max(kFloorMs, next);
}

CostModel recordCost(CostModel cost, const std::string& ruleId, Strategy s, double elapsedMs) {
  cost.record(ruleId, s, elapsedMs);
  return cost;
}

double effectiveConfidence(const Finding& f, const FeedbackStore& stats) {
  double v = f.baseConfidence * (1.0 - stats.fpRate(f.ruleId, f.strategy));
  return std::clamp(v, 0.0, 1.0);
}

Strategy initialStrategy(const std::string& ruleId, const AnalysisConfig& config,
                         const FeedbackStore& stats) {
  for (Strategy s : {Strategy::S0, Strategy::S1, Strategy::S2}) {
    double eff = bestTypestateConfidence(s) * (1.0 - stats.fpRate(ruleId, s));
    if (eff >= config.minConfidence) return s;
  }
  return Strategy::S2;
}

namespace {

int severityRank(Severity s) {
  switch (s) {
    case Severity::Error: return 0;
    case Severity::Warning: return 1;
    case Severity::Info: return 2;
  }
  return 3;
}

Strategy nextStrategy(Strategy s) {
  return s == Strategy::S0 ? Strategy::S1 : Strategy::S2;
}

bool isTypestate(const Finding& f) { return f.kind != FindingKind::ConstraintViolation; }

}  // namespace

Plan planInitial(const RuleSet& rules, const AnalysisUnit& unit, const AnalysisConfig& config,
                 const CostModel& cost, const FeedbackStore& stats) {
  Plan plan;
  for (size_t m = 0; m < unit.objects.size(); ++m) {
    for (size_t o = 0; o < unit.objects[m].size(); ++o) {
      for (const auto& r : rules.rules) {
        if (r.rule.className != unit.objects[m][o].className) continue;
        Task t;
        t.ruleId = r.rule.id;
        t.method = m;
        t.object = o;
        t.severity = r.rule.severity;
        t.preferred = initialStrategy(r.rule.id, config, stats);
        plan.tasks.push_back(std::move(t));
      }
    }
  }
  std::stable_sort(plan.tasks.begin(), plan.tasks.end(), [&](const Task& a, const Task& b) {
    auto key = [&](const Task& t) {
      return std::make_tuple(severityRank(t.severity), cost.estimate(t.ruleId, t.preferred), t.method,
                             t.object, t.ruleId);
    };
    return key(a) < key(b);
  });

  double floor = 0.0;
  for (auto& t : plan.tasks) {
    t.strategy = Strategy::S0;
    t.estimatedMs = cost.estimate(t.ruleId, Strategy::S0);
    floor += t.estimatedMs;
  }
  plan.overBudget = floor > config.budgetMs;

  double running = floor;
  bool stopped = false;
  for (auto& t : plan.tasks) {
    if (t.preferred == Strategy::S0) continue;
    double target = cost.estimate(t.ruleId, t.preferred);
    if (!stopped && running - t.estimatedMs + target <= config.budgetMs) {
      running += target - t.estimatedMs;
      t.strategy = t.preferred;
      t.estimatedMs = target;
    } else {
      stopped = true;
      plan.truncated = true;
    }
  }
  plan.estimatedMs = running;
  return plan;
}

namespace {
bool wantsEscalation(const Finding& f, const AnalysisConfig& config, const FeedbackStore& stats) {
  return f.strategy != Strategy::S2 && isTypestate(f) &&
         effectiveConfidence(f, stats) < config.minConfidence + config.escalationMargin;
}
}  // namespace

EscalationDecision escalate(const Finding& f, double remainingMs, const AnalysisConfig& config,
                            const CostModel& cost, const FeedbackStore& stats) {
  if (f.strategy == Strategy::S2) return {};
  Strategy next = nextStrategy(f.strategy);
  if (wantsEscalation(f, config, stats) && cost.estimate(f.ruleId, next) <= remainingMs)
    return {true, next};
  return {false, next};
}

ScheduleResult runSchedule(const RuleSet& rules, const AnalysisUnit& unit,
                           const AnalysisConfig& config, const CostModel& cost,
                           const FeedbackStore& stats) {
  ScheduleResult result;
  result.plan = planInitial(rules, unit, config, cost, stats);

  auto execute = [&](const Task& t, Strategy s) {
    const CompiledRule& rule = *rules.find(t.ruleId);
    AnalysisContext ctx{unit.file, &unit.cfgs[t.method]};
    auto start = std::chrono::steady_clock::now();
    auto fs = runStrategy(s, ctx, unit.objects[t.method][t.object], rule, config.pathBound);
    std::chrono::duration<double, std::milli> took = std::chrono::steady_clock::now() - start;
    result.samples.push_back({t.ruleId, s, took.count()});
    return fs;
  };

  for (const Task& t : result.plan.tasks) {
    PairOutcome pair;
    pair.task = t;
    pair.finalStrategy = t.strategy;
    pair.findings = execute(t, t.strategy);
    result.pairs.push_back(std::move(pair));
  }
  result.estimatedSpentMs = result.plan.estimatedMs;

  // Escalation only starts once every pair got its preferred strategy.
  if (!result.plan.truncated) {
    double remaining = config.budgetMs - result.plan.estimatedMs;
    bool budgetExhausted = false;
    for (PairOutcome& pair : result.pairs) {
      if (budgetExhausted) break;
      while (pair.finalStrategy != Strategy::S2) {
        const Finding* trigger = nullptr;
        for (const Finding& f : pair.findings)
          if (wantsEscalation(f, config, stats) &&
              (!trigger || effectiveConfidence(f, stats) < effectiveConfidence(*trigger, stats)))
            trigger = &f;
        if (!trigger) break;
        EscalationDecision d = escalate(*trigger, remaining, config, cost, stats);
        if (!d.rerun) {
          budgetExhausted = true;
          break;
        }
        double stepCost = cost.estimate(pair.task.ruleId, d.next);
        remaining -= stepCost;
        result.estimatedSpentMs += stepCost;

        EscalationStep step;
        step.from = pair.finalStrategy;
        step.to = d.next;
        step.before = pair.findings;
        step.after = execute(pair.task, d.next);
        double worstAfter = 1.0, bestBefore = 0.0;
        for (const auto& f : step.after) worstAfter = std::min(worstAfter, effectiveConfidence(f, stats));
        for (const auto& f : step.before)
          if (isTypestate(f)) bestBefore = std::max(bestBefore, effectiveConfidence(f, stats));
        step.accepted = step.after.empty() || worstAfter >= bestBefore;
        if (step.accepted) {
          pair.findings = step.after;
          pair.finalStrategy = d.next;
        }
        bool accepted = step.accepted;
        pair.escalations.push_back(std::move(step));
        if (!accepted) break;
      }
    }
  }

  for (PairOutcome& pair : result.pairs) {
    const CompiledRule& rule = *rules.find(pair.task.ruleId);
    AnalysisContext ctx{unit.file, &unit.cfgs[pair.task.method]};
    auto cv = checkConstraints(ctx, unit.objects[pair.task.method][pair.task.object], rule,
                               pair.finalStrategy);
    pair.findings.insert(pair.findings.end(), cv.begin(), cv.end());
    result.findings.insert(result.findings.end(), pair.findings.begin(), pair.findings.end());
  }
  sortFindings(result.findings);
  return result;
}

}  // namespace cryptomate
