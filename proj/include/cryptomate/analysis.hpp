// Typestate strategies and argument-constraint checks for one
// (tracked object, rule) pair.
//
//   S0  required-label presence; ignores call order
//   S1  forward dataflow over the CFG, lattice = sets of DFA states
//   S2  bounded path enumeration, loops unrolled at most once
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cryptomate/cfg.hpp"
#include "cryptomate/objects.hpp"
#include "cryptomate/rules.hpp"

namespace cryptomate {

enum class Strategy { S0 = 0, S1 = 1, S2 = 2 };
enum class Certainty { Definite, Possible };
enum class FindingKind { IllegalTransition, IncompleteLifecycle, ConstraintViolation };

std::string_view toString(Strategy s);
std::string_view toString(Certainty c);
std::string_view toString(FindingKind k);
std::optional<Strategy> parseStrategy(std::string_view s);

/// The calibrated confidence of a raw finding. Kept in one place so the
/// numbers can be re-tuned without touching the strategies.
double baseConfidence(Strategy s, Certainty c, FindingKind k);

/// Highest confidence a strategy can produce for typestate findings.
double bestTypestateConfidence(Strategy s);

inline constexpr int kDefaultPathBound = 64;

struct Finding {
  std::string ruleId;
  FindingKind kind = FindingKind::IllegalTransition;
  std::string file;
  std::string methodName;
  std::string objectVar;
  syntax::SourceRange location;
  Strategy strategy = Strategy::S0;
  Certainty certainty = Certainty::Possible;
  double baseConfidence = 0.0;
  /// Template values: obj, method, class and (when resolvable) arg.
  std::map<std::string, std::string> contextVars;
  /// Set by S2 when path enumeration stopped at the bound.
  bool truncated = false;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Order used everywhere findings are listed: location, rule id, kind.
bool findingLess(const Finding& a, const Finding& b);
void sortFindings(std::vector<Finding>& fs);

/// Identifies the code under analysis for labelling findings.
struct AnalysisContext {
  std::string file;
  const Cfg* cfg = nullptr;
};

std::vector<Finding> runS0(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule);
std::vector<Finding> runS1(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule);
std::vector<Finding> runS2(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule, int pathBound = kDefaultPathBound);
std::vector<Finding> runStrategy(Strategy s, const AnalysisContext& ctx, const TrackedObject& obj,
                                 const CompiledRule& rule, int pathBound = kDefaultPathBound);

/// Resolves call arguments to literals by light constant propagation: a
/// literal, or a variable assigned exactly once in the method, to a literal.
std::optional<syntax::Expr> resolveLiteral(const syntax::Expr& arg, const Cfg& cfg);

std::vector<Finding> checkConstraints(const AnalysisContext& ctx, const TrackedObject& obj,
                                      const CompiledRule& rule, Strategy label = Strategy::S0);

}  // namespace cryptomate
