#include "cryptomate/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <tuple>

namespace cryptomate {

std::string_view toString(Strategy s) {
  switch (s) {
    case Strategy::S0: return "S0";
    case Strategy::S1: return "S1";
    case Strategy::S2: return "S2";
  }
  return "S0";
}

std::string_view toString(Certainty c) { return c == Certainty::Definite ? "Definite" : "Possible"; }

std::string_view toString(FindingKind k) {
  switch (k) {
    case FindingKind::IllegalTransition: return "IllegalTransition";
    case FindingKind::IncompleteLifecycle: return "IncompleteLifecycle";
    case FindingKind::ConstraintViolation: return "ConstraintViolation";
  }
  return "IllegalTransition";
}

std::optional<Strategy> parseStrategy(std::string_view s) {
  if (s == "S0") return Strategy::S0;
  if (s == "S1") return Strategy::S1;
  if (s == "S2") return Strategy::S2;
  return std::nullopt;
}

bool findingLess(const Finding& a, const Finding& b) {
  return std::tie(a.location, a.ruleId, a.kind, a.objectVar, a.contextVars) <
         std::tie(b.location, b.ruleId, b.kind, b.objectVar, b.contextVars);
}

void sortFindings(std::vector<Finding>& fs) { std::stable_sort(fs.begin(), fs.end(), findingLess); }

namespace {

// Mapped events of one object, in call-site order.
struct Event {
  size_t site;  // index into obj.callSites
  int label;    // DFA label index, -1 for an unmapped constructor
  bool isConstructor;
};

struct EventIndex {
  std::map<int, std::vector<Event>> byNode;
  size_t mappedCount = 0;
  std::string lastMethod;  // method of the last mapped call, for {method}
};

EventIndex indexEvents(const TrackedObject& obj, const CompiledRule& rule) {
  EventIndex idx;
  idx.lastMethod = obj.className;
  for (size_t k = 0; k < obj.callSites.size(); ++k) {
    const CallSite& cs = obj.callSites[k];
    auto label = rule.rule.labelFor(cs.method, cs.isConstructor, cs.args.size());
    int li = label ? *rule.dfa.labelIndex(*label) : -1;
    if (label) {
      ++idx.mappedCount;
      idx.lastMethod = cs.method;
    }
    if (label || cs.isConstructor) idx.byNode[cs.node].push_back({k, li, cs.isConstructor});
  }
  return idx;
}

Finding makeFinding(const AnalysisContext& ctx, const TrackedObject& obj, const CompiledRule& rule,
                    FindingKind kind, Strategy s, Certainty c, const syntax::SourceRange& loc,
                    const std::string& method) {
  Finding f;
  f.ruleId = rule.rule.id;
  f.kind = kind;
  f.file = ctx.file;
  f.methodName = ctx.cfg ? ctx.cfg->methodName : std::string{};
  f.objectVar = obj.primaryName;
  f.location = loc;
  f.strategy = s;
  f.certainty = c;
  f.baseConfidence = baseConfidence(s, c, kind);
  f.contextVars["obj"] = obj.primaryName;
  f.contextVars["method"] = method;
  f.contextVars["class"] = rule.rule.className;
  return f;
}

using States = std::set<int>;

}  // namespace

std::vector<Finding> runS0(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule) {
  std::vector<Finding> out;
  EventIndex idx = indexEvents(obj, rule);
  if (idx.mappedCount == 0) return out;
  std::set<std::string> seen;
  for (const auto& cs : obj.callSites)
    if (auto l = rule.rule.labelFor(cs.method, cs.isConstructor, cs.args.size())) seen.insert(*l);
  for (const auto& required : rule.dfa.requiredLabels) {
    if (seen.count(required)) continue;
    out.push_back(makeFinding(ctx, obj, rule, FindingKind::IncompleteLifecycle, Strategy::S0,
                              Certainty::Possible, obj.declRange, idx.lastMethod));
    out.back().contextVars["missing"] = rule.rule.events.at(required).name;
  }
  return out;
}

std::vector<Finding> runS1(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule) {
  std::vector<Finding> out;
  const Cfg& cfg = *ctx.cfg;
  const Dfa& dfa = rule.dfa;
  EventIndex idx = indexEvents(obj, rule);
  if (idx.mappedCount == 0) return out;

  auto transfer = [&](int node, States s) {
    auto it = idx.byNode.find(node);
    if (it == idx.byNode.end()) return s;
    for (const Event& ev : it->second) {
      if (ev.isConstructor) {
        s = {dfa.start};
        if (ev.label >= 0) s = {dfa.step(dfa.start, ev.label)};
        continue;
      }
      States next;
      for (int q : s) next.insert(q == dfa.dead ? q : dfa.step(q, ev.label));
      s = std::move(next);
    }
    return s;
  };

  const size_t n = cfg.nodes.size();
  std::vector<States> in(n), outSets(n);
  std::vector<int> worklist;
  for (size_t k = 0; k < n; ++k) worklist.push_back(static_cast<int>(k));
  std::vector<bool> queued(n, true);
  std::vector<std::vector<int>> succ(n), pred(n);
  for (const auto& e : cfg.edges) {
    succ[e.from].push_back(e.to);
    pred[e.to].push_back(e.from);
  }
  // Process in reverse so that pop_back visits low ids (source order) first.
  std::reverse(worklist.begin(), worklist.end());
  while (!worklist.empty()) {
    int node = worklist.back();
    worklist.pop_back();
    queued[node] = false;
    States merged;
    for (int p : pred[node]) merged.insert(outSets[p].begin(), outSets[p].end());
    in[node] = merged;
    States result = transfer(node, std::move(merged));
    if (result != outSets[node]) {
      outSets[node] = std::move(result);
      for (int s : succ[node])
        if (!queued[s]) {
          queued[s] = true;
          worklist.push_back(s);
        }
    }
  }

  // Violations are read off the fixpoint, not intermediate iterations.
  for (const auto& [node, events] : idx.byNode) {
    States s = in[node];
    for (const Event& ev : events) {
      if (ev.isConstructor) {
        s = {ev.label >= 0 ? dfa.step(dfa.start, ev.label) : dfa.start};
        continue;
      }
      States next;
      size_t live = 0, dying = 0;
      bool hadDead = false;
      for (int q : s) {
        if (q == dfa.dead) {
          hadDead = true;
          next.insert(q);
          continue;
        }
        ++live;
        int t = dfa.step(q, ev.label);
        if (t == dfa.dead) ++dying;
        next.insert(t);
      }
      if (dying > 0) {
        const CallSite& cs = obj.callSites[ev.site];
        Certainty c = dying == live && !hadDead ? Certainty::Definite : Certainty::Possible;
        out.push_back(makeFinding(ctx, obj, rule, FindingKind::IllegalTransition, Strategy::S1, c,
                                  cs.range, cs.method));
      }
      s = std::move(next);
    }
  }

  const States& atExit = in[cfg.exit()];
  bool anyLive = false, anyAccepting = false;
  for (int q : atExit) {
    if (q == dfa.dead) continue;
    anyLive = true;
    anyAccepting = anyAccepting || dfa.isAccepting(q);
  }
  if (anyLive && !anyAccepting) {
    Certainty c = atExit.size() == 1 ? Certainty::Definite : Certainty::Possible;
    out.push_back(makeFinding(ctx, obj, rule, FindingKind::IncompleteLifecycle, Strategy::S1, c,
                              obj.declRange, idx.lastMethod));
  }
  sortFindings(out);
  return out;
}

std::vector<Finding> runS2(const AnalysisContext& ctx, const TrackedObject& obj,
                           const CompiledRule& rule, int pathBound) {
  std::vector<Finding> out;
  const Cfg& cfg = *ctx.cfg;
  const Dfa& dfa = rule.dfa;
  EventIndex idx = indexEvents(obj, rule);
  if (idx.mappedCount == 0) return out;
  if (pathBound < 1) pathBound = 1;

  struct SiteStats {
    int through = 0;
    int violated = 0;
  };
  std::map<size_t, SiteStats> sites;
  int allocPaths = 0, incompletePaths = 0, paths = 0;
  bool truncated = false;

  auto evaluate = [&](const std::vector<int>& path) {
    constexpr int kAbsent = -1;
    int state = kAbsent;
    std::set<size_t> through, violated;
    for (int node : path) {
      auto it = idx.byNode.find(node);
      if (it == idx.byNode.end()) continue;
      for (const Event& ev : it->second) {
        if (ev.isConstructor) {
          state = ev.label >= 0 ? dfa.step(dfa.start, ev.label) : dfa.start;
          continue;
        }
        if (state == kAbsent) continue;
        through.insert(ev.site);
        if (state == dfa.dead) continue;
        state = dfa.step(state, ev.label);
        if (state == dfa.dead) violated.insert(ev.site);
      }
    }
    for (size_t s : through) ++sites[s].through;
    for (size_t s : violated) ++sites[s].violated;
    if (state != kAbsent) {
      ++allocPaths;
      if (state != dfa.dead && !dfa.isAccepting(state)) ++incompletePaths;
    }
  };

  std::vector<int> loopCount(cfg.nodes.size(), 0);
  std::vector<int> path;
  std::vector<std::vector<CfgEdge>> succ(cfg.nodes.size());
  for (size_t k = 0; k < cfg.nodes.size(); ++k) succ[k] = cfg.successors(static_cast<int>(k));

  // Returns false once enumeration must stop.
  std::function<bool(int)> dfs = [&](int node) {
    path.push_back(node);
    if (node == cfg.exit()) {
      if (paths == pathBound) {
        truncated = true;
        path.pop_back();
        return false;
      }
      ++paths;
      evaluate(path);
      path.pop_back();
      return true;
    }
    bool isHeader = cfg.nodes[node].kind == NodeKind::LoopHeader;
    for (const CfgEdge& e : succ[node]) {
      if (isHeader && (e.label == EdgeLabel::Then || e.label == EdgeLabel::Loop) &&
          loopCount[node] > 0)
        continue;
      bool backEdge = e.label == EdgeLabel::Loop;
      if (backEdge) ++loopCount[e.to];
      bool keepGoing = dfs(e.to);
      if (backEdge) --loopCount[e.to];
      if (!keepGoing) {
        path.pop_back();
        return false;
      }
    }
    path.pop_back();
    return true;
  };
  dfs(cfg.entry());

  for (const auto& [site, st] : sites) {
    if (st.violated == 0) continue;
    const CallSite& cs = obj.callSites[site];
    Certainty c = st.violated == st.through && !truncated ? Certainty::Definite : Certainty::Possible;
    out.push_back(makeFinding(ctx, obj, rule, FindingKind::IllegalTransition, Strategy::S2, c,
                              cs.range, cs.method));
    out.back().truncated = truncated;
  }
  if (incompletePaths > 0) {
    Certainty c =
        incompletePaths == allocPaths && !truncated ? Certainty::Definite : Certainty::Possible;
    out.push_back(makeFinding(ctx, obj, rule, FindingKind::IncompleteLifecycle, Strategy::S2, c,
                              obj.declRange, idx.lastMethod));
    out.back().truncated = truncated;
  }
  sortFindings(out);
  return out;
}

std::vector<Finding> runStrategy(Strategy s, const AnalysisContext& ctx, const TrackedObject& obj,
                                 const CompiledRule& rule, int pathBound) {
  switch (s) {
    case Strategy::S0: return runS0(ctx, obj, rule);
    case Strategy::S1: return runS1(ctx, obj, rule);
    case Strategy::S2: return runS2(ctx, obj, rule, pathBound);
  }
  return {};
}

std::optional<syntax::Expr> resolveLiteral(const syntax::Expr& arg, const Cfg& cfg) {
  using syntax::ExprKind;
  if (arg.kind == ExprKind::IntLit || arg.kind == ExprKind::StringLit ||
      arg.kind == ExprKind::BoolLit)
    return arg;
  if (arg.kind != ExprKind::VarRef) return std::nullopt;
  const syntax::Expr* only = nullptr;
  int assignments = 0;
  for (const auto& n : cfg.nodes) {
    if (!n.stmt || n.stmt->name != arg.name || !n.stmt->expr) continue;
    if (n.stmt->kind != syntax::StmtKind::VarDecl && n.stmt->kind != syntax::StmtKind::Assign)
      continue;
    ++assignments;
    only = &*n.stmt->expr;
  }
  if (assignments != 1) return std::nullopt;
  if (only->kind == ExprKind::IntLit || only->kind == ExprKind::StringLit ||
      only->kind == ExprKind::BoolLit)
    return *only;
  return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Algorithm names compare case-insensitively, either whole or by the part
// before the first '/', so "DES" also matches "des/CBC/PKCS5Padding".
bool algorithmMatches(const std::string& value, const std::string& listed) {
  std::string v = lower(value), l = lower(listed);
  if (v == l) return true;
  auto slash = v.find('/');
  return slash != std::string::npos && v.substr(0, slash) == l;
}

}  // namespace

std::vector<Finding> checkConstraints(const AnalysisContext& ctx, const TrackedObject& obj,
                                      const CompiledRule& rule, Strategy label) {
  std::vector<Finding> out;
  if (rule.rule.constraints.empty()) return out;
  for (const CallSite& cs : obj.callSites) {
    auto ev = rule.rule.labelFor(cs.method, cs.isConstructor, cs.args.size());
    if (!ev) continue;
    for (const auto& spec : rule.rule.constraints) {
      if (spec.event != *ev || static_cast<size_t>(spec.arg) >= cs.args.size()) continue;
      auto lit = resolveLiteral(cs.args[spec.arg], *ctx.cfg);
      std::optional<Certainty> verdict;
      if (!lit) {
        verdict = Certainty::Possible;
      } else if (spec.check == CheckKind::IntMin) {
        auto min = std::get<std::int64_t>(spec.value);
        if (lit->kind != syntax::ExprKind::IntLit || lit->intValue < min) verdict = Certainty::Definite;
      } else {
        const auto& listed = std::get<std::vector<std::string>>(spec.value);
        if (lit->kind != syntax::ExprKind::StringLit) {
          verdict = Certainty::Definite;
        } else {
          bool hit = std::any_of(listed.begin(), listed.end(), [&](const std::string& l) {
            return algorithmMatches(lit->stringValue, l);
          });
          if (spec.check == CheckKind::StringDeny ? hit : !hit) verdict = Certainty::Definite;
        }
      }
      if (!verdict) continue;
      Finding f = makeFinding(ctx, obj, rule, FindingKind::ConstraintViolation, label, *verdict,
                              cs.range, cs.method);
      if (lit) f.contextVars["arg"] = lit->literalText();
      out.push_back(std::move(f));
    }
  }
  sortFindings(out);
  return out;
}

}  // namespace cryptomate
