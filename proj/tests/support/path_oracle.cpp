#include "support/path_oracle.hpp"

namespace cmtest {

using namespace cryptomate::syntax;

namespace {

struct Ev {
  std::string label;
  int line;
};

struct Trace {
  std::vector<Ev> events;
  bool returned = false;
};

std::vector<Trace> walk(const std::vector<Stmt>& body, const OracleEvents& spec);

std::vector<Trace> walkStmt(const Stmt& s, const OracleEvents& spec) {
  switch (s.kind) {
    case StmtKind::VarDecl:
      if (s.name == spec.variable && s.expr && s.expr->kind == ExprKind::New)
        return {{{{spec.ctorLabel, s.expr->range.line}}, false}};
      return {{}};
    case StmtKind::ExprStmt: {
      const Expr& e = *s.expr;
      if (e.kind == ExprKind::MethodCall && e.name == spec.variable) {
        auto it = spec.labels.find(e.method);
        if (it != spec.labels.end()) return {{{{it->second, e.range.line}}, false}};
      }
      return {{}};
    }
    case StmtKind::Return: return {{{}, true}};
    case StmtKind::If: {
      auto out = walk(s.body, spec);
      auto other = walk(s.elseBody, spec);
      out.insert(out.end(), other.begin(), other.end());
      return out;
    }
    case StmtKind::While: {
      auto out = walk(s.body, spec);
      out.insert(out.begin(), Trace{});
      return out;
    }
    default: return {{}};
  }
}

std::vector<Trace> walk(const std::vector<Stmt>& body, const OracleEvents& spec) {
  std::vector<Trace> traces{Trace{}};
  for (const Stmt& s : body) {
    std::vector<Trace> next;
    auto alternatives = walkStmt(s, spec);
    for (const Trace& t : traces) {
      if (t.returned) {
        next.push_back(t);
        continue;
      }
      for (const Trace& a : alternatives) {
        Trace joined = t;
        joined.events.insert(joined.events.end(), a.events.begin(), a.events.end());
        joined.returned = a.returned;
        next.push_back(std::move(joined));
      }
    }
    traces = std::move(next);
  }
  return traces;
}

}  // namespace

std::set<OracleFinding> oracleFindings(const MethodDecl& m, const ReP& order, const OracleEvents& events) {
  struct Site {
    int through = 0;
    int violated = 0;
  };
  std::map<int, Site> sites;
  int allocated = 0, incomplete = 0;

  for (const Trace& t : walk(m.body, events)) {
    bool exists = false;
    bool dead = false;
    ReP cur;
    for (const Ev& e : t.events) {
      if (e.label == events.ctorLabel) {
        // The allocation starts a fresh word.
        exists = true;
        dead = false;
        cur = derive(order, e.label);
        if (isVoid(cur)) dead = true;
        continue;
      }
      if (!exists) continue;
      ++sites[e.line].through;
      if (dead) continue;
      cur = derive(cur, e.label);
      if (isVoid(cur)) {
        dead = true;
        ++sites[e.line].violated;
      }
    }
    if (exists) {
      ++allocated;
      if (!dead && !nullable(cur)) ++incomplete;
    }
  }

  std::set<OracleFinding> out;
  for (const auto& [line, s] : sites)
    if (s.violated > 0)
      out.insert({"IllegalTransition", s.violated == s.through ? "Definite" : "Possible", line});
  if (incomplete > 0) {
    int declLine = 0;
    for (const Stmt& s : m.body)
      if (s.kind == StmtKind::VarDecl && s.name == events.variable) {
        declLine = s.range.line;
        break;
      }
    out.insert({"IncompleteLifecycle", incomplete == allocated ? "Definite" : "Possible", declLine});
  }
  return out;
}

}  // namespace cmtest
