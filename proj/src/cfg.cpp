#include "cryptomate/cfg.hpp"

#include <algorithm>

namespace cryptomate {

namespace {

struct Pending {
  int node;
  EdgeLabel label;
};

class Builder {
 public:
  explicit Builder(Cfg& g) : g_(g) {}

  int addNode(NodeKind kind, const syntax::SourceRange& range) {
    CfgNode n;
    n.id = static_cast<int>(g_.nodes.size());
    n.kind = kind;
    n.range = range;
    g_.nodes.push_back(std::move(n));
    return g_.nodes.back().id;
  }

  void connect(const std::vector<Pending>& from, int to) {
    for (const auto& p : from) g_.edges.push_back({p.node, to, p.label});
  }

  // Returns the fall-through frontier after `stmts`. An empty frontier means
  // control never leaves the block normally.
  std::vector<Pending> block(const std::vector<syntax::Stmt>& stmts, std::vector<Pending> frontier) {
    for (const auto& s : stmts) {
      if (frontier.empty()) break;
      frontier = statement(s, std::move(frontier));
    }
    return frontier;
  }

  std::vector<Pending> statement(const syntax::Stmt& s, std::vector<Pending> frontier) {
    using syntax::StmtKind;
    switch (s.kind) {
      case StmtKind::If: {
        int branch = addNode(NodeKind::Branch, s.expr ? s.expr->range : s.range);
        g_.nodes[branch].condition = s.expr;
        connect(frontier, branch);
        auto thenOut = block(s.body, {{branch, EdgeLabel::Then}});
        auto elseOut = s.hasElse ? block(s.elseBody, {{branch, EdgeLabel::Else}})
                                 : std::vector<Pending>{{branch, EdgeLabel::Else}};
        std::vector<Pending> merged = std::move(thenOut);
        merged.insert(merged.end(), elseOut.begin(), elseOut.end());
        if (merged.empty()) return {};
        int join = addNode(NodeKind::Join, {s.range.endLine, s.range.endCol, s.range.endLine,
                                            s.range.endCol});
        connect(merged, join);
        return {{join, EdgeLabel::Normal}};
      }
      case StmtKind::While: {
        int header = addNode(NodeKind::LoopHeader, s.expr ? s.expr->range : s.range);
        g_.nodes[header].condition = s.expr;
        connect(frontier, header);
        auto bodyOut = block(s.body, {{header, EdgeLabel::Then}});
        // An empty body yields a Loop self-edge on the header.
        for (const auto& p : bodyOut) g_.edges.push_back({p.node, header, EdgeLabel::Loop});
        return {{header, EdgeLabel::Else}};
      }
      case StmtKind::Return: {
        int n = addNode(NodeKind::Statement, s.range);
        g_.nodes[n].stmt = s;
        connect(frontier, n);
        g_.edges.push_back({n, g_.exit(), EdgeLabel::Normal});
        return {};
      }
      default: {
        int n = addNode(NodeKind::Statement, s.range);
        g_.nodes[n].stmt = s;
        connect(frontier, n);
        return {{n, EdgeLabel::Normal}};
      }
    }
  }

 private:
  Cfg& g_;
};

}  // namespace

std::vector<CfgEdge> Cfg::successors(int node) const {
  std::vector<CfgEdge> out;
  for (const auto& e : edges)
    if (e.from == node) out.push_back(e);
  std::stable_sort(out.begin(), out.end(), [](const CfgEdge& a, const CfgEdge& b) {
    auto rank = [](EdgeLabel l) { return l == EdgeLabel::Else ? 1 : 0; };
    return rank(a.label) < rank(b.label);
  });
  return out;
}

std::vector<CfgEdge> Cfg::predecessors(int node) const {
  std::vector<CfgEdge> out;
  for (const auto& e : edges)
    if (e.to == node) out.push_back(e);
  return out;
}

const syntax::Expr* Cfg::expression(int node) const {
  const CfgNode& n = nodes.at(node);
  if (n.condition) return &*n.condition;
  if (n.stmt && n.stmt->expr) return &*n.stmt->expr;
  return nullptr;
}

Cfg buildCfg(const syntax::MethodDecl& method) {
  Cfg g;
  g.methodName = method.name;
  g.closeBraceLine = method.closeBraceLine;
  Builder b(g);
  b.addNode(NodeKind::Entry, {method.range.line, method.range.col, method.range.line,
                              method.range.col});
  b.addNode(NodeKind::Exit, {method.closeBraceLine, 1, method.closeBraceLine, 1});
  auto out = b.block(method.body, {{g.entry(), EdgeLabel::Normal}});
  b.connect(out, g.exit());
  return g;
}

}  // namespace cryptomate
