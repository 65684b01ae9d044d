// Per-method control-flow graphs.
//
// Node layout: one Entry, one Exit, one node per simple statement
// (VarDecl, Assign, ExprStmt, Return), one Branch node per `if` condition,
// one Join node per `if` whose branches fall through, and one LoopHeader per
// `while`. An if/else with one statement in each branch therefore has six
// nodes: entry, branch, then, else, join, exit.
//
// Statements that follow a `return` in the same block are unreachable and get
// no node, so every node is reachable from Entry and reaches Exit.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cryptomate/syntax.hpp"

namespace cryptomate {

enum class NodeKind { Entry, Exit, Statement, Branch, Join, LoopHeader };

enum class EdgeLabel { Normal, Then, Else, Loop };

struct CfgNode {
  int id = 0;
  NodeKind kind = NodeKind::Statement;
  /// Copy of the simple statement for Statement nodes.
  std::optional<syntax::Stmt> stmt;
  /// Condition expression for Branch and LoopHeader nodes.
  std::optional<syntax::Expr> condition;
  syntax::SourceRange range;
};

struct CfgEdge {
  int from = 0;
  int to = 0;
  EdgeLabel label = EdgeLabel::Normal;

  friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

class Cfg {
 public:
  std::string methodName;
  int closeBraceLine = 1;
  std::vector<CfgNode> nodes;
  std::vector<CfgEdge> edges;

  int entry() const { return 0; }
  int exit() const { return 1; }

  /// Outgoing edges of `node`, Then before Else, in insertion order otherwise.
  std::vector<CfgEdge> successors(int node) const;
  std::vector<CfgEdge> predecessors(int node) const;

  /// Expressions evaluated at `node` (statement expression or condition).
  const syntax::Expr* expression(int node) const;
};

Cfg buildCfg(const syntax::MethodDecl& method);

}  // namespace cryptomate
