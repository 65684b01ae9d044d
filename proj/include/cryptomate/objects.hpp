#pragma once

#include <string>
#include <vector>

#include "cryptomate/cfg.hpp"
#include "cryptomate/syntax.hpp"

namespace cryptomate {

struct CallSite {
  int node = 0;
  std::string method;  // class name for the constructor call
  bool isConstructor = false;
  std::vector<syntax::Expr> args;
  syntax::SourceRange range;
};

/// One `new T(...)` allocation bound to a local variable, plus every call
/// made through that variable or its direct copies.
struct TrackedObject {
  std::string className;
  int allocSite = 0;
  /// Range of the statement that binds the allocation.
  syntax::SourceRange declRange;
  /// Name the allocation was first bound to.
  std::string primaryName;
  /// Names currently aliasing the object, in binding order.
  std::vector<std::string> names;
  /// Constructor first, then method calls in source order.
  std::vector<CallSite> callSites;

  bool hasName(const std::string& n) const;
};

/// Walks the method's statement nodes in source order. Direct copies
/// `a = b` add `a` to b's object; rebinding a name removes it from its old
/// object. Receivers that were never allocated locally are ignored.
std::vector<TrackedObject> extractObjects(const Cfg& cfg);

}  // namespace cryptomate
