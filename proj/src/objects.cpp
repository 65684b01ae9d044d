#include "cryptomate/objects.hpp"

#include <algorithm>
#include <map>

namespace cryptomate {

bool TrackedObject::hasName(const std::string& n) const {
  return std::find(names.begin(), names.end(), n) != names.end();
}

namespace {

class Extractor {
 public:
  std::vector<TrackedObject> objects;

  void visitNode(const CfgNode& node) {
    if (node.condition) collectCalls(*node.condition, node.id);
    if (!node.stmt) return;
    const syntax::Stmt& s = *node.stmt;
    using syntax::StmtKind;
    switch (s.kind) {
      case StmtKind::VarDecl:
      case StmtKind::Assign:
        if (s.expr) {
          collectCalls(*s.expr, node.id);
          bind(s.name, *s.expr, node);
        } else {
          unbind(s.name);
        }
        break;
      case StmtKind::ExprStmt:
      case StmtKind::Return:
        if (s.expr) collectCalls(*s.expr, node.id);
        break;
      default:
        break;
    }
  }

 private:
  std::map<std::string, size_t> bound_;

  void unbind(const std::string& name) {
    auto it = bound_.find(name);
    if (it == bound_.end()) return;
    auto& names = objects[it->second].names;
    names.erase(std::remove(names.begin(), names.end(), name), names.end());
    bound_.erase(it);
  }

  void bind(const std::string& name, const syntax::Expr& value, const CfgNode& node) {
    using syntax::ExprKind;
    if (value.kind == ExprKind::New) {
      unbind(name);
      TrackedObject obj;
      obj.className = value.name;
      obj.allocSite = node.id;
      obj.declRange = node.range;
      obj.primaryName = name;
      obj.names.push_back(name);
      obj.callSites.push_back({node.id, value.name, true, value.args, value.range});
      bound_[name] = objects.size();
      objects.push_back(std::move(obj));
      return;
    }
    if (value.kind == ExprKind::VarRef) {
      auto src = bound_.find(value.name);
      if (src != bound_.end()) {
        if (value.name == name) return;
        size_t target = src->second;
        unbind(name);
        objects[target].names.push_back(name);
        bound_[name] = target;
        return;
      }
    }
    unbind(name);
  }

  // Arguments are evaluated before the call they belong to.
  void collectCalls(const syntax::Expr& e, int node) {
    for (const auto& a : e.args) collectCalls(a, node);
    if (e.kind != syntax::ExprKind::MethodCall || e.name.empty()) return;
    auto it = bound_.find(e.name);
    if (it == bound_.end()) return;
    objects[it->second].callSites.push_back({node, e.method, false, e.args, e.range});
  }
};

}  // namespace

std::vector<TrackedObject> extractObjects(const Cfg& cfg) {
  Extractor x;
  for (const auto& n : cfg.nodes) x.visitNode(n);
  return std::move(x.objects);
}

}  // namespace cryptomate
