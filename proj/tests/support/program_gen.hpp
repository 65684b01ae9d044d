// Program generators for property tests.
#pragma once

#include <functional>
#include <random>
#include <string>

#include "cryptomate/syntax.hpp"

namespace cmtest {

/// Builds method ASTs with one statement per line, as if printed by
/// toSource, without going through the lexer.
class MethodBuilder {
 public:
  explicit MethodBuilder(std::string name = "m");

  cryptomate::syntax::Stmt alloc(const std::string& type, const std::string& var);
  cryptomate::syntax::Stmt call(const std::string& recv, const std::string& method,
                                const std::string& arg);
  cryptomate::syntax::Stmt ret();
  /// `body` and `elseBody` must have been built after this call's header
  /// line was reserved with openBlock.
  int openBlock();
  cryptomate::syntax::Stmt ifStmt(int headerLine, std::vector<cryptomate::syntax::Stmt> body);
  cryptomate::syntax::Stmt ifElse(int headerLine, std::vector<cryptomate::syntax::Stmt> body,
                                  std::vector<cryptomate::syntax::Stmt> elseBody);
  cryptomate::syntax::Stmt whileStmt(int headerLine, std::vector<cryptomate::syntax::Stmt> body);
  /// Consumes the line of a block's closing brace.
  void closeBlock() { ++line_; }

  cryptomate::syntax::MethodDecl finish(std::vector<cryptomate::syntax::Stmt> body);

 private:
  std::string name_;
  int line_ = 2;  // line 1 holds the signature
};

/// Pretty-prints a method in the layout MethodBuilder assumes.
std::string toSource(const cryptomate::syntax::MethodDecl& m);

/// The exhaustive grammar of the oracle test: `ECElGamalEncryptor enc = new
/// ...` followed by up to `maxBranches` branch constructs, with at most one
/// init/encrypt call before, between and after them. A branch is if{b},
/// if{b}else{b'} or while{b} with b one of: nothing, init, encrypt, return.
/// Programs longer than `maxStatements` are skipped.
void forEachBranchProgram(int maxStatements, int maxBranches,
                          const std::function<void(const cryptomate::syntax::MethodDecl&)>& fn);

/// Allocation followed by every init/encrypt sequence up to the limit.
void forEachStraightLine(int maxStatements,
                         const std::function<void(const cryptomate::syntax::MethodDecl&)>& fn);

/// A random compilation unit using the bundled API classes, with nesting,
/// aliases and constant arguments.
std::string randomUnit(std::mt19937& rng);

}  // namespace cmtest
