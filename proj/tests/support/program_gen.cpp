#include "support/program_gen.hpp"

#include <sstream>

namespace cmtest {

using namespace cryptomate::syntax;

namespace {

SourceRange lineRange(int line, int col, int width) { return {line, col, line, col + width}; }

Expr varRef(const std::string& name, int line, int col) {
  Expr e;
  e.kind = ExprKind::VarRef;
  e.name = name;
  e.range = lineRange(line, col, static_cast<int>(name.size()));
  return e;
}

}  // namespace

MethodBuilder::MethodBuilder(std::string name) : name_(std::move(name)) {}

Stmt MethodBuilder::alloc(const std::string& type, const std::string& var) {
  int line = line_++;
  Stmt s;
  s.kind = StmtKind::VarDecl;
  s.typeName = type;
  s.name = var;
  Expr e;
  e.kind = ExprKind::New;
  e.name = type;
  int col = 5 + static_cast<int>(type.size() + var.size()) + 4;
  e.range = lineRange(line, col, static_cast<int>(type.size()) + 6);
  s.expr = e;
  s.range = lineRange(line, 5, col - 5 + e.range.endCol - e.range.col + 1);
  return s;
}

Stmt MethodBuilder::call(const std::string& recv, const std::string& method, const std::string& arg) {
  int line = line_++;
  Stmt s;
  s.kind = StmtKind::ExprStmt;
  Expr e;
  e.kind = ExprKind::MethodCall;
  e.name = recv;
  e.method = method;
  int argCol = 5 + static_cast<int>(recv.size() + method.size()) + 2;
  e.args.push_back(varRef(arg, line, argCol));
  e.range = lineRange(line, 5, static_cast<int>(recv.size() + method.size() + arg.size()) + 3);
  s.expr = e;
  s.range = lineRange(line, 5, e.range.endCol - 5 + 1);
  return s;
}

Stmt MethodBuilder::ret() {
  int line = line_++;
  Stmt s;
  s.kind = StmtKind::Return;
  s.range = lineRange(line, 5, 7);
  return s;
}

int MethodBuilder::openBlock() { return line_++; }

Stmt MethodBuilder::ifStmt(int headerLine, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::If;
  s.expr = varRef("c", headerLine, 9);
  s.body = std::move(body);
  s.range = {headerLine, 5, line_ - 1, 6};
  return s;
}

Stmt MethodBuilder::ifElse(int headerLine, std::vector<Stmt> body, std::vector<Stmt> elseBody) {
  Stmt s = ifStmt(headerLine, std::move(body));
  s.elseBody = std::move(elseBody);
  s.hasElse = true;
  return s;
}

Stmt MethodBuilder::whileStmt(int headerLine, std::vector<Stmt> body) {
  Stmt s;
  s.kind = StmtKind::While;
  s.expr = varRef("c", headerLine, 12);
  s.body = std::move(body);
  s.range = {headerLine, 5, line_ - 1, 6};
  return s;
}

MethodDecl MethodBuilder::finish(std::vector<Stmt> body) {
  MethodDecl m;
  m.name = name_;
  m.params = {{"boolean", "c"}, {"Key", "k"}, {"byte[]", "d"}};
  m.body = std::move(body);
  m.closeBraceLine = line_;
  m.range = {1, 1, line_, 2};
  return m;
}

namespace {

void printBlock(std::ostringstream& out, const std::vector<Stmt>& body, int indent);

std::string exprText(const Expr& e) {
  switch (e.kind) {
    case ExprKind::New: return "new " + e.name + "()";
    case ExprKind::MethodCall: {
      std::string s = (e.name.empty() ? "" : e.name + ".") + e.method + "(";
      for (size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + exprText(e.args[i]);
      return s + ")";
    }
    case ExprKind::VarRef: return e.name;
    default: return e.literalText();
  }
}

void printStmt(std::ostringstream& out, const Stmt& s, int indent) {
  std::string pad(static_cast<size_t>(indent), ' ');
  switch (s.kind) {
    case StmtKind::VarDecl: out << pad << s.typeName << " " << s.name << " = " << exprText(*s.expr) << ";\n"; break;
    case StmtKind::Assign: out << pad << s.name << " = " << exprText(*s.expr) << ";\n"; break;
    case StmtKind::ExprStmt: out << pad << exprText(*s.expr) << ";\n"; break;
    case StmtKind::Return: out << pad << "return;\n"; break;
    case StmtKind::If:
      out << pad << "if (" << exprText(*s.expr) << ") {\n";
      printBlock(out, s.body, indent + 4);
      if (s.hasElse) {
        out << pad << "} else {\n";
        printBlock(out, s.elseBody, indent + 4);
      }
      out << pad << "}\n";
      break;
    case StmtKind::While:
      out << pad << "while (" << exprText(*s.expr) << ") {\n";
      printBlock(out, s.body, indent + 4);
      out << pad << "}\n";
      break;
  }
}

void printBlock(std::ostringstream& out, const std::vector<Stmt>& body, int indent) {
  for (const auto& s : body) printStmt(out, s, indent);
}

enum class Atom { None, Init, Encrypt, Return };
enum class Form { If, IfElse, While };

struct BranchSpec {
  Form form;
  Atom body;
  Atom elseBody;
};

int atomSize(Atom a) { return a == Atom::None ? 0 : 1; }

int branchSize(const BranchSpec& b) {
  return 1 + atomSize(b.body) + (b.form == Form::IfElse ? atomSize(b.elseBody) : 0);
}

std::vector<Stmt> atomStmts(MethodBuilder& mb, Atom a) {
  switch (a) {
    case Atom::None: return {};
    case Atom::Init: return {mb.call("enc", "init", "k")};
    case Atom::Encrypt: return {mb.call("enc", "encrypt", "d")};
    case Atom::Return: return {mb.ret()};
  }
  return {};
}

cryptomate::syntax::MethodDecl build(const std::vector<Atom>& segments, const std::vector<BranchSpec>& branches) {
  MethodBuilder mb;
  std::vector<Stmt> body;
  body.push_back(mb.alloc("ECElGamalEncryptor", "enc"));
  for (size_t k = 0; k <= branches.size(); ++k) {
    for (auto& s : atomStmts(mb, segments[k])) body.push_back(std::move(s));
    if (k == branches.size()) break;
    const BranchSpec& b = branches[k];
    int header = mb.openBlock();
    std::vector<Stmt> then = atomStmts(mb, b.body);
    if (b.form == Form::IfElse) {
      mb.closeBlock();  // "} else {"
      std::vector<Stmt> other = atomStmts(mb, b.elseBody);
      mb.closeBlock();
      body.push_back(mb.ifElse(header, std::move(then), std::move(other)));
    } else {
      mb.closeBlock();
      body.push_back(b.form == Form::If ? mb.ifStmt(header, std::move(then))
                                        : mb.whileStmt(header, std::move(then)));
    }
  }
  return mb.finish(std::move(body));
}

}  // namespace

std::string toSource(const MethodDecl& m) {
  std::ostringstream out;
  out << "void " << m.name << "(";
  for (size_t i = 0; i < m.params.size(); ++i)
    out << (i ? ", " : "") << m.params[i].typeName << " " << m.params[i].name;
  out << ") {\n";
  printBlock(out, m.body, 4);
  out << "}\n";
  return out.str();
}

void forEachBranchProgram(int maxStatements, int maxBranches,
                          const std::function<void(const MethodDecl&)>& fn) {
  const Atom segmentAtoms[] = {Atom::None, Atom::Init, Atom::Encrypt};
  const Atom bodyAtoms[] = {Atom::None, Atom::Init, Atom::Encrypt, Atom::Return};
  std::vector<BranchSpec> forms;
  for (Atom b : bodyAtoms) {
    forms.push_back({Form::If, b, Atom::None});
    forms.push_back({Form::While, b, Atom::None});
    for (Atom e : bodyAtoms) forms.push_back({Form::IfElse, b, e});
  }

  for (int nb = 0; nb <= maxBranches; ++nb) {
    std::vector<size_t> formIdx(static_cast<size_t>(nb), 0);
    for (;;) {
      std::vector<BranchSpec> branches;
      int size = 1;
      for (size_t f : formIdx) {
        branches.push_back(forms[f]);
        size += branchSize(forms[f]);
      }
      std::vector<size_t> segIdx(static_cast<size_t>(nb) + 1, 0);
      for (;;) {
        std::vector<Atom> segments;
        int total = size;
        for (size_t s : segIdx) {
          segments.push_back(segmentAtoms[s]);
          total += atomSize(segmentAtoms[s]);
        }
        if (total <= maxStatements) fn(build(segments, branches));
        size_t k = 0;
        while (k < segIdx.size() && ++segIdx[k] == 3) segIdx[k++] = 0;
        if (k == segIdx.size()) break;
      }
      size_t k = 0;
      while (k < formIdx.size() && ++formIdx[k] == forms.size()) formIdx[k++] = 0;
      if (k == formIdx.size()) break;
    }
  }
}

void forEachStraightLine(int maxStatements, const std::function<void(const MethodDecl&)>& fn) {
  for (int len = 0; len < maxStatements; ++len) {
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      MethodBuilder mb;
      std::vector<Stmt> body;
      body.push_back(mb.alloc("ECElGamalEncryptor", "enc"));
      for (int i = 0; i < len; ++i)
        body.push_back((bits >> i) & 1u ? mb.call("enc", "encrypt", "d") : mb.call("enc", "init", "k"));
      fn(mb.finish(std::move(body)));
    }
  }
}

namespace {

struct UnitGen {
  std::mt19937& rng;
  std::ostringstream out;
  int vars = 0;
  std::vector<std::pair<std::string, std::string>> live;  // var, class

  int roll(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  std::string pad(int depth) { return std::string(static_cast<size_t>(4 * depth), ' '); }

  void callOn(int depth, const std::string& var, const std::string& cls) {
    if (cls == "ECElGamalEncryptor") {
      out << pad(depth) << (roll(2) ? var + ".init(pub);\n" : "byte[] o" + std::to_string(vars++) + " = " + var + ".encrypt(data);\n");
    } else if (cls == "KeyPairGenerator") {
      static const char* sizes[] = {"1024", "2048", "4096", "bits"};
      out << pad(depth) << (roll(3) ? var + ".init(" + sizes[roll(4)] + ");\n" : var + ".generateKeyPair();\n");
    } else {
      out << pad(depth) << (roll(2) ? var + ".init(key);\n" : var + ".process(data);\n");
    }
  }

  void alloc(int depth) {
    static const char* classes[] = {"ECElGamalEncryptor", "KeyPairGenerator", "Cipher"};
    static const char* ciphers[] = {"\"AES\"", "\"DES\"", "\"rc4/ECB\"", "name"};
    std::string cls = classes[roll(3)];
    std::string var = "v" + std::to_string(vars++);
    std::string arg = cls == "Cipher" ? ciphers[roll(4)] : "";
    out << pad(depth) << cls << " " << var << " = new " << cls << "(" << arg << ");\n";
    live.push_back({var, cls});
  }

  void block(int depth, int budget) {
    for (int k = 0; k < budget; ++k) {
      int r = roll(10);
      if (r < 2 || live.empty()) {
        alloc(depth);
      } else if (r < 6) {
        auto& [var, cls] = live[static_cast<size_t>(roll(static_cast<int>(live.size())))];
        callOn(depth, var, cls);
      } else if (r < 7 && depth < 3) {
        out << pad(depth) << "if (flag) {\n";
        block(depth + 1, 1 + roll(3));
        if (roll(2)) {
          out << pad(depth) << "} else {\n";
          block(depth + 1, 1 + roll(3));
        }
        out << pad(depth) << "}\n";
      } else if (r < 8 && depth < 3) {
        out << pad(depth) << "while (more) {\n";
        block(depth + 1, 1 + roll(3));
        out << pad(depth) << "}\n";
      } else if (r < 9) {
        auto& [var, cls] = live[static_cast<size_t>(roll(static_cast<int>(live.size())))];
        std::string alias = "a" + std::to_string(vars++);
        out << pad(depth) << cls << " " << alias << " = " << var << ";\n";
        live.push_back({alias, cls});
      } else if (depth > 1 && roll(3) == 0) {
        out << pad(depth) << "return;\n";
        return;
      }
    }
  }
};

}  // namespace

std::string randomUnit(std::mt19937& rng) {
  UnitGen g{rng, {}, 0, {}};
  int methods = 1 + g.roll(3);
  for (int m = 0; m < methods; ++m) {
    g.live.clear();
    g.out << "void m" << m << "(boolean flag, boolean more, Key pub, byte[] data, byte[] key, int bits, String name) {\n";
    g.block(1, 2 + g.roll(8));
    g.out << "}\n\n";
  }
  return g.out.str();
}

}  // namespace cmtest
