#include "cryptomate/syntax.hpp"

#include <array>
#include <charconv>
#include <set>

namespace cryptomate::syntax {

namespace {

constexpr std::array kKeywords{"void", "if",    "else",    "while", "return", "new",
                               "true", "false", "int",     "boolean", "byte"};

bool isKeyword(std::string_view s) {
  for (auto kw : kKeywords)
    if (s == kw) return true;
  return false;
}

bool isIdentStart(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
}
bool isIdentChar(char c) { return isIdentStart(c) || (c >= '0' && c <= '9'); }
bool isDigit(char c) { return c >= '0' && c <= '9'; }

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

LexError::LexError(int line, int col, const std::string& what)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + what),
      line_(line),
      col_(col) {}

TokenStream tokenize(std::string_view src) {
  TokenStream out;
  int line = 1;
  int col = 1;
  size_t i = 0;

  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    int startLine = line, startCol = col;

    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      size_t eol = src.find('\n', i);
      if (eol == std::string_view::npos) eol = src.size();
      out.comments.push_back({trim(src.substr(i + 2, eol - i - 2)), startLine, startCol});
      advance(eol - i);
      continue;
    }

    if (isIdentStart(c)) {
      size_t j = i;
      while (j < src.size() && isIdentChar(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      TokenKind kind = isKeyword(text) ? TokenKind::Keyword : TokenKind::Ident;
      out.tokens.push_back({kind, std::move(text), startLine, startCol});
      advance(j - i);
      continue;
    }

    if (isDigit(c)) {
      size_t j = i;
      while (j < src.size() && isDigit(src[j])) ++j;
      if (j < src.size() && isIdentStart(src[j]))
        throw LexError(line, col + static_cast<int>(j - i), "malformed number");
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + j, value);
      if (ec != std::errc()) throw LexError(startLine, startCol, "integer literal out of range");
      out.tokens.push_back({TokenKind::IntLiteral, std::string(src.substr(i, j - i)), startLine,
                            startCol});
      advance(j - i);
      continue;
    }

    if (c == '"') {
      size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        if (src[j] == '\\' && j + 1 < src.size() && src[j + 1] != '\n') {
          j += 2;
          continue;
        }
        if (src[j] == '\n') break;
        if (src[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) throw LexError(startLine, startCol, "unterminated string literal");
      out.tokens.push_back({TokenKind::StringLiteral, std::string(src.substr(i, j - i)), startLine,
                            startCol});
      advance(j - i);
      continue;
    }

    switch (c) {
      case '(': case ')': case '{': case '}': case ';':
      case ',': case '.': case '=': case '[': case ']':
        out.tokens.push_back({TokenKind::Punct, std::string(1, c), startLine, startCol});
        advance(1);
        continue;
      default:
        break;
    }
    throw LexError(startLine, startCol,
                   "illegal character '" + std::string(1, c) + "'");
  }
  return out;
}

std::string Expr::literalText() const {
  switch (kind) {
    case ExprKind::IntLit: return std::to_string(intValue);
    case ExprKind::StringLit: return stringValue;
    case ExprKind::BoolLit: return boolValue ? "true" : "false";
    default: return {};
  }
}

std::string ParseError::message() const {
  std::string msg = "expected ";
  for (size_t k = 0; k < expected.size(); ++k) {
    if (k) msg += k + 1 == expected.size() ? " or " : ", ";
    msg += expected[k];
  }
  msg += ", found " + found;
  return msg;
}

namespace {

std::string unescape(std::string_view quoted) {
  std::string out;
  std::string_view body = quoted.substr(1, quoted.size() - 2);
  for (size_t k = 0; k < body.size(); ++k) {
    if (body[k] == '\\' && k + 1 < body.size()) {
      char n = body[++k];
      switch (n) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: out += n; break;
      }
    } else {
      out += body[k];
    }
  }
  return out;
}

struct SyntaxFailure {
  ParseError error;
};

class Parser {
 public:
  explicit Parser(const std::vector<Token>& toks) : toks_(toks) {}

  ParseResult run(std::string path) {
    ParseResult result;
    result.unit.path = std::move(path);
    bool failed = false;
    while (!atEnd()) {
      size_t start = pos_;
      try {
        MethodDecl m = method();
        if (!failed) result.unit.methods.push_back(std::move(m));
      } catch (const SyntaxFailure& f) {
        failed = true;
        result.errors.push_back(f.error);
        recover(start);
      }
    }
    return result;
  }

 private:
  const std::vector<Token>& toks_;
  size_t pos_ = 0;

  bool atEnd() const { return pos_ >= toks_.size(); }
  const Token* peek(size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
  }
  bool peekIs(TokenKind k, std::string_view t, size_t ahead = 0) const {
    const Token* tok = peek(ahead);
    return tok && tok->is(k, t);
  }
  bool peekPunct(std::string_view t, size_t ahead = 0) const {
    return peekIs(TokenKind::Punct, t, ahead);
  }
  bool peekKind(TokenKind k, size_t ahead = 0) const {
    const Token* tok = peek(ahead);
    return tok && tok->kind == k;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    ParseError e;
    e.expected = std::move(expected);
    if (const Token* t = peek()) {
      e.line = t->line;
      e.col = t->col;
      e.found = "'" + t->text + "'";
    } else {
      if (!toks_.empty()) {
        const Token& last = toks_.back();
        e.line = last.line;
        e.col = last.col + static_cast<int>(last.text.size());
      }
      e.found = "end of input";
    }
    throw SyntaxFailure{std::move(e)};
  }

  const Token& expectPunct(std::string_view t) {
    if (!peekPunct(t)) fail({"'" + std::string(t) + "'"});
    return toks_[pos_++];
  }
  const Token& expectKeyword(std::string_view t) {
    if (!peekIs(TokenKind::Keyword, t)) fail({"'" + std::string(t) + "'"});
    return toks_[pos_++];
  }
  const Token& expectIdent() {
    if (!peekKind(TokenKind::Ident)) fail({"identifier"});
    return toks_[pos_++];
  }

  static void extendTo(SourceRange& r, const Token& last) {
    r.endLine = last.line;
    r.endCol = last.col + static_cast<int>(last.text.size());
  }
  static SourceRange startAt(const Token& t) { return {t.line, t.col, t.line, t.col}; }

  // Skips to the next top-level `void` after a failed method.
  void recover(size_t start) {
    if (pos_ == start) ++pos_;
    int depth = 0;
    for (size_t k = start; k < pos_ && k < toks_.size(); ++k) {
      if (toks_[k].is(TokenKind::Punct, "{")) ++depth;
      if (toks_[k].is(TokenKind::Punct, "}")) --depth;
    }
    while (!atEnd()) {
      const Token& t = toks_[pos_];
      if (depth <= 0 && t.is(TokenKind::Keyword, "void")) return;
      if (t.is(TokenKind::Punct, "{")) ++depth;
      if (t.is(TokenKind::Punct, "}")) --depth;
      ++pos_;
    }
  }

  MethodDecl method() {
    MethodDecl m;
    const Token& v = expectKeyword("void");
    m.range = startAt(v);
    m.name = expectIdent().text;
    expectPunct("(");
    if (!peekPunct(")")) {
      for (;;) {
        Param p;
        p.typeName = type();
        p.name = expectIdent().text;
        m.params.push_back(std::move(p));
        if (peekPunct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expectPunct(")");
    const Token& close = block(m.body);
    m.closeBraceLine = close.line;
    extendTo(m.range, close);
    return m;
  }

  bool atTypeStart() const {
    return peekIs(TokenKind::Keyword, "int") || peekIs(TokenKind::Keyword, "boolean") ||
           peekIs(TokenKind::Keyword, "byte") || peekKind(TokenKind::Ident);
  }

  std::string type() {
    if (peekIs(TokenKind::Keyword, "int") || peekIs(TokenKind::Keyword, "boolean"))
      return toks_[pos_++].text;
    if (peekIs(TokenKind::Keyword, "byte")) {
      ++pos_;
      expectPunct("[");
      expectPunct("]");
      return "byte[]";
    }
    if (peekKind(TokenKind::Ident)) return toks_[pos_++].text;
    fail({"type"});
  }

  // Parses `{ stmt* }` and returns the closing brace token.
  const Token& block(std::vector<Stmt>& out) {
    expectPunct("{");
    while (!peekPunct("}")) {
      if (atEnd()) fail({"'}'", "statement"});
      out.push_back(statement());
    }
    return toks_[pos_++];
  }

  Stmt statement() {
    const Token* t = peek();
    if (!t) fail({"statement"});
    Stmt s;
    s.range = startAt(*t);

    if (t->is(TokenKind::Keyword, "if")) {
      ++pos_;
      s.kind = StmtKind::If;
      expectPunct("(");
      s.expr = expr();
      expectPunct(")");
      const Token* last = &block(s.body);
      if (peekIs(TokenKind::Keyword, "else")) {
        ++pos_;
        s.hasElse = true;
        last = &block(s.elseBody);
      }
      extendTo(s.range, *last);
      return s;
    }
    if (t->is(TokenKind::Keyword, "while")) {
      ++pos_;
      s.kind = StmtKind::While;
      expectPunct("(");
      s.expr = expr();
      expectPunct(")");
      extendTo(s.range, block(s.body));
      return s;
    }
    if (t->is(TokenKind::Keyword, "return")) {
      ++pos_;
      s.kind = StmtKind::Return;
      if (!peekPunct(";")) s.expr = expr();
      extendTo(s.range, expectPunct(";"));
      return s;
    }
    if (peekKind(TokenKind::Ident) && peekPunct("=", 1)) {
      s.kind = StmtKind::Assign;
      s.name = toks_[pos_++].text;
      ++pos_;
      s.expr = expr();
      extendTo(s.range, expectPunct(";"));
      return s;
    }
    if (peekKind(TokenKind::Ident) && (peekPunct(".", 1) || peekPunct("(", 1))) {
      s.kind = StmtKind::ExprStmt;
      s.expr = call();
      extendTo(s.range, expectPunct(";"));
      return s;
    }
    if (atTypeStart()) {
      s.kind = StmtKind::VarDecl;
      s.typeName = type();
      s.name = expectIdent().text;
      if (peekPunct("=")) {
        ++pos_;
        s.expr = expr();
      }
      extendTo(s.range, expectPunct(";"));
      return s;
    }
    fail({"statement"});
  }

  void args(Expr& e) {
    expectPunct("(");
    if (!peekPunct(")")) {
      for (;;) {
        e.args.push_back(expr());
        if (peekPunct(",")) {
          ++pos_;
          continue;
        }
        break;
      }
    }
    extendTo(e.range, expectPunct(")"));
  }

  Expr call() {
    Expr e;
    e.kind = ExprKind::MethodCall;
    const Token& first = expectIdent();
    e.range = startAt(first);
    if (peekPunct(".")) {
      ++pos_;
      e.name = first.text;
      e.method = expectIdent().text;
    } else {
      e.method = first.text;
    }
    args(e);
    return e;
  }

  Expr expr() {
    const Token* t = peek();
    if (!t) fail({"expression"});
    Expr e;
    e.range = startAt(*t);
    switch (t->kind) {
      case TokenKind::Keyword:
        if (t->text == "new") {
          ++pos_;
          e.kind = ExprKind::New;
          e.name = expectIdent().text;
          args(e);
          return e;
        }
        if (t->text == "true" || t->text == "false") {
          ++pos_;
          e.kind = ExprKind::BoolLit;
          e.boolValue = t->text == "true";
          extendTo(e.range, *t);
          return e;
        }
        break;
      case TokenKind::IntLiteral:
        ++pos_;
        e.kind = ExprKind::IntLit;
        std::from_chars(t->text.data(), t->text.data() + t->text.size(), e.intValue);
        extendTo(e.range, *t);
        return e;
      case TokenKind::StringLiteral:
        ++pos_;
        e.kind = ExprKind::StringLit;
        e.stringValue = unescape(t->text);
        extendTo(e.range, *t);
        return e;
      case TokenKind::Ident:
        if (peekPunct(".", 1) || peekPunct("(", 1)) return call();
        ++pos_;
        e.kind = ExprKind::VarRef;
        e.name = t->text;
        extendTo(e.range, *t);
        return e;
      default:
        break;
    }
    fail({"expression"});
  }
};

}  // namespace

ParseResult parse(const std::vector<Token>& tokens, std::string path) {
  return Parser(tokens).run(std::move(path));
}

ParseResult parseSource(std::string_view source, std::string path) {
  return parse(tokenize(source).tokens, std::move(path));
}

}  // namespace cryptomate::syntax
