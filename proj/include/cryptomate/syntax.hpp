// Lexer, AST and parser for MiniJava-CF, the small Java-like language the
// analyzer reads.
//
//   unit      := method* ;
//   method    := "void" IDENT "(" [param ("," param)*] ")" block ;
//   param     := type IDENT ;
//   block     := "{" stmt* "}" ;
//   stmt      := varDecl | assign | exprStmt | ifStmt | whileStmt | returnStmt ;
//   varDecl   := type IDENT ["=" expr] ";" ;
//   assign    := IDENT "=" expr ";" ;
//   exprStmt  := call ";" ;
//   ifStmt    := "if" "(" expr ")" block ["else" block] ;
//   whileStmt := "while" "(" expr ")" block ;
//   returnStmt:= "return" [expr] ";" ;
//   expr      := "new" IDENT "(" args ")" | call | INT | STRING
//              | "true" | "false" | IDENT ;
//   call      := IDENT "." IDENT "(" args ")" | IDENT "(" args ")" ;
//   args      := [expr ("," expr)*] ;
//   type      := "int" | "boolean" | "String" | "byte[]" | IDENT ;
//
// Columns are 1-based byte offsets within a line.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cryptomate::syntax {

enum class TokenKind { Keyword, Ident, IntLiteral, StringLiteral, Punct };

struct Token {
  TokenKind kind;
  std::string text;  // raw source text, string literals keep their quotes
  int line = 1;
  int col = 1;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
};

/// A `//` comment. `text` is the body after the slashes, trimmed.
struct Comment {
  std::string text;
  int line = 1;
  int col = 1;
};

struct TokenStream {
  std::vector<Token> tokens;
  std::vector<Comment> comments;
};

class LexError : public std::runtime_error {
 public:
  LexError(int line, int col, const std::string& what);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

TokenStream tokenize(std::string_view source);

/// Half-open source span: `end` points one past the last byte.
struct SourceRange {
  int line = 1;
  int col = 1;
  int endLine = 1;
  int endCol = 1;

  friend bool operator==(const SourceRange&, const SourceRange&) = default;
  friend auto operator<=>(const SourceRange&, const SourceRange&) = default;
};

enum class ExprKind { New, MethodCall, VarRef, IntLit, StringLit, BoolLit };

struct Expr {
  ExprKind kind = ExprKind::VarRef;
  // New: class name. MethodCall: receiver (empty for a bare call).
  // VarRef: variable name.
  std::string name;
  std::string method;  // MethodCall only
  std::vector<Expr> args;
  std::int64_t intValue = 0;
  std::string stringValue;  // unescaped contents of a string literal
  bool boolValue = false;
  SourceRange range;

  /// Literal spelling for IntLit/StringLit/BoolLit, empty otherwise.
  std::string literalText() const;
};

enum class StmtKind { VarDecl, Assign, ExprStmt, If, While, Return };

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  std::string typeName;  // VarDecl
  std::string name;      // VarDecl, Assign
  std::optional<Expr> expr;  // initializer, rhs, call, condition or return value
  std::vector<Stmt> body;      // If then-block, While body
  std::vector<Stmt> elseBody;  // If
  bool hasElse = false;
  SourceRange range;
};

struct Param {
  std::string typeName;
  std::string name;
};

struct MethodDecl {
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourceRange range;
  int closeBraceLine = 1;
};

struct CompilationUnit {
  std::string path;
  std::vector<MethodDecl> methods;
};

struct ParseError {
  int line = 1;
  int col = 1;
  std::vector<std::string> expected;
  std::string found;

  std::string message() const;
};

struct ParseResult {
  /// Methods that parsed cleanly, up to the first method with an error.
  CompilationUnit unit;
  std::vector<ParseError> errors;

  bool ok() const { return errors.empty(); }
};

ParseResult parse(const std::vector<Token>& tokens, std::string path = {});

/// Convenience: tokenize + parse. Lex errors propagate as LexError.
ParseResult parseSource(std::string_view source, std::string path = {});

}  // namespace cryptomate::syntax
