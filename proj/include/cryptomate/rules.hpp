// Rule documents: one crypto-API usage specification per `*.rule.json`.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cryptomate/order_dfa.hpp"

namespace cryptomate {

enum class Severity { Error, Warning, Info };

std::string_view toString(Severity s);
std::optional<Severity> parseSeverity(std::string_view s);

enum class EventKind { Constructor, Method };

struct EventSpec {
  EventKind kind = EventKind::Method;
  std::string name;
  int arity = 0;
};

enum class CheckKind { IntMin, StringAllow, StringDeny };

struct ConstraintSpec {
  std::string event;  // label
  int arg = 0;
  CheckKind check = CheckKind::IntMin;
  std::variant<std::int64_t, std::vector<std::string>> value;
};

struct QuickfixSpec {
  std::string kind;  // only "insert_before_first_violation"
  std::string text;
};

struct Rule {
  std::string id;
  int version = 1;
  std::string className;
  Severity severity = Severity::Error;
  std::map<std::string, EventSpec> events;  // label -> spec
  std::string order;
  std::vector<ConstraintSpec> constraints;
  std::string message;
  std::string explanation;
  std::string noncompliantExample;
  std::string compliantExample;
  std::optional<QuickfixSpec> quickfix;

  /// Label of the event a call maps to, if any.
  std::optional<std::string> labelFor(const std::string& method, bool isConstructor,
                                      size_t argCount) const;
};

struct CompiledRule {
  Rule rule;
  Dfa dfa;
};

class RuleFormatError : public std::runtime_error {
 public:
  RuleFormatError(std::string file, std::string reason);
  const std::string& file() const { return file_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string file_;
  std::string reason_;
};

struct RuleSet {
  std::vector<CompiledRule> rules;  // sorted by id

  const CompiledRule* find(const std::string& id) const;
  bool empty() const { return rules.empty(); }
  size_t size() const { return rules.size(); }
};

struct RuleLoadResult {
  RuleSet ruleSet;
  std::vector<RuleFormatError> errors;
};

/// Parses and validates one rule document. Throws RuleFormatError.
CompiledRule parseRule(const std::string& jsonText, const std::string& file = "<memory>");

/// Loads every `*.rule.json` in `dir`. A malformed file is reported in
/// `errors` and never prevents loading the others. Files are visited in name
/// order, so the first of two files declaring the same id wins.
RuleLoadResult loadRules(const std::filesystem::path& dir);

/// Placeholders allowed in message templates.
inline constexpr std::array<std::string_view, 4> kTemplatePlaceholders{"obj", "method", "class",
                                                                       "arg"};

/// `{name}` placeholders in a template (snippet `${n:hint}` tabstops excluded).
std::vector<std::string> templatePlaceholders(std::string_view text);

}  // namespace cryptomate
