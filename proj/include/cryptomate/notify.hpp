// Turning raw findings into developer-facing notifications.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cryptomate/analysis.hpp"
#include "cryptomate/feedback.hpp"
#include "cryptomate/rules.hpp"

namespace cryptomate {

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view data);

struct Fingerprint {
  std::uint64_t value = 0;

  /// 16 lowercase hex digits.
  std::string hex() const;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// "ruleId|file|methodName|objectVar|kind". No positions, so the value
/// survives edits that only move code around.
std::string fingerprintInput(const Finding& f);
Fingerprint fingerprint(const Finding& f);

struct TextEdit {
  std::string file;
  int line = 1;  // 1-based insertion point
  int col = 1;
  std::string newText;  // may contain ${n:hint} tabstops

  friend bool operator==(const TextEdit&, const TextEdit&) = default;
};

enum class SuppressionReason { Annotation, Learned };
std::string_view toString(SuppressionReason r);

struct Notification {
  Finding finding;
  Fingerprint fingerprint;
  std::string title;
  std::string explanation;
  std::string noncompliantExample;
  std::string compliantExample;
  Severity severity = Severity::Error;
  std::optional<TextEdit> quickfix;
  bool suppressed = false;
  std::optional<SuppressionReason> suppressionReason;
  /// Base confidence discounted by recorded false positives.
  double effectiveConfidence = 0.0;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rendered in place of an {arg} that did not resolve to a literal.
inline constexpr std::string_view kUnresolvedArg = "…";

/// Replaces {obj}, {method}, {class} and {arg}. With `strict`, any other
/// `{identifier}` is a TemplateError; otherwise it is left alone.
std::string substituteTemplate(std::string_view text, const std::map<std::string, std::string>& vars,
                               bool strict);

Notification renderNotification(const Finding& f, const Rule& rule);

/// Insert-before-first-violation edit. IllegalTransition anchors at the
/// violating line; IncompleteLifecycle before the method's closing brace.
std::optional<TextEdit> buildQuickfix(const Finding& f, const Rule& rule, std::string_view source);

/// Rule ids allowed per line by `// cm:allow id[,id...]` comments.
std::map<int, std::set<std::string>> allowAnnotations(std::string_view source);

inline constexpr int kLearnedMinVerdicts = 3;
inline constexpr double kLearnedRateThreshold = 0.8;

/// Marks, never removes: annotated findings on the same or preceding line,
/// and fingerprints with >= 3 verdicts whose smoothed FP rate exceeds 0.8.
std::vector<Notification> applySuppressions(std::vector<Notification> ns, std::string_view source,
                                            const FeedbackStore& stats);

/// Error before warning before info, then higher confidence first, then rule id.
bool notificationBefore(const Notification& a, const Notification& b);
std::vector<Notification> prioritize(std::vector<Notification> ns);

}  // namespace cryptomate
