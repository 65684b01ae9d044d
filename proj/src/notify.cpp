#include "cryptomate/notify.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <tuple>

#include "cryptomate/syntax.hpp"

namespace cryptomate {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Fingerprint::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string fingerprintInput(const Finding& f) {
  std::string s;
  s.append(f.ruleId).append("|").append(f.file).append("|").append(f.methodName).append("|");
  s.append(f.objectVar).append("|").append(toString(f.kind));
  return s;
}

Fingerprint fingerprint(const Finding& f) { return {fnv1a64(fingerprintInput(f))}; }

std::string_view toString(SuppressionReason r) {
  return r == SuppressionReason::Annotation ? "annotation" : "learned";
}

std::string substituteTemplate(std::string_view text, const std::map<std::string, std::string>& vars,
                               bool strict) {
  std::string out;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{' && !(i > 0 && text[i - 1] == '$')) {
      size_t j = i + 1;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        std::string name(text.substr(i + 1, j - i - 1));
        bool core = std::find(kTemplatePlaceholders.begin(), kTemplatePlaceholders.end(), name) !=
                    kTemplatePlaceholders.end();
        if (core) {
          auto it = vars.find(name);
          if (it != vars.end())
            out += it->second;
          else
            out += kUnresolvedArg;
          i = j;
          continue;
        }
        if (strict) throw TemplateError("unknown placeholder {" + name + "}");
      }
    }
    out += text[i];
  }
  return out;
}

Notification renderNotification(const Finding& f, const Rule& rule) {
  Notification n;
  n.finding = f;
  n.fingerprint = fingerprint(f);
  n.title = substituteTemplate(rule.message, f.contextVars, true);
  n.explanation = substituteTemplate(rule.explanation, f.contextVars, false);
  n.noncompliantExample = substituteTemplate(rule.noncompliantExample, f.contextVars, false);
  n.compliantExample = substituteTemplate(rule.compliantExample, f.contextVars, false);
  n.severity = rule.severity;
  n.effectiveConfidence = f.baseConfidence;
  return n;
}

namespace {

std::vector<std::string_view> splitLines(std::string_view source) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  for (;;) {
    size_t eol = source.find('\n', pos);
    if (eol == std::string_view::npos) {
      lines.push_back(source.substr(pos));
      break;
    }
    lines.push_back(source.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

std::string_view indentOf(std::string_view line) {
  size_t k = 0;
  while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
  return line.substr(0, k);
}

}  // namespace

std::optional<TextEdit> buildQuickfix(const Finding& f, const Rule& rule, std::string_view source) {
  if (!rule.quickfix) return std::nullopt;
  if (f.kind == FindingKind::ConstraintViolation) return std::nullopt;
  auto lines = splitLines(source);
  auto lineAt = [&](int line) -> std::optional<std::string_view> {
    if (line < 1 || static_cast<size_t>(line) > lines.size()) return std::nullopt;
    return lines[static_cast<size_t>(line) - 1];
  };
  const std::string eol = source.find("\r\n") != std::string_view::npos ? "\r\n" : "\n";
  std::map<std::string, std::string> vars{{"obj", f.objectVar}};
  const std::string snippet = substituteTemplate(rule.quickfix->text, vars, false);

  TextEdit edit;
  edit.file = f.file;
  auto anchor = lineAt(f.location.line);
  if (!anchor) return std::nullopt;
  std::string indent(indentOf(*anchor));

  if (f.kind == FindingKind::IllegalTransition) {
    edit.line = f.location.line;
    edit.col = 1;
    edit.newText = indent + snippet + eol;
    return edit;
  }

  // IncompleteLifecycle: the object is still in scope just before the
  // method's closing brace.
  syntax::ParseResult parsed;
  try {
    parsed = syntax::parseSource(source, f.file);
  } catch (const syntax::LexError&) {
    return std::nullopt;
  }
  auto m = std::find_if(parsed.unit.methods.begin(), parsed.unit.methods.end(),
                        [&](const syntax::MethodDecl& d) { return d.name == f.methodName; });
  if (m == parsed.unit.methods.end()) return std::nullopt;
  auto closeLine = lineAt(m->range.endLine);
  if (!closeLine) return std::nullopt;
  int braceCol = m->range.endCol - 1;
  std::string_view before = closeLine->substr(0, static_cast<size_t>(std::max(0, braceCol - 1)));
  bool braceAlone = std::all_of(before.begin(), before.end(), [](char c) { return c == ' ' || c == '\t'; });
  edit.line = m->range.endLine;
  if (braceAlone) {
    edit.col = 1;
    edit.newText = indent + snippet + eol;
  } else {
    edit.col = braceCol;
    edit.newText = snippet + " ";
  }
  return edit;
}

std::map<int, std::set<std::string>> allowAnnotations(std::string_view source) {
  std::map<int, std::set<std::string>> out;
  auto parseComment = [&](std::string_view text, int line) {
    constexpr std::string_view kTag = "cm:allow";
    if (text.substr(0, kTag.size()) != kTag) return;
    std::string_view rest = text.substr(kTag.size());
    if (!rest.empty() && rest[0] != ' ' && rest[0] != '\t') return;
    std::string id;
    auto flush = [&] {
      if (!id.empty()) out[line].insert(id);
      id.clear();
    };
    for (char c : rest) {
      if (c == ',' || c == ' ' || c == '\t' || c == '\r')
        flush();
      else
        id += c;
    }
    flush();
  };

  try {
    for (const auto& c : syntax::tokenize(source).comments) parseComment(c.text, c.line);
    return out;
  } catch (const syntax::LexError&) {
  }
  // Unlexable text: scan line by line, skipping string literals.
  auto lines = splitLines(source);
  for (size_t k = 0; k < lines.size(); ++k) {
    std::string_view l = lines[k];
    bool inString = false;
    for (size_t i = 0; i + 1 < l.size(); ++i) {
      if (inString) {
        if (l[i] == '\\') ++i;
        else if (l[i] == '"') inString = false;
        continue;
      }
      if (l[i] == '"') {
        inString = true;
      } else if (l[i] == '/' && l[i + 1] == '/') {
        std::string_view body = l.substr(i + 2);
        while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);
        parseComment(body, static_cast<int>(k) + 1);
        break;
      }
    }
  }
  return out;
}

std::vector<Notification> applySuppressions(std::vector<Notification> ns, std::string_view source,
                                            const FeedbackStore& stats) {
  auto allowed = allowAnnotations(source);
  auto allows = [&](int line, const std::string& id) {
    auto it = allowed.find(line);
    return it != allowed.end() && it->second.count(id) > 0;
  };
  for (auto& n : ns) {
    int line = n.finding.location.line;
    if (allows(line, n.finding.ruleId) || allows(line - 1, n.finding.ruleId)) {
      n.suppressed = true;
      n.suppressionReason = SuppressionReason::Annotation;
      continue;
    }
    const std::string hex = n.fingerprint.hex();
    VerdictCounts c = stats.counts(hex);
    if (c.total() >= kLearnedMinVerdicts && smoothedRate(c) > kLearnedRateThreshold) {
      n.suppressed = true;
      n.suppressionReason = SuppressionReason::Learned;
    }
  }
  return ns;
}

namespace {
int severityRank(Severity s) {
  switch (s) {
    case Severity::Error: return 0;
    case Severity::Warning: return 1;
    case Severity::Info: return 2;
  }
  return 3;
}
}  // namespace

bool notificationBefore(const Notification& a, const Notification& b) {
  return std::make_tuple(severityRank(a.severity), -a.effectiveConfidence, a.finding.ruleId) <
         std::make_tuple(severityRank(b.severity), -b.effectiveConfidence, b.finding.ruleId);
}

std::vector<Notification> prioritize(std::vector<Notification> ns) {
  std::stable_sort(ns.begin(), ns.end(), notificationBefore);
  return ns;
}

}  // namespace cryptomate
