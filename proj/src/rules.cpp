#include "cryptomate/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cryptomate {

using nlohmann::json;

std::string_view toString(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "error";
}

std::optional<Severity> parseSeverity(std::string_view s) {
  if (s == "error") return Severity::Error;
  if (s == "warning") return Severity::Warning;
  if (s == "info") return Severity::Info;
  return std::nullopt;
}

RuleFormatError::RuleFormatError(std::string file, std::string reason)
    : std::runtime_error(file + ": " + reason), file_(std::move(file)), reason_(std::move(reason)) {}

std::optional<std::string> Rule::labelFor(const std::string& method, bool isConstructor,
                                          size_t argCount) const {
  for (const auto& [label, ev] : events) {
    if ((ev.kind == EventKind::Constructor) != isConstructor) continue;
    if (ev.name == method && static_cast<size_t>(ev.arity) == argCount) return label;
  }
  return std::nullopt;
}

const CompiledRule* RuleSet::find(const std::string& id) const {
  auto it = std::lower_bound(rules.begin(), rules.end(), id,
                             [](const CompiledRule& r, const std::string& k) { return r.rule.id < k; });
  return it != rules.end() && it->rule.id == id ? &*it : nullptr;
}

std::vector<std::string> templatePlaceholders(std::string_view text) {
  std::vector<std::string> out;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' || (i > 0 && text[i - 1] == '$')) continue;
    size_t j = i + 1;
    while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') out.emplace_back(text.substr(i + 1, j - i - 1));
  }
  return out;
}

namespace {

bool isKebab(const std::string& s) {
  if (s.empty() || s.front() == '-' || s.back() == '-') return false;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    if (!ok || (c == '-' && s[i + 1] == '-')) return false;
  }
  return true;
}

bool isIdentifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const std::string& reason) const { throw RuleFormatError(file_, reason); }

  void onlyKeys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) const {
    if (!obj.is_object()) fail(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail("unknown key '" + key + "' in " + where);
    }
  }

  const json& require(const json& obj, const std::string& key, const std::string& where) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail("missing key '" + key + "' in " + where);
    return *it;
  }

  std::string string(const json& obj, const std::string& key, const std::string& where) const {
    const json& v = require(obj, key, where);
    if (!v.is_string()) fail("'" + key + "' in " + where + " must be a string");
    return v.get<std::string>();
  }

  std::int64_t integer(const json& obj, const std::string& key, const std::string& where) const {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) fail("'" + key + "' in " + where + " must be an integer");
    return v.get<std::int64_t>();
  }

 private:
  std::string file_;
};

void checkTemplate(const Reader& r, const std::string& text, const std::string& field,
                   bool objOnly) {
  for (const auto& p : templatePlaceholders(text)) {
    bool allowed = objOnly ? p == "obj"
                           : std::find(kTemplatePlaceholders.begin(), kTemplatePlaceholders.end(),
                                       p) != kTemplatePlaceholders.end();
    if (!allowed) r.fail("unknown placeholder {" + p + "} in " + field);
  }
}

}  // namespace

CompiledRule parseRule(const std::string& text, const std::string& file) {
  Reader r(file);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    r.fail(std::string("invalid JSON: ") + e.what());
  }
  r.onlyKeys(doc,
             {"id", "version", "class", "severity", "events", "order", "constraints", "message",
              "explanation", "noncompliant_example", "compliant_example", "quickfix"},
             "rule");

  Rule rule;
  rule.id = r.string(doc, "id", "rule");
  if (!isKebab(rule.id)) r.fail("id '" + rule.id + "' is not kebab-case");
  rule.version = static_cast<int>(r.integer(doc, "version", "rule"));
  rule.className = r.string(doc, "class", "rule");
  if (!isIdentifier(rule.className)) r.fail("class '" + rule.className + "' is not an identifier");
  auto sev = parseSeverity(r.string(doc, "severity", "rule"));
  if (!sev) r.fail("severity must be error, warning or info");
  rule.severity = *sev;

  const json& events = r.require(doc, "events", "rule");
  if (!events.is_object() || events.empty()) r.fail("events must be a non-empty object");
  for (const auto& [label, spec] : events.items()) {
    std::string where = "event " + label;
    if (!isIdentifier(label)) r.fail("label '" + label + "' is not a single identifier");
    r.onlyKeys(spec, {"kind", "name", "arity"}, where);
    EventSpec ev;
    std::string kind = r.string(spec, "kind", where);
    if (kind == "constructor")
      ev.kind = EventKind::Constructor;
    else if (kind == "method")
      ev.kind = EventKind::Method;
    else
      r.fail("kind of " + where + " must be constructor or method");
    ev.name = r.string(spec, "name", where);
    ev.arity = static_cast<int>(r.integer(spec, "arity", where));
    if (ev.arity < 0) r.fail("arity of " + where + " must be non-negative");
    if (ev.kind == EventKind::Constructor && ev.name != rule.className)
      r.fail("constructor " + where + " must be named " + rule.className);
    rule.events.emplace(label, std::move(ev));
  }

  rule.order = r.string(doc, "order", "rule");
  std::set<std::string> alphabet;
  for (const auto& [label, _] : rule.events) alphabet.insert(label);
  Dfa dfa;
  try {
    dfa = compileOrder(rule.order, alphabet);
  } catch (const RegexSyntaxError& e) {
    if (e.reason().rfind("undefined label", 0) == 0) r.fail(e.reason());
    r.fail("order: " + std::string(e.what()));
  }

  if (auto it = doc.find("constraints"); it != doc.end()) {
    if (!it->is_array()) r.fail("constraints must be an array");
    for (size_t k = 0; k < it->size(); ++k) {
      const json& c = (*it)[k];
      std::string where = "constraint " + std::to_string(k);
      r.onlyKeys(c, {"event", "arg", "check", "value"}, where);
      ConstraintSpec spec;
      spec.event = r.string(c, "event", where);
      auto ev = rule.events.find(spec.event);
      if (ev == rule.events.end()) r.fail("undefined label " + spec.event + " in " + where);
      spec.arg = static_cast<int>(r.integer(c, "arg", where));
      if (spec.arg < 0 || spec.arg >= ev->second.arity)
        r.fail("arg of " + where + " is out of range for arity " + std::to_string(ev->second.arity));
      std::string check = r.string(c, "check", where);
      const json& value = r.require(c, "value", where);
      if (check == "int_min") {
        spec.check = CheckKind::IntMin;
        if (!value.is_number_integer()) r.fail("int_min value in " + where + " must be an integer");
        spec.value = value.get<std::int64_t>();
      } else if (check == "string_allow" || check == "string_deny") {
        spec.check = check == "string_allow" ? CheckKind::StringAllow : CheckKind::StringDeny;
        if (!value.is_array()) r.fail(check + " value in " + where + " must be a list of strings");
        std::vector<std::string> values;
        for (const auto& v : value) {
          if (!v.is_string()) r.fail(check + " value in " + where + " must be a list of strings");
          values.push_back(v.get<std::string>());
        }
        spec.value = std::move(values);
      } else {
        r.fail("check of " + where + " must be int_min, string_allow or string_deny");
      }
      rule.constraints.push_back(std::move(spec));
    }
  }

  rule.message = r.string(doc, "message", "rule");
  checkTemplate(r, rule.message, "message", false);
  rule.explanation = r.string(doc, "explanation", "rule");
  rule.noncompliantExample = r.string(doc, "noncompliant_example", "rule");
  rule.compliantExample = r.string(doc, "compliant_example", "rule");

  if (auto it = doc.find("quickfix"); it != doc.end()) {
    r.onlyKeys(*it, {"kind", "text"}, "quickfix");
    QuickfixSpec q;
    q.kind = r.string(*it, "kind", "quickfix");
    if (q.kind != "insert_before_first_violation")
      r.fail("quickfix kind must be insert_before_first_violation");
    q.text = r.string(*it, "text", "quickfix");
    if (q.text.empty()) r.fail("quickfix text must not be empty");
    checkTemplate(r, q.text, "quickfix text", true);
    rule.quickfix = std::move(q);
  }

  return {std::move(rule), std::move(dfa)};
}

RuleLoadResult loadRules(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  RuleLoadResult out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 10 &&
        name.compare(name.size() - 10, 10, ".rule.json") == 0)
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::string> seen;  // id -> file
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    try {
      std::ifstream in(f, std::ios::binary);
      if (!in) throw RuleFormatError(name, "cannot read file");
      std::stringstream buf;
      buf << in.rdbuf();
      CompiledRule rule = parseRule(buf.str(), name);
      if (auto dup = seen.find(rule.rule.id); dup != seen.end())
        throw RuleFormatError(name, "duplicate id " + rule.rule.id + " (already defined in " +
                                        dup->second + ")");
      seen.emplace(rule.rule.id, name);
      out.ruleSet.rules.push_back(std::move(rule));
    } catch (const RuleFormatError& e) {
      out.errors.push_back(e);
    }
  }
  std::sort(out.ruleSet.rules.begin(), out.ruleSet.rules.end(),
            [](const CompiledRule& a, const CompiledRule& b) { return a.rule.id < b.rule.id; });
  return out;
}

}  // namespace cryptomate
