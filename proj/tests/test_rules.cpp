#include <filesystem>
#include <fstream>

#include "cryptomate/rules.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cryptomate;
namespace fs = std::filesystem;

namespace {

nlohmann::json baseRule() {
  return nlohmann::json::parse(R"({
    "id": "demo-rule", "version": 1, "class": "Thing", "severity": "warning",
    "events": {"c": {"kind": "constructor", "name": "Thing", "arity": 0},
               "u": {"kind": "method", "name": "use", "arity": 1}},
    "order": "c u*",
    "constraints": [],
    "message": "Bad {obj} in {method}",
    "explanation": "x", "noncompliant_example": "y", "compliant_example": "z"
  })");
}

std::string reasonOf(const nlohmann::json& j) {
  try {
    parseRule(j.dump(), "t.rule.json");
  } catch (const RuleFormatError& e) {
    return e.reason();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cm-rules-" + std::to_string(std::rand()) + "-" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
};

}  // namespace

TEST_CASE("bundled pack loads") {
  auto r = loadRules(CM_SOURCE_DIR "/rules");
  CHECK(r.errors.empty());
  REQUIRE(r.ruleSet.size() == 3);
  const CompiledRule* enc = r.ruleSet.find("bc-ec-elgamal-encryptor");
  REQUIRE(enc);
  CHECK(enc->rule.order == "c i (i | e)*");
  CHECK(enc->rule.className == "ECElGamalEncryptor");
  CHECK(enc->rule.severity == Severity::Error);
  REQUIRE(enc->rule.quickfix);
  CHECK(r.ruleSet.find("weak-key-size"));
  CHECK(r.ruleSet.find("weak-cipher-name"));
  CHECK(r.ruleSet.rules[0].rule.id < r.ruleSet.rules[1].rule.id);
}

TEST_CASE("empty directory gives an empty rule set") {
  TempDir d;
  auto r = loadRules(d.path);
  CHECK(r.ruleSet.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("undefined label in order") {
  auto j = baseRule();
  j["order"] = "c z";
  CHECK(reasonOf(j) == "undefined label z");
}

TEST_CASE("valid rule parses and maps events") {
  CompiledRule r = parseRule(baseRule().dump());
  CHECK(r.rule.labelFor("Thing", true, 0) == std::optional<std::string>("c"));
  CHECK(r.rule.labelFor("use", false, 1) == std::optional<std::string>("u"));
  CHECK_FALSE(r.rule.labelFor("use", false, 2));
  CHECK_FALSE(r.rule.labelFor("Thing", false, 0));
  CHECK(r.dfa.accepts({"c", "u", "u"}));
}

TEST_CASE("validation errors") {
  auto mutate = [](auto f) {
    auto j = baseRule();
    f(j);
    return reasonOf(j);
  };
  CHECK(mutate([](auto& j) { j["id"] = "Not_Kebab"; }).find("kebab") != std::string::npos);
  CHECK(mutate([](auto& j) { j["severity"] = "fatal"; }).find("severity") != std::string::npos);
  CHECK(mutate([](auto& j) { j["bogus"] = 1; }).find("unknown key") != std::string::npos);
  CHECK(mutate([](auto& j) { j.erase("message"); }).find("missing key") != std::string::npos);
  CHECK(mutate([](auto& j) { j["events"]["c"]["name"] = "Other"; }).find("constructor") != std::string::npos);
  CHECK(mutate([](auto& j) { j["message"] = "Bad {thing}"; }).find("unknown placeholder") != std::string::npos);
  CHECK(mutate([](auto& j) { j["order"] = "c (u"; }).find("unclosed group") != std::string::npos);
  CHECK(mutate([](auto& j) {
          j["constraints"] = nlohmann::json::parse(R"([{"event":"u","arg":3,"check":"int_min","value":1}])");
        }).find("out of range") != std::string::npos);
  CHECK(mutate([](auto& j) {
          j["constraints"] = nlohmann::json::parse(R"([{"event":"u","arg":0,"check":"regex","value":1}])");
        }).find("check") != std::string::npos);
  CHECK(mutate([](auto& j) { j["quickfix"] = {{"kind", "replace"}, {"text", "x"}}; }).find("quickfix") !=
        std::string::npos);
  CHECK(reasonOf(nlohmann::json::array()) != "");
}

TEST_CASE("a broken file does not block the others") {
  TempDir d;
  d.write("a.rule.json", baseRule().dump());
  d.write("b.rule.json", "{ not json");
  auto dup = baseRule();
  d.write("c.rule.json", dup.dump());
  d.write("notes.txt", "ignored");
  auto r = loadRules(d.path);
  CHECK(r.ruleSet.size() == 1);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].file() == "b.rule.json");
  CHECK(r.errors[1].file() == "c.rule.json");
  CHECK(r.errors[1].reason().find("duplicate id") != std::string::npos);
}

TEST_CASE("template placeholders exclude snippet tabstops") {
  CHECK(templatePlaceholders("{obj}.init(${1:params}); {method}") == std::vector<std::string>{"obj", "method"});
}
