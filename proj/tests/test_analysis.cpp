#include <random>

#include "cryptomate/analysis.hpp"
#include "doctest.h"
#include "support/path_oracle.hpp"
#include "support/program_gen.hpp"

using namespace cryptomate;

namespace {

const RuleSet& bundled() {
  static const RuleSet rs = loadRules(CM_SOURCE_DIR "/rules").ruleSet;
  return rs;
}

struct Fixture {
  syntax::ParseResult parsed;
  Cfg cfg;
  std::vector<TrackedObject> objects;

  explicit Fixture(const std::string& body) {
    parsed = syntax::parseSource("void m(boolean b, Key k, byte[] d, int n) {\n" + body + "\n}\n", "t.mj");
    REQUIRE(parsed.ok());
    cfg = buildCfg(parsed.unit.methods[0]);
    objects = extractObjects(cfg);
  }

  std::vector<Finding> run(Strategy s, const std::string& ruleId = "bc-ec-elgamal-encryptor",
                           size_t obj = 0) const {
    AnalysisContext ctx{"t.mj", &cfg};
    return runStrategy(s, ctx, objects.at(obj), *bundled().find(ruleId));
  }

  std::vector<Finding> constraints(const std::string& ruleId) const {
    AnalysisContext ctx{"t.mj", &cfg};
    return checkConstraints(ctx, objects.at(0), *bundled().find(ruleId));
  }
};

const char* kCE = "ECElGamalEncryptor enc = new ECElGamalEncryptor();\nenc.encrypt(d);";
const char* kCIE = "ECElGamalEncryptor enc = new ECElGamalEncryptor();\nenc.init(k);\nenc.encrypt(d);";
const char* kMaybeInit =
    "ECElGamalEncryptor enc = new ECElGamalEncryptor();\nif (b) { enc.init(k); }\nenc.encrypt(d);";
const char* kBothInit =
    "ECElGamalEncryptor enc = new ECElGamalEncryptor();\nif (b) { enc.init(k); } else { enc.init(k); }\n"
    "enc.encrypt(d);";

}  // namespace

TEST_CASE("confidence table") {
  CHECK(baseConfidence(Strategy::S0, Certainty::Possible, FindingKind::IncompleteLifecycle) == 0.50);
  CHECK(baseConfidence(Strategy::S1, Certainty::Possible, FindingKind::IllegalTransition) == 0.70);
  CHECK(baseConfidence(Strategy::S1, Certainty::Definite, FindingKind::IllegalTransition) == 0.90);
  CHECK(baseConfidence(Strategy::S2, Certainty::Possible, FindingKind::IllegalTransition) == 0.85);
  CHECK(baseConfidence(Strategy::S2, Certainty::Definite, FindingKind::IncompleteLifecycle) == 0.95);
  CHECK(baseConfidence(Strategy::S1, Certainty::Definite, FindingKind::ConstraintViolation) == 0.95);
  CHECK(baseConfidence(Strategy::S2, Certainty::Possible, FindingKind::ConstraintViolation) == 0.60);
}

TEST_CASE("S0: missing init") {
  Fixture f(kCE);
  auto fs = f.run(Strategy::S0);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].kind == FindingKind::IncompleteLifecycle);
  CHECK(fs[0].certainty == Certainty::Possible);
  CHECK(fs[0].contextVars.at("missing") == "init");
  CHECK(fs[0].location.line == 2);
}

TEST_CASE("S0: complete usage and untouched objects are silent") {
  CHECK(Fixture(kCIE).run(Strategy::S0).empty());
  Fixture other("Thing t = new Thing();\nt.go();");
  CHECK(other.objects.size() == 1);
  AnalysisContext ctx{"t.mj", &other.cfg};
  for (Strategy s : {Strategy::S0, Strategy::S1, Strategy::S2})
    CHECK(runStrategy(s, ctx, other.objects[0], *bundled().find("bc-ec-elgamal-encryptor")).empty());
}

TEST_CASE("S1 and S2 on the basic shapes") {
  for (Strategy s : {Strategy::S1, Strategy::S2}) {
    CAPTURE(toString(s));
    auto ce = Fixture(kCE).run(s);
    REQUIRE(ce.size() == 1);
    CHECK(ce[0].kind == FindingKind::IllegalTransition);
    CHECK(ce[0].certainty == Certainty::Definite);
    CHECK(ce[0].location.line == 3);
    CHECK(ce[0].contextVars.at("method") == "encrypt");
    CHECK(ce[0].contextVars.at("obj") == "enc");
    CHECK(ce[0].strategy == s);

    auto maybe = Fixture(kMaybeInit).run(s);
    REQUIRE(maybe.size() == 1);
    CHECK(maybe[0].kind == FindingKind::IllegalTransition);
    CHECK(maybe[0].certainty == Certainty::Possible);
    CHECK(maybe[0].location.line == 4);

    CHECK(Fixture(kCIE).run(s).empty());
    CHECK(Fixture(kBothInit).run(s).empty());
  }
}

TEST_CASE("incomplete lifecycle at exit") {
  Fixture f("ECElGamalEncryptor enc = new ECElGamalEncryptor();");
  for (Strategy s : {Strategy::S1, Strategy::S2}) {
    auto fs = f.run(s);
    REQUIRE(fs.size() == 1);
    CHECK(fs[0].kind == FindingKind::IncompleteLifecycle);
    CHECK(fs[0].certainty == Certainty::Definite);
    CHECK(fs[0].contextVars.at("method") == "ECElGamalEncryptor");
  }
  Fixture g("ECElGamalEncryptor enc = new ECElGamalEncryptor();\nif (b) { enc.init(k); }");
  // S1 joins {after c, after ci}; an accepting state reaches the exit.
  CHECK(g.run(Strategy::S1).empty());
  auto fs = g.run(Strategy::S2);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].certainty == Certainty::Possible);
}

TEST_CASE("aliases carry events") {
  Fixture f("ECElGamalEncryptor enc = new ECElGamalEncryptor();\nECElGamalEncryptor e2 = enc;\ne2.init(k);\nenc.encrypt(d);");
  CHECK(f.run(Strategy::S2).empty());
  CHECK(f.run(Strategy::S1).empty());
}

TEST_CASE("loops are unrolled once by S2") {
  Fixture f("ECElGamalEncryptor enc = new ECElGamalEncryptor();\nwhile (b) { enc.init(k); }\nenc.encrypt(d);");
  auto fs = f.run(Strategy::S2);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].certainty == Certainty::Possible);
}

TEST_CASE("path bound truncation makes everything possible") {
  std::string body = "ECElGamalEncryptor enc = new ECElGamalEncryptor();\n";
  for (int k = 0; k < 8; ++k) body += "if (b) { n = 1; }\n";
  body += "enc.encrypt(d);";
  Fixture f(body);
  AnalysisContext ctx{"t.mj", &f.cfg};
  auto fs = runS2(ctx, f.objects[0], *bundled().find("bc-ec-elgamal-encryptor"), 64);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].certainty == Certainty::Possible);
  CHECK(fs[0].truncated);
  auto full = runS2(ctx, f.objects[0], *bundled().find("bc-ec-elgamal-encryptor"), 256);
  REQUIRE(full.size() == 1);
  CHECK(full[0].certainty == Certainty::Definite);
  CHECK_FALSE(full[0].truncated);
}

TEST_CASE("int_min constraint") {
  auto low = Fixture("KeyPairGenerator g = new KeyPairGenerator();\ng.init(1024);").constraints("weak-key-size");
  REQUIRE(low.size() == 1);
  CHECK(low[0].kind == FindingKind::ConstraintViolation);
  CHECK(low[0].certainty == Certainty::Definite);
  CHECK(low[0].contextVars.at("arg") == "1024");
  CHECK(Fixture("KeyPairGenerator g = new KeyPairGenerator();\ng.init(4096);").constraints("weak-key-size").empty());
  auto unknown = Fixture("KeyPairGenerator g = new KeyPairGenerator();\nint k = readKeySize();\ng.init(k);")
                     .constraints("weak-key-size");
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0].certainty == Certainty::Possible);
  CHECK(unknown[0].contextVars.count("arg") == 0);
  auto viaConst = Fixture("KeyPairGenerator g = new KeyPairGenerator();\nint k = 512;\ng.init(k);")
                      .constraints("weak-key-size");
  REQUIRE(viaConst.size() == 1);
  CHECK(viaConst[0].certainty == Certainty::Definite);
}

TEST_CASE("string_deny constraint") {
  auto des = Fixture("Cipher c = new Cipher(\"DES\");").constraints("weak-cipher-name");
  REQUIRE(des.size() == 1);
  CHECK(des[0].certainty == Certainty::Definite);
  CHECK(Fixture("Cipher c = new Cipher(\"rc4/ECB/NoPadding\");").constraints("weak-cipher-name").size() == 1);
  CHECK(Fixture("Cipher c = new Cipher(\"AES/GCM/NoPadding\");").constraints("weak-cipher-name").empty());
}

TEST_CASE("findings are sorted and deterministic") {
  Fixture f("ECElGamalEncryptor enc = new ECElGamalEncryptor();\nenc.encrypt(d);\nif (b) { enc.encrypt(d); }");
  auto a = f.run(Strategy::S1), b = f.run(Strategy::S1);
  CHECK(a == b);
  CHECK(std::is_sorted(a.begin(), a.end(), findingLess));
}

TEST_CASE("S2 matches the path oracle on a sample of generated programs") {
  const CompiledRule& rule = *bundled().find("bc-ec-elgamal-encryptor");
  auto re = cmtest::parseReference(rule.rule.order);
  cmtest::OracleEvents ev{"enc", {{"init", "i"}, {"encrypt", "e"}}, "c"};
  int n = 0;
  cmtest::forEachBranchProgram(9, 2, [&](const syntax::MethodDecl& m) {
    Cfg cfg = buildCfg(m);
    auto objs = extractObjects(cfg);
    AnalysisContext ctx{"g.mj", &cfg};
    std::set<cmtest::OracleFinding> got;
    for (const auto& f : runS2(ctx, objs.at(0), rule))
      got.insert({std::string(toString(f.kind)), std::string(toString(f.certainty)), f.location.line});
    auto want = cmtest::oracleFindings(m, re, ev);
    if (got != want) {
      INFO(cmtest::toSource(m));
      CHECK(got == want);
    }
    ++n;
  });
  CHECK(n > 1000);
}

TEST_CASE("soundness and precision ladders on loop-free programs") {
  const CompiledRule& rule = *bundled().find("bc-ec-elgamal-encryptor");
  cmtest::forEachBranchProgram(9, 2, [&](const syntax::MethodDecl& m) {
    Cfg cfg = buildCfg(m);
    bool loops = false;
    for (const auto& node : cfg.nodes) loops |= node.kind == NodeKind::LoopHeader;
    auto objs = extractObjects(cfg);
    AnalysisContext ctx{"g.mj", &cfg};
    auto s1 = runS1(ctx, objs.at(0), rule);
    auto s2 = runS2(ctx, objs.at(0), rule);
    auto has = [](const std::vector<Finding>& fs, const Finding& f) {
      return std::any_of(fs.begin(), fs.end(),
                         [&](const Finding& g) { return g.kind == f.kind && g.location == f.location; });
    };
    for (const auto& f : s2)
      if (f.certainty == Certainty::Definite) CHECK(has(s1, f));
    if (!loops)
      for (const auto& f : s1)
        if (f.certainty == Certainty::Definite) CHECK(has(s2, f));
    if (s2.empty())
      for (const auto& f : s1) CHECK(f.certainty != Certainty::Definite);
  });
}
