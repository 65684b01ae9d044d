#include "cryptomate/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cryptomate/lsp/stdio_server.hpp"
#include "cryptomate/pipeline.hpp"

#ifndef CRYPTOMATE_RULES_DIR
#define CRYPTOMATE_RULES_DIR "rules"
#endif

namespace cryptomate {

namespace fs = std::filesystem;

fs::path bundledRulesDir() { return CRYPTOMATE_RULES_DIR; }

std::string displayPath(const fs::path& p) {
  std::error_code ec;
  fs::path abs = fs::absolute(p, ec).lexically_normal();
  if (ec) return p.generic_string();
  fs::path cwd = fs::current_path(ec);
  if (!ec) {
    fs::path rel = abs.lexically_relative(cwd);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  }
  return abs.generic_string();
}

std::vector<fs::path> collectSources(const std::vector<std::string>& paths) {
  std::set<fs::path> files;
  for (const auto& p : paths) {
    fs::path path(p);
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::recursive_directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".mj")
          files.insert(entry.path().lexically_normal());
    } else if (fs::is_regular_file(path)) {
      files.insert(path.lexically_normal());
    } else {
      throw std::runtime_error("no such file or directory: " + p);
    }
  }
  return {files.begin(), files.end()};
}

namespace {

struct CommonOptions {
  std::string rulesDir;
  int budgetMs = AnalysisConfig{}.budgetMs;
  double minConfidence = AnalysisConfig{}.minConfidence;
  std::string storePath = ".cryptomate/feedback.json";
};

void addCommonOptions(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--rules", o.rulesDir, "Rules directory");
  cmd->add_option("--budget-ms", o.budgetMs, "Analysis time budget per file");
  cmd->add_option("--min-confidence", o.minConfidence, "Minimum confidence");
  cmd->add_option("--feedback-store", o.storePath, "Feedback store file");
}

fs::path rulesDirOf(const CommonOptions& o) {
  if (!o.rulesDir.empty()) return o.rulesDir;
  if (fs::is_directory("rules")) return "rules";
  return bundledRulesDir();
}

struct InputError {
  std::string what;
};

AnalysisConfig configOf(const CommonOptions& o) {
  AnalysisConfig c;
  c.budgetMs = o.budgetMs;
  c.minConfidence = o.minConfidence;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError{e.what()};
  }
  return c;
}

RuleSet loadRuleSet(const fs::path& dir, std::ostream& err) {
  if (!fs::is_directory(dir)) throw InputError{"rules directory not found: " + dir.string()};
  RuleLoadResult r = loadRules(dir);
  for (const auto& e : r.errors) err << "cryptomate: skipping rule " << e.what() << "\n";
  return std::move(r.ruleSet);
}

FeedbackStore loadStoreOrEmpty(const fs::path& path, std::ostream& err) {
  try {
    return loadStore(path);
  } catch (const StoreCorrupt& e) {
    err << "cryptomate: feedback store is corrupt, using an empty one (backup: " << e.path().string()
        << ".bad): " << e.what() << "\n";
    return {};
  }
}

std::string readFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError{"cannot read " + p.string()};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string formatConfidence(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

int severityRank(Severity s) {
  switch (s) {
    case Severity::Error: return 0;
    case Severity::Warning: return 1;
    case Severity::Info: return 2;
  }
  return 3;
}

int analyze(const std::vector<std::string>& paths, const CommonOptions& common, const std::string& format,
            const std::string& failOn, std::ostream& out, std::ostream& err) {
  AnalysisConfig config = configOf(common);
  RuleSet rules = loadRuleSet(rulesDirOf(common), err);
  FeedbackStore store = loadStoreOrEmpty(common.storePath, err);
  std::vector<fs::path> files;
  try {
    files = collectSources(paths);
  } catch (const std::runtime_error& e) {
    throw InputError{e.what()};
  }

  std::vector<Notification> all;
  bool syntaxErrors = false;
  for (const auto& file : files) {
    std::string source = readFile(file);
    const std::string shown = displayPath(file);
    // A fresh cost model per file keeps the output a function of the input.
    DocumentAnalysis a = analyzeDocument(shown, source, rules, config, CostModel{}, store);
    for (const auto& e : a.syntaxErrors) {
      err << shown << ":" << e.line << ":" << e.col << ": syntax error: " << e.message << "\n";
      syntaxErrors = true;
    }
    all.insert(all.end(), a.notifications.begin(), a.notifications.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const Notification& a, const Notification& b) {
    return a.finding.file < b.finding.file;
  });

  if (format == "json") {
    out << findingsReport(all).dump(2) << "\n";
  } else {
    for (const auto& n : all) {
      const auto& f = n.finding;
      out << f.file << ":" << f.location.line << ":" << f.location.col << " " << toString(n.severity) << " "
          << f.ruleId << " " << n.title << " [" << toString(f.strategy) << ","
          << formatConfidence(n.effectiveConfidence) << "]";
      if (n.suppressed) out << " (suppressed: " << toString(*n.suppressionReason) << ")";
      out << "\n";
    }
  }

  if (syntaxErrors) return exit_code::kUsage;
  if (failOn == "never") return exit_code::kClean;
  int threshold = failOn == "error" ? 0 : 1;
  bool failing = std::any_of(all.begin(), all.end(), [&](const Notification& n) {
    return !n.suppressed && severityRank(n.severity) <= threshold;
  });
  return failing ? exit_code::kFindings : exit_code::kClean;
}

int rulesCheck(const std::string& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) throw InputError{"rules directory not found: " + dir};
  RuleLoadResult r = loadRules(dir);
  for (const auto& e : r.errors) err << e.what() << "\n";
  out << r.ruleSet.size() << (r.ruleSet.size() == 1 ? " rule OK" : " rules OK");
  if (!r.errors.empty()) out << ", " << r.errors.size() << " invalid";
  out << "\n";
  return r.errors.empty() ? exit_code::kClean : exit_code::kUsage;
}

int feedbackStats(const std::string& storePath, std::ostream& out, std::ostream&) {
  FeedbackStore store;
  try {
    store = loadStore(storePath);
  } catch (const StoreCorrupt& e) {
    throw InputError{std::string("feedback store is corrupt (backup written to ") + e.path().string() +
                     ".bad): " + e.what()};
  }
  std::set<std::pair<std::string, Strategy>> keys;
  int verdicts = 0;
  for (const auto& [fp, rec] : store.records)
    for (const auto& v : rec.verdicts) {
      keys.insert({rec.ruleId, v.strategy});
      ++verdicts;
    }
  out << "fingerprints: " << store.records.size() << "\n";
  out << "verdicts: " << verdicts << "\n";
  for (const auto& [ruleId, strategy] : keys) {
    VerdictCounts c = store.counts(ruleId, strategy);
    out << ruleId << " " << toString(strategy) << " fp=" << c.fp << " tp=" << c.tp
        << " fp_rate=" << formatConfidence(smoothedRate(c)) << "\n";
  }
  return exit_code::kClean;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crypto API misuse analyzer for MiniJava-CF", "cryptomate"};
  app.require_subcommand(1);

  CommonOptions analyzeOpts;
  std::vector<std::string> paths;
  std::string format = "json";
  std::string failOn = "warning";
  auto* analyzeCmd = app.add_subcommand("analyze", "Analyze source files or directories");
  analyzeCmd->add_option("paths", paths, "Files or directories")->required();
  addCommonOptions(analyzeCmd, analyzeOpts);
  analyzeCmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
  analyzeCmd->add_option("--fail-on", failOn, "Lowest severity that fails the run")
      ->check(CLI::IsMember({"error", "warning", "never"}));

  CommonOptions serveOpts;
  bool stdio = false;
  auto* serveCmd = app.add_subcommand("serve", "Run the language server");
  serveCmd->add_flag("--stdio", stdio, "Communicate over stdin/stdout")->required();
  addCommonOptions(serveCmd, serveOpts);

  std::string rulesDir;
  auto* rulesCmd = app.add_subcommand("rules", "Rule pack tools");
  rulesCmd->require_subcommand(1);
  auto* checkCmd = rulesCmd->add_subcommand("check", "Validate a rules directory");
  checkCmd->add_option("dir", rulesDir, "Rules directory")->required();

  std::string statsStore = ".cryptomate/feedback.json";
  auto* feedbackCmd = app.add_subcommand("feedback", "Feedback store tools");
  feedbackCmd->require_subcommand(1);
  auto* statsCmd = feedbackCmd->add_subcommand("stats", "Summarize recorded verdicts");
  statsCmd->add_option("--feedback-store", statsStore, "Feedback store file");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_code::kClean;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kClean;
  } catch (const CLI::ParseError& e) {
    err << "cryptomate: " << e.what() << "\n" << app.help();
    return exit_code::kUsage;
  }

  try {
    if (*analyzeCmd) return analyze(paths, analyzeOpts, format, failOn, out, err);
    if (*serveCmd) {
      lsp::SessionOptions so;
      if (!serveOpts.rulesDir.empty()) so.rulesDir = serveOpts.rulesDir;
      so.fallbackRulesDir = bundledRulesDir();
      if (serveCmd->count("--feedback-store")) so.storePath = fs::absolute(serveOpts.storePath);
      so.config = configOf(serveOpts);
      return lsp::runStdioServer(in, out, std::move(so));
    }
    if (*checkCmd) return rulesCheck(rulesDir, out, err);
    if (*statsCmd) return feedbackStats(statsStore, out, err);
  } catch (const InputError& e) {
    err << "cryptomate: " << e.what << "\n";
    return exit_code::kUsage;
  } catch (const std::exception& e) {
    err << "cryptomate: internal error: " << e.what() << "\n";
    return exit_code::kInternal;
  }
  return exit_code::kUsage;
}

}  // namespace cryptomate
