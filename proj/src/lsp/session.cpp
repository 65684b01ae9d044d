#include "cryptomate/lsp/session.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cstdio>

namespace cryptomate::lsp {

namespace fs = std::filesystem;

namespace {

struct InvalidParams {
  std::string what;
};

struct RpcError {
  int code;
  std::string what;
};

Json response(const Json& id, Json result) {
  return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

Json errorResponse(const Json& id, int code, const std::string& message) {
  return {{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}};
}

Json notification(const std::string& method, Json params) {
  return {{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}};
}

const Json& member(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw InvalidParams{std::string("missing ") + key};
  return obj.at(key);
}

std::string stringMember(const Json& obj, const char* key) {
  const Json& v = member(obj, key);
  if (!v.is_string()) throw InvalidParams{std::string(key) + " must be a string"};
  return v.get<std::string>();
}

int intMember(const Json& obj, const char* key) {
  const Json& v = member(obj, key);
  if (!v.is_number_integer()) throw InvalidParams{std::string(key) + " must be an integer"};
  return v.get<int>();
}

std::string_view lineOf(std::string_view text, int line) {
  size_t pos = 0;
  for (int l = 1; l < line; ++l) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) return {};
    pos = eol + 1;
  }
  size_t eol = text.find('\n', pos);
  std::string_view out = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
  if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
  return out;
}

Json position(int line, int character) { return {{"line", line}, {"character", character}}; }

std::pair<int, int> positionOf(const Json& p) {
  return {intMember(p, "line"), intMember(p, "character")};
}

int lspSeverity(Severity s) {
  switch (s) {
    case Severity::Error: return 1;
    case Severity::Warning: return 2;
    case Severity::Info: return 3;
  }
  return 3;
}

constexpr int kHint = 4;
constexpr int kTagUnnecessary = 1;

std::string defaultTimestamp() { return isoTimestamp(std::chrono::system_clock::now()); }

}  // namespace

int utf16Column(std::string_view line, int byteCol) {
  size_t limit = std::min(line.size(), static_cast<size_t>(std::max(0, byteCol - 1)));
  int units = 0;
  for (size_t i = 0; i < limit;) {
    unsigned char c = static_cast<unsigned char>(line[i]);
    size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    units += len == 4 ? 2 : 1;
    i += len;
  }
  return units;
}

std::string uriToPath(std::string_view uri) {
  constexpr std::string_view kScheme = "file://";
  if (uri.substr(0, kScheme.size()) != kScheme) return std::string(uri);
  std::string_view rest = uri.substr(kScheme.size());
  std::string out;
  for (size_t i = 0; i < rest.size(); ++i) {
    if (rest[i] == '%' && i + 2 < rest.size()) {
      unsigned value = 0;
      if (std::sscanf(std::string(rest.substr(i + 1, 2)).c_str(), "%2x", &value) == 1) {
        out += static_cast<char>(value);
        i += 2;
        continue;
      }
    }
    out += rest[i];
  }
  return out;
}

std::string pathToUri(const fs::path& path) {
  std::string out = "file://";
  for (unsigned char c : path.generic_string()) {
    if (std::isalnum(c) || c == '/' || c == '-' || c == '.' || c == '_' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

JobResult runJob(const AnalysisJob& job) {
  JobResult r;
  try {
    r.analysis = analyzeDocument(job.relPath, job.text, *job.rules, job.config, job.cost, job.store);
  } catch (const std::exception& e) {
    r.failure = e.what();
  }
  return r;
}

Json logMessage(int type, const std::string& message) {
  return notification("window/logMessage", {{"type", type}, {"message", message}});
}

Json showMessage(int type, const std::string& message) {
  return notification("window/showMessage", {{"type", type}, {"message", message}});
}

Session::Session(SessionOptions options) : options_(std::move(options)) {
  if (!options_.timestamp) options_.timestamp = defaultTimestamp;
  rules_ = std::make_shared<RuleSet>();
}

std::vector<Json> Session::onMessage(const Json& msg, Millis now) {
  if (!msg.is_object() || !msg.contains("method") || !msg["method"].is_string()) {
    if (msg.is_object() && msg.contains("id") && !msg.contains("result") && !msg.contains("error"))
      return {errorResponse(msg["id"], error_code::kInvalidRequest, "missing method")};
    return {};  // a response from the client, or garbage without an id
  }
  if (msg.contains("id")) return handleRequest(msg, now);
  return handleNotification(msg, now);
}

std::vector<Json> Session::handleRequest(const Json& msg, Millis now) {
  const Json& id = msg["id"];
  const std::string method = msg["method"].get<std::string>();
  const Json params = msg.value("params", Json::object());
  std::vector<Json> out;
  if (shutdown_) return {errorResponse(id, error_code::kInvalidRequest, "server is shut down")};
  if (!initialized_ && method != "initialize")
    return {errorResponse(id, error_code::kServerNotInitialized, "server not initialized")};
  try {
    if (method == "initialize") {
      if (initialized_) throw RpcError{error_code::kInvalidRequest, "already initialized"};
      Json result = initialize(params, out);
      out.insert(out.begin(), response(id, std::move(result)));
    } else if (method == "shutdown") {
      shutdown_ = true;
      out.push_back(response(id, nullptr));
    } else if (method == "textDocument/codeAction") {
      out.push_back(response(id, codeAction(params)));
    } else if (method == "workspace/executeCommand") {
      Json result = executeCommand(params, now, out);
      out.insert(out.begin(), response(id, std::move(result)));
    } else {
      out.push_back(errorResponse(id, error_code::kMethodNotFound, "method not found: " + method));
    }
  } catch (const InvalidParams& e) {
    return {errorResponse(id, error_code::kInvalidParams, e.what)};
  } catch (const RpcError& e) {
    return {errorResponse(id, e.code, e.what)};
  } catch (const Json::exception& e) {
    return {errorResponse(id, error_code::kInvalidParams, e.what())};
  }
  return out;
}

std::vector<Json> Session::handleNotification(const Json& msg, Millis now) {
  const std::string method = msg["method"].get<std::string>();
  const Json params = msg.value("params", Json::object());
  std::vector<Json> out;
  if (method == "exit") {
    exitRequested_ = true;
    return out;
  }
  if (!initialized_ || shutdown_) return out;
  try {
    if (method == "textDocument/didOpen")
      didOpen(params, now, out);
    else if (method == "textDocument/didChange")
      didChange(params, now, out);
    else if (method == "textDocument/didSave")
      didSave(params, now, out);
    else if (method == "textDocument/didClose")
      didClose(params, out);
  } catch (const InvalidParams& e) {
    out.push_back(logMessage(1, method + ": " + e.what));
  } catch (const Json::exception& e) {
    out.push_back(logMessage(1, method + ": " + e.what()));
  }
  return out;
}

Json Session::initialize(const Json& params, std::vector<Json>& out) {
  if (params.contains("rootUri") && params["rootUri"].is_string())
    root_ = fs::path(uriToPath(params["rootUri"].get<std::string>()));
  else if (params.contains("rootPath") && params["rootPath"].is_string())
    root_ = fs::path(params["rootPath"].get<std::string>());

  const fs::path base = root_ ? *root_ : fs::current_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  Json opts = params.value("initializationOptions", Json::object());
  if (opts.is_null()) opts = Json::object();
  if (!opts.is_object()) throw InvalidParams{"initializationOptions must be an object"};

  AnalysisConfig config = options_.config;
  if (opts.contains("budget_ms")) config.budgetMs = intMember(opts, "budget_ms");
  if (opts.contains("min_confidence")) {
    if (!opts["min_confidence"].is_number()) throw InvalidParams{"min_confidence must be a number"};
    config.minConfidence = opts["min_confidence"].get<double>();
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw InvalidParams{e.what()};
  }

  fs::path rulesDir;
  if (opts.contains("rules_dir"))
    rulesDir = resolve(stringMember(opts, "rules_dir"));
  else if (options_.rulesDir)
    rulesDir = *options_.rulesDir;
  else if (root_ && fs::is_directory(*root_ / "rules"))
    rulesDir = *root_ / "rules";
  else
    rulesDir = options_.fallbackRulesDir;

  if (opts.contains("feedback_store"))
    storePath_ = resolve(stringMember(opts, "feedback_store"));
  else if (options_.storePath)
    storePath_ = *options_.storePath;
  else
    storePath_ = base / ".cryptomate" / "feedback.json";

  config_ = config;
  auto rules = std::make_shared<RuleSet>();
  try {
    RuleLoadResult loaded = loadRules(rulesDir);
    for (const auto& e : loaded.errors) out.push_back(logMessage(2, e.what()));
    *rules = std::move(loaded.ruleSet);
  } catch (const fs::filesystem_error& e) {
    out.push_back(logMessage(1, "cannot load rules from " + rulesDir.string() + ": " + e.what()));
  }
  rules_ = rules;

  try {
    store_ = loadStore(storePath_);
  } catch (const StoreCorrupt& e) {
    store_ = {};
    out.push_back(showMessage(2, std::string("feedback store is corrupt, starting empty: ") + e.what()));
  }
  initialized_ = true;

  return {{"capabilities",
           {{"textDocumentSync", {{"openClose", true}, {"change", 1}, {"save", {{"includeText", false}}}}},
            {"codeActionProvider", {{"codeActionKinds", {"quickfix"}}}},
            {"executeCommandProvider", {{"commands", {kFeedbackCommand}}}}}},
          {"serverInfo", {{"name", "cryptomate"}, {"version", "0.1.0"}}}};
}

void Session::didOpen(const Json& params, Millis now, std::vector<Json>&) {
  const Json& td = member(params, "textDocument");
  std::string uri = stringMember(td, "uri");
  Document doc;
  doc.text = stringMember(td, "text");
  doc.version = td.contains("version") ? intMember(td, "version") : 0;
  doc.dueAt = now + kDebounceMs;
  docs_[uri] = std::move(doc);
}

void Session::didChange(const Json& params, Millis now, std::vector<Json>& out) {
  const Json& td = member(params, "textDocument");
  std::string uri = stringMember(td, "uri");
  int version = intMember(td, "version");
  const Json& changes = member(params, "contentChanges");
  if (!changes.is_array() || changes.empty()) throw InvalidParams{"contentChanges must be a non-empty array"};
  const Json& last = changes.back();
  if (last.contains("range")) throw InvalidParams{"only full-document sync is supported"};
  std::string text = stringMember(last, "text");

  auto it = docs_.find(uri);
  if (it == docs_.end()) {
    out.push_back(logMessage(2, "didChange for unopened document " + uri));
    return;
  }
  Document& doc = it->second;
  if (version <= doc.version) {
    out.push_back(logMessage(2, "ignoring out-of-order version " + std::to_string(version) + " of " + uri));
    return;
  }
  doc.text = std::move(text);
  doc.version = version;
  doc.dueAt = now + kDebounceMs;

  doc.edits.push_back(now);
  while (doc.edits.size() > kEditRingSize) doc.edits.pop_front();
  int recent = static_cast<int>(
      std::count_if(doc.edits.begin(), doc.edits.end(), [&](Millis t) { return t > now - kQuietWindowMs; }));
  if (recent >= kQuietEditCount && doc.mode == DisplayMode::Normal) setMode(uri, doc, DisplayMode::Quiet, out);
}

void Session::didSave(const Json& params, Millis now, std::vector<Json>& out) {
  const Json& td = member(params, "textDocument");
  std::string uri = stringMember(td, "uri");
  auto it = docs_.find(uri);
  if (it == docs_.end()) return;
  Document& doc = it->second;
  doc.edits.clear();
  if (doc.mode == DisplayMode::Quiet) setMode(uri, doc, DisplayMode::Normal, out);
  doc.dueAt = now + kDebounceMs;
}

void Session::didClose(const Json& params, std::vector<Json>& out) {
  const Json& td = member(params, "textDocument");
  std::string uri = stringMember(td, "uri");
  if (docs_.erase(uri))
    out.push_back(notification("textDocument/publishDiagnostics",
                               {{"uri", uri}, {"diagnostics", Json::array()}}));
}

void Session::setMode(const std::string& uri, Document& doc, DisplayMode mode, std::vector<Json>& out) {
  doc.mode = mode;
  out.push_back(notification(kQuietModeNotification,
                             {{"uri", uri}, {"mode", mode == DisplayMode::Quiet ? "quiet" : "normal"}}));
  // Only a result for the current text may be shown again.
  if (doc.published && doc.published->version == doc.version) out.push_back(publish(uri, doc));
}

DisplayMode Session::mode(const std::string& uri) const {
  auto it = docs_.find(uri);
  return it == docs_.end() ? DisplayMode::Normal : it->second.mode;
}

std::vector<Json> Session::onTick(Millis now) {
  std::vector<Json> out;
  for (auto& [uri, doc] : docs_) {
    if (doc.mode == DisplayMode::Quiet && !doc.edits.empty() && doc.edits.back() + kQuietIdleMs <= now)
      setMode(uri, doc, DisplayMode::Normal, out);
  }
  return out;
}

std::optional<Millis> Session::nextDeadline() const {
  std::optional<Millis> best;
  auto consider = [&](Millis t) {
    if (!best || t < *best) best = t;
  };
  for (const auto& [uri, doc] : docs_) {
    if (doc.dueAt && !doc.inFlight) consider(*doc.dueAt);
    if (doc.mode == DisplayMode::Quiet && !doc.edits.empty()) consider(doc.edits.back() + kQuietIdleMs);
  }
  return best;
}

std::string Session::relPathOf(const std::string& uri) const {
  fs::path path = uriToPath(uri);
  auto under = [&](const fs::path& base) -> std::optional<std::string> {
    if (!path.is_absolute()) return std::nullopt;
    fs::path rel = path.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    return rel.generic_string();
  };
  if (root_)
    if (auto r = under(*root_)) return *r;
  std::error_code ec;
  fs::path cwd = fs::current_path(ec);
  if (!ec)
    if (auto r = under(cwd)) return *r;
  return path.generic_string();
}

std::vector<AnalysisJob> Session::takeDueJobs(Millis now) {
  std::vector<AnalysisJob> jobs;
  for (auto& [uri, doc] : docs_) {
    if (!doc.dueAt || doc.inFlight || *doc.dueAt > now) continue;
    doc.dueAt.reset();
    doc.inFlight = true;
    AnalysisJob job;
    job.uri = uri;
    job.version = doc.version;
    job.text = doc.text;
    job.relPath = relPathOf(uri);
    job.rules = rules_;
    job.config = config_;
    job.cost = cost_;
    job.store = store_;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::vector<Json> Session::completeJob(const AnalysisJob& job, const JobResult& result, Millis) {
  std::vector<Json> out;
  if (result.analysis)
    for (const auto& s : result.analysis->schedule.samples) cost_.record(s.ruleId, s.strategy, s.elapsedMs);
  auto it = docs_.find(job.uri);
  if (it == docs_.end()) return out;
  Document& doc = it->second;
  doc.inFlight = false;
  if (job.version != doc.version) return out;  // stale; a newer analysis is due

  Published p;
  p.version = job.version;
  p.text = job.text;
  if (result.analysis) {
    p.analysis = *result.analysis;
  } else {
    out.push_back(logMessage(1, "analysis of " + job.uri + " failed: " + result.failure));
  }
  doc.published = std::move(p);
  out.push_back(publish(job.uri, doc));
  return out;
}

std::vector<Json> Session::runDue(Millis now) {
  std::vector<Json> out = onTick(now);
  for (;;) {
    auto jobs = takeDueJobs(now);
    if (jobs.empty()) break;
    for (const auto& job : jobs) {
      auto msgs = completeJob(job, runJob(job), now);
      out.insert(out.end(), msgs.begin(), msgs.end());
    }
  }
  return out;
}

Json Session::diagnosticFor(const Document& doc, const Notification& n) const {
  const auto& loc = n.finding.location;
  const std::string& text = doc.published->text;
  Json range = {{"start", position(loc.line - 1, utf16Column(lineOf(text, loc.line), loc.col))},
                {"end", position(loc.endLine - 1, utf16Column(lineOf(text, loc.endLine), loc.endCol))}};
  int severity = (n.suppressed || doc.mode == DisplayMode::Quiet) ? kHint : lspSeverity(n.severity);
  Json data = {{"fingerprint", n.fingerprint.hex()},
               {"ruleId", n.finding.ruleId},
               {"strategy", toString(n.finding.strategy)},
               {"certainty", toString(n.finding.certainty)},
               {"confidence", n.effectiveConfidence},
               {"explanation", n.explanation},
               {"noncompliantExample", n.noncompliantExample},
               {"compliantExample", n.compliantExample},
               {"suppressed", n.suppressed},
               {"finding", Json::parse(findingJson(n).dump())}};
  if (n.suppressionReason) data["suppressionReason"] = toString(*n.suppressionReason);
  Json d = {{"range", std::move(range)},
            {"severity", severity},
            {"code", n.finding.ruleId},
            {"source", "cryptomate"},
            {"message", n.title},
            {"data", std::move(data)}};
  if (n.suppressed) d["tags"] = {kTagUnnecessary};
  return d;
}

Json Session::publish(const std::string& uri, const Document& doc) const {
  Json diags = Json::array();
  if (doc.published && doc.published->analysis) {
    const DocumentAnalysis& a = *doc.published->analysis;
    const std::string& text = doc.published->text;
    for (const auto& e : a.syntaxErrors) {
      int ch = utf16Column(lineOf(text, e.line), e.col);
      diags.push_back({{"range", {{"start", position(e.line - 1, ch)}, {"end", position(e.line - 1, ch)}}},
                       {"severity", doc.mode == DisplayMode::Quiet ? kHint : 1},
                       {"code", "syntax-error"},
                       {"source", "cryptomate"},
                       {"message", e.message}});
    }
    for (const auto& n : a.notifications) diags.push_back(diagnosticFor(doc, n));
  }
  Json params = {{"uri", uri}, {"diagnostics", std::move(diags)}};
  if (doc.published) params["version"] = doc.published->version;
  return notification("textDocument/publishDiagnostics", std::move(params));
}

Json Session::codeAction(const Json& params) const {
  const Json& td = member(params, "textDocument");
  std::string uri = stringMember(td, "uri");
  const Json& range = member(params, "range");
  auto reqStart = positionOf(member(range, "start"));
  auto reqEnd = positionOf(member(range, "end"));
  const Json& context = member(params, "context");
  const Json& diagnostics = member(context, "diagnostics");
  if (!diagnostics.is_array()) throw InvalidParams{"context.diagnostics must be an array"};

  auto docIt = docs_.find(uri);
  const Document* doc = docIt == docs_.end() ? nullptr : &docIt->second;
  Json actions = Json::array();
  for (const Json& diag : diagnostics) {
    if (!diag.contains("data") || !diag["data"].is_object() || !diag["data"].contains("fingerprint")) continue;
    const Json& drange = member(diag, "range");
    auto dStart = positionOf(member(drange, "start"));
    auto dEnd = positionOf(member(drange, "end"));
    if (dEnd < reqStart || reqEnd < dStart) continue;

    const Json& data = diag["data"];
    std::string fp = stringMember(data, "fingerprint");
    std::string ruleId = stringMember(data, "ruleId");
    std::string strategy = stringMember(data, "strategy");

    const Notification* match = nullptr;
    if (doc && doc->published && doc->published->analysis && doc->published->version == doc->version)
      for (const auto& n : doc->published->analysis->notifications)
        if (n.fingerprint.hex() == fp && n.finding.location.line - 1 == dStart.first) {
          match = &n;
          break;
        }

    if (match && match->quickfix) {
      const TextEdit& e = *match->quickfix;
      int ch = utf16Column(lineOf(doc->text, e.line), e.col);
      Json edit = {{"range", {{"start", position(e.line - 1, ch)}, {"end", position(e.line - 1, ch)}}},
                   {"newText", e.newText}};
      actions.push_back({{"title", "Fix: " + match->title},
                         {"kind", "quickfix"},
                         {"diagnostics", {diag}},
                         {"isPreferred", true},
                         {"edit", {{"changes", {{uri, {edit}}}}}}});
    }

    std::string lineText = doc ? std::string(lineOf(doc->text, dStart.first + 1)) : std::string();
    std::string indent = lineText.substr(0, lineText.find_first_not_of(" \t") == std::string::npos
                                                ? lineText.size()
                                                : lineText.find_first_not_of(" \t"));
    std::string eol = doc && doc->text.find("\r\n") != std::string::npos ? "\r\n" : "\n";
    Json suppressEdit = {{"range", {{"start", position(dStart.first, 0)}, {"end", position(dStart.first, 0)}}},
                         {"newText", indent + "// cm:allow " + ruleId + eol}};
    actions.push_back({{"title", "Suppress with annotation"},
                       {"kind", "quickfix"},
                       {"diagnostics", {diag}},
                       {"edit", {{"changes", {{uri, {suppressEdit}}}}}}});

    for (const auto& [title, verdict] : {std::pair{"Mark as false positive", "fp"},
                                         std::pair{"Mark as true positive", "tp"}}) {
      actions.push_back({{"title", title},
                         {"kind", "quickfix"},
                         {"diagnostics", {diag}},
                         {"command",
                          {{"title", title},
                           {"command", kFeedbackCommand},
                           {"arguments", {fp, verdict, ruleId, strategy}}}}});
    }
  }
  return actions;
}

Json Session::executeCommand(const Json& params, Millis now, std::vector<Json>& out) {
  std::string command = stringMember(params, "command");
  if (command != kFeedbackCommand) throw InvalidParams{"unknown command " + command};
  const Json& args = member(params, "arguments");
  if (!args.is_array() || args.size() != 4 ||
      !std::all_of(args.begin(), args.end(), [](const Json& a) { return a.is_string(); }))
    throw InvalidParams{"expected [fingerprint, verdict, ruleId, strategy]"};
  auto verdict = parseVerdict(args[1].get<std::string>());
  auto strategy = parseStrategy(args[3].get<std::string>());
  if (!verdict) throw InvalidParams{"verdict must be fp or tp"};
  if (!strategy) throw InvalidParams{"strategy must be S0, S1 or S2"};

  store_.recordVerdict(args[0].get<std::string>(), *verdict, args[2].get<std::string>(), *strategy,
                       options_.timestamp());
  try {
    saveStore(store_, storePath_);
  } catch (const std::exception& e) {
    out.push_back(showMessage(2, std::string("cannot save feedback store: ") + e.what()));
  }
  for (auto& [uri, doc] : docs_) doc.dueAt = now;
  return nullptr;
}

}  // namespace cryptomate::lsp
