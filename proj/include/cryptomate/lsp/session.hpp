// Language server session: protocol state, open documents, debounced
// analysis, quiet mode and feedback commands.
//
// The session never reads a clock. Every entry point takes the current time
// in milliseconds on a monotonic scale, and analyses are handed out as jobs
// so the caller decides where they run. Tests drive it synchronously; the
// stdio driver runs jobs on a worker thread.
#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cryptomate/pipeline.hpp"
#include "json.hpp"

namespace cryptomate::lsp {

using Json = nlohmann::json;
using Millis = std::int64_t;

inline constexpr Millis kDebounceMs = 300;
inline constexpr Millis kQuietWindowMs = 1500;
inline constexpr int kQuietEditCount = 3;
inline constexpr Millis kQuietIdleMs = 3000;
inline constexpr size_t kEditRingSize = 8;

inline constexpr const char* kFeedbackCommand = "cryptomate.feedback";
inline constexpr const char* kQuietModeNotification = "cryptomate/quietMode";

namespace error_code {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
inline constexpr int kServerNotInitialized = -32002;
}  // namespace error_code

enum class DisplayMode { Normal, Quiet };

/// Server-side defaults; initializationOptions override every field.
struct SessionOptions {
  /// Rules directory given on the command line. Without it the workspace's
  /// rules/ directory is used, then `fallbackRulesDir`.
  std::optional<std::filesystem::path> rulesDir;
  std::filesystem::path fallbackRulesDir;
  /// Default: <workspace root>/.cryptomate/feedback.json.
  std::optional<std::filesystem::path> storePath;
  AnalysisConfig config;
  /// Verdict timestamps; wall clock by default.
  std::function<std::string()> timestamp;
};

/// Everything one analysis needs, copied so it can run off the session thread.
struct AnalysisJob {
  std::string uri;
  int version = 0;
  std::string text;
  std::string relPath;
  std::shared_ptr<const RuleSet> rules;
  AnalysisConfig config;
  CostModel cost;
  FeedbackStore store;
};

struct JobResult {
  std::optional<DocumentAnalysis> analysis;
  std::string failure;  // set when the pipeline threw
};

JobResult runJob(const AnalysisJob& job);

/// 0-based UTF-16 offset of 1-based byte column `byteCol` in `line`.
int utf16Column(std::string_view line, int byteCol);

std::string uriToPath(std::string_view uri);
std::string pathToUri(const std::filesystem::path& path);

class Session {
 public:
  explicit Session(SessionOptions options = {});

  /// Handles one decoded JSON-RPC message; returns responses and
  /// notifications to send, in order.
  std::vector<Json> onMessage(const Json& msg, Millis now);

  /// Quiet-mode expiry. Call at or after nextDeadline().
  std::vector<Json> onTick(Millis now);

  /// Analyses whose debounce elapsed. At most one job per document is in
  /// flight; the document is busy until completeJob.
  std::vector<AnalysisJob> takeDueJobs(Millis now);

  /// Publishes a finished job unless its document changed or closed since.
  std::vector<Json> completeJob(const AnalysisJob& job, const JobResult& result, Millis now);

  /// onTick, then every due job run inline until none is left.
  std::vector<Json> runDue(Millis now);

  /// Earliest time at which onTick or takeDueJobs has work.
  std::optional<Millis> nextDeadline() const;

  bool exitRequested() const { return exitRequested_; }
  int exitCode() const { return shutdown_ ? 0 : 1; }

  DisplayMode mode(const std::string& uri) const;
  const FeedbackStore& store() const { return store_; }
  const CostModel& costModel() const { return cost_; }
  const AnalysisConfig& config() const { return config_; }

 private:
  struct Published {
    int version = 0;
    std::string text;
    std::optional<DocumentAnalysis> analysis;  // empty when the analysis failed
  };

  struct Document {
    std::string text;
    int version = 0;
    std::optional<Millis> dueAt;
    bool inFlight = false;
    std::deque<Millis> edits;  // recent didChange times
    DisplayMode mode = DisplayMode::Normal;
    std::optional<Published> published;
  };

  std::vector<Json> handleRequest(const Json& msg, Millis now);
  std::vector<Json> handleNotification(const Json& msg, Millis now);

  Json initialize(const Json& params, std::vector<Json>& out);
  void didOpen(const Json& params, Millis now, std::vector<Json>& out);
  void didChange(const Json& params, Millis now, std::vector<Json>& out);
  void didSave(const Json& params, Millis now, std::vector<Json>& out);
  void didClose(const Json& params, std::vector<Json>& out);
  Json codeAction(const Json& params) const;
  Json executeCommand(const Json& params, Millis now, std::vector<Json>& out);

  void setMode(const std::string& uri, Document& doc, DisplayMode mode, std::vector<Json>& out);
  Json publish(const std::string& uri, const Document& doc) const;
  Json diagnosticFor(const Document& doc, const Notification& n) const;
  std::string relPathOf(const std::string& uri) const;

  SessionOptions options_;
  bool initialized_ = false;
  bool shutdown_ = false;
  bool exitRequested_ = false;
  std::optional<std::filesystem::path> root_;
  std::filesystem::path storePath_;
  std::shared_ptr<const RuleSet> rules_;
  AnalysisConfig config_;
  CostModel cost_;
  FeedbackStore store_;
  std::map<std::string, Document> docs_;
};

Json logMessage(int type, const std::string& message);
Json showMessage(int type, const std::string& message);

}  // namespace cryptomate::lsp
