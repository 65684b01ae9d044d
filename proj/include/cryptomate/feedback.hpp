// Developer verdicts on findings, persisted as JSON.
//
// Store file layout:
//   {"version":1,"records":{"<hex16>":{"rule_id":"...",
//     "verdicts":[{"verdict":"fp","strategy":"S1","at":"2024-01-01T00:00:00Z"}]}}}
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cryptomate/analysis.hpp"

namespace cryptomate {

enum class VerdictKind { FalsePositive, TruePositive };

std::string_view toString(VerdictKind v);
std::optional<VerdictKind> parseVerdict(std::string_view s);

struct Verdict {
  VerdictKind verdict = VerdictKind::FalsePositive;
  Strategy strategy = Strategy::S0;
  std::string at;  // ISO-8601 UTC, second precision

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct FeedbackRecord {
  std::string ruleId;
  std::vector<Verdict> verdicts;

  friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

struct VerdictCounts {
  int fp = 0;
  int tp = 0;
  int total() const { return fp + tp; }
};

class FeedbackStore {
 public:
  static constexpr int kVersion = 1;

  std::map<std::string, FeedbackRecord> records;  // keyed by fingerprint hex

  /// Appends a verdict. Repeats count; a timestamp earlier than the last one
  /// in the record is raised to it so timestamps stay non-decreasing.
  void recordVerdict(const std::string& fingerprint, VerdictKind verdict, const std::string& ruleId,
                     Strategy strategy, std::string at);

  VerdictCounts counts(const std::string& fingerprint) const;
  VerdictCounts counts(const std::string& ruleId, Strategy strategy) const;

  /// Laplace-smoothed false-positive rate (fp + 1) / (n + 2).
  double fpRate(const std::string& fingerprint) const;
  double fpRate(const std::string& ruleId, Strategy strategy) const;

  friend bool operator==(const FeedbackStore&, const FeedbackStore&) = default;
};

double smoothedRate(const VerdictCounts& c);

class StoreCorrupt : public std::runtime_error {
 public:
  StoreCorrupt(std::filesystem::path path, const std::string& reason);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Missing file yields an empty store. A malformed file is copied to
/// `<path>.bad` before StoreCorrupt is thrown.
FeedbackStore loadStore(const std::filesystem::path& path);

/// Writes `<path>.tmp` and renames it over `path`.
void saveStore(const FeedbackStore& store, const std::filesystem::path& path);

std::string toJson(const FeedbackStore& store);
FeedbackStore storeFromJson(const std::string& text);  // throws std::runtime_error

std::string isoTimestamp(std::chrono::system_clock::time_point t);

}  // namespace cryptomate
