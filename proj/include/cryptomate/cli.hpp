// Command line front end.
//
//   cryptomate analyze <path>... [--rules DIR] [--budget-ms N] [--min-confidence X]
//                      [--format json|text] [--feedback-store FILE]
//                      [--fail-on error|warning|never]
//   cryptomate serve --stdio [same options]
//   cryptomate rules check DIR
//   cryptomate feedback stats [--feedback-store FILE]
//
// Exit codes: 0 nothing reportable, 1 findings at or above --fail-on,
// 2 usage or input error, 3 internal error.
#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace cryptomate {

namespace exit_code {
inline constexpr int kClean = 0;
inline constexpr int kFindings = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInternal = 3;
}  // namespace exit_code

/// The rules shipped with the tool, used when --rules is absent and the
/// working directory has no rules/ directory.
std::filesystem::path bundledRulesDir();

/// Path as reported in findings: relative to the working directory when
/// inside it, otherwise absolute. Always '/'-separated.
std::string displayPath(const std::filesystem::path& p);

/// Every *.mj file under the given paths, sorted, without duplicates.
/// Throws std::runtime_error for a path that does not exist.
std::vector<std::filesystem::path> collectSources(const std::vector<std::string>& paths);

int runCli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
           std::ostream& err);

}  // namespace cryptomate
