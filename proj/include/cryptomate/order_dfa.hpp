// Compilation of ORDER patterns (regular expressions over event labels) into
// total deterministic automata.
//
// Pattern syntax: labels are identifiers; juxtaposition concatenates;
// `|` alternates; postfix `*`, `+`, `?`; parentheses group. Whitespace only
// separates labels.
#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cryptomate {

class RegexSyntaxError : public std::runtime_error {
 public:
  RegexSyntaxError(size_t position, const std::string& reason);
  /// 0-based byte offset into the pattern.
  size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  size_t position_;
  std::string reason_;
};

class Dfa {
 public:
  std::vector<std::string> alphabet;  // sorted
  int stateCount = 0;
  int start = 0;
  int dead = 0;
  std::vector<int> delta;  // stateCount * alphabet.size()
  std::vector<bool> accepting;
  std::set<std::string> requiredLabels;

  std::optional<int> labelIndex(std::string_view label) const;
  int step(int state, int labelIdx) const {
    return delta[static_cast<size_t>(state) * alphabet.size() + static_cast<size_t>(labelIdx)];
  }
  /// Steps by label name; labels outside the alphabet lead to the dead state.
  int step(int state, std::string_view label) const;
  bool isAccepting(int state) const { return accepting[static_cast<size_t>(state)]; }
  int run(const std::vector<std::string>& word) const;
  bool accepts(const std::vector<std::string>& word) const { return isAccepting(run(word)); }
};

/// Throws RegexSyntaxError on malformed patterns and on labels that are not
/// in `alphabet`.
Dfa compileOrder(std::string_view order, const std::set<std::string>& alphabet);

/// Labels without which no accepted word exists: for each label, the
/// automaton is searched from the start state with that label's edges
/// removed; if no accepting state is reachable the label is required.
std::set<std::string> requiredLabels(const Dfa& dfa);

/// Labels mentioned by a pattern, in order of first appearance.
std::vector<std::string> orderLabels(std::string_view order);

}  // namespace cryptomate
