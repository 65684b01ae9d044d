#include "cryptomate/order_dfa.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace cryptomate {

RegexSyntaxError::RegexSyntaxError(size_t position, const std::string& reason)
    : std::runtime_error("position " + std::to_string(position) + ": " + reason),
      position_(position),
      reason_(reason) {}

namespace {

bool identStart(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool identChar(char c) { return identStart(c) || (c >= '0' && c <= '9'); }

struct Nfa {
  struct State {
    std::vector<int> eps;
    std::vector<std::pair<int, int>> moves;  // (label index, target)
  };
  std::vector<State> states;

  int add() {
    states.emplace_back();
    return static_cast<int>(states.size()) - 1;
  }
};

struct Fragment {
  int in;
  int out;
};

// Recursive descent over the pattern, emitting Thompson fragments.
class PatternParser {
 public:
  PatternParser(std::string_view src, const std::vector<std::string>& alphabet, Nfa& nfa)
      : src_(src), alphabet_(alphabet), nfa_(nfa) {}

  Fragment parseAll() {
    skipSpace();
    if (pos_ >= src_.size()) throw RegexSyntaxError(pos_, "empty pattern");
    Fragment f = alternation();
    skipSpace();
    if (pos_ < src_.size()) {
      if (src_[pos_] == ')') throw RegexSyntaxError(pos_, "unbalanced ')'");
      throw RegexSyntaxError(pos_, "unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    return f;
  }

 private:
  std::string_view src_;
  const std::vector<std::string>& alphabet_;
  Nfa& nfa_;
  size_t pos_ = 0;

  void skipSpace() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }
  bool atAtomStart() {
    skipSpace();
    return pos_ < src_.size() && (src_[pos_] == '(' || identStart(src_[pos_]));
  }

  Fragment alternation() {
    Fragment first = concatenation();
    skipSpace();
    if (pos_ >= src_.size() || src_[pos_] != '|') return first;
    int in = nfa_.add();
    int out = nfa_.add();
    auto attach = [&](Fragment f) {
      nfa_.states[in].eps.push_back(f.in);
      nfa_.states[f.out].eps.push_back(out);
    };
    attach(first);
    while (pos_ < src_.size() && src_[pos_] == '|') {
      ++pos_;
      attach(concatenation());
      skipSpace();
    }
    return {in, out};
  }

  Fragment concatenation() {
    if (!atAtomStart()) {
      if (pos_ >= src_.size()) throw RegexSyntaxError(pos_, "expected label or '(' at end of pattern");
      throw RegexSyntaxError(pos_, "expected label or '('");
    }
    Fragment acc = repetition();
    while (atAtomStart()) {
      Fragment next = repetition();
      nfa_.states[acc.out].eps.push_back(next.in);
      acc.out = next.out;
    }
    return acc;
  }

  Fragment repetition() {
    Fragment f = atom();
    for (;;) {
      skipSpace();
      if (pos_ >= src_.size()) return f;
      char op = src_[pos_];
      if (op != '*' && op != '+' && op != '?') return f;
      ++pos_;
      int in = nfa_.add();
      int out = nfa_.add();
      nfa_.states[in].eps.push_back(f.in);
      nfa_.states[f.out].eps.push_back(out);
      if (op != '+') nfa_.states[in].eps.push_back(out);
      if (op != '?') nfa_.states[f.out].eps.push_back(f.in);
      f = {in, out};
    }
  }

  Fragment atom() {
    skipSpace();
    if (src_[pos_] == '(') {
      size_t open = pos_++;
      skipSpace();
      if (pos_ < src_.size() && src_[pos_] == ')') throw RegexSyntaxError(pos_, "empty group");
      Fragment inner = alternation();
      skipSpace();
      if (pos_ >= src_.size() || src_[pos_] != ')')
        throw RegexSyntaxError(pos_, "unclosed group opened at " + std::to_string(open));
      ++pos_;
      return inner;
    }
    size_t begin = pos_;
    while (pos_ < src_.size() && identChar(src_[pos_])) ++pos_;
    std::string label(src_.substr(begin, pos_ - begin));
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), label);
    if (it == alphabet_.end() || *it != label) throw RegexSyntaxError(begin, "undefined label " + label);
    int in = nfa_.add();
    int out = nfa_.add();
    nfa_.states[in].moves.push_back({static_cast<int>(it - alphabet_.begin()), out});
    return {in, out};
  }
};

using StateSet = std::vector<int>;  // sorted

StateSet closure(const Nfa& nfa, StateSet seed) {
  std::vector<bool> seen(nfa.states.size());
  std::vector<int> stack(seed.begin(), seed.end());
  for (int s : seed) seen[s] = true;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : nfa.states[s].eps)
      if (!seen[t]) {
        seen[t] = true;
        seed.push_back(t);
        stack.push_back(t);
      }
  }
  std::sort(seed.begin(), seed.end());
  return seed;
}

// Moore partition refinement followed by breadth-first renumbering from the
// start state. Unreachable states disappear; the dead class is kept (or
// added) so the result always has an explicit sink.
Dfa minimize(const Dfa& in) {
  const size_t k = in.alphabet.size();
  const int n = in.stateCount;
  std::vector<int> block(n);
  bool anyAccepting = false, anyRejecting = false;
  for (int s = 0; s < n; ++s) {
    block[s] = in.accepting[s] ? 1 : 0;
    (in.accepting[s] ? anyAccepting : anyRejecting) = true;
  }
  if (!anyRejecting) std::fill(block.begin(), block.end(), 0);
  size_t blockCount = anyAccepting && anyRejecting ? 2 : 1;
  // Refinement only splits blocks, so an unchanged count means stable.
  for (;;) {
    std::map<std::vector<int>, int> signatures;
    std::vector<int> next(n);
    for (int s = 0; s < n; ++s) {
      std::vector<int> sig{block[s]};
      for (size_t a = 0; a < k; ++a) sig.push_back(block[in.step(s, static_cast<int>(a))]);
      auto it = signatures.emplace(std::move(sig), static_cast<int>(signatures.size())).first;
      next[s] = it->second;
    }
    block = std::move(next);
    if (signatures.size() == blockCount) break;
    blockCount = signatures.size();
  }

  // Representative transitions per block.
  int blocks = *std::max_element(block.begin(), block.end()) + 1;
  std::vector<int> rep(blocks, -1);
  for (int s = 0; s < n; ++s)
    if (rep[block[s]] < 0) rep[block[s]] = s;

  std::vector<int> order(blocks, -1);
  std::vector<int> queue{block[in.start]};
  order[block[in.start]] = 0;
  int count = 1;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int b = queue[qi];
    for (size_t a = 0; a < k; ++a) {
      int t = block[in.step(rep[b], static_cast<int>(a))];
      if (order[t] < 0) {
        order[t] = count++;
        queue.push_back(t);
      }
    }
  }

  Dfa out;
  out.alphabet = in.alphabet;
  out.stateCount = count;
  out.start = 0;
  out.delta.assign(static_cast<size_t>(count) * k, 0);
  out.accepting.assign(count, false);
  for (int b : queue) {
    int s = order[b];
    out.accepting[s] = in.accepting[rep[b]];
    for (size_t a = 0; a < k; ++a)
      out.delta[static_cast<size_t>(s) * k + a] = order[block[in.step(rep[b], static_cast<int>(a))]];
  }

  // Dead state: non-accepting and closed under every label. After
  // minimization there is at most one.
  out.dead = -1;
  for (int s = 0; s < out.stateCount; ++s) {
    if (out.accepting[s]) continue;
    bool sink = true;
    for (size_t a = 0; a < k; ++a) sink = sink && out.step(s, static_cast<int>(a)) == s;
    if (sink) {
      out.dead = s;
      break;
    }
  }
  if (out.dead < 0) {
    out.dead = out.stateCount++;
    out.accepting.push_back(false);
    for (size_t a = 0; a < k; ++a) out.delta.push_back(out.dead);
  }
  return out;
}

}  // namespace

std::optional<int> Dfa::labelIndex(std::string_view label) const {
  auto it = std::lower_bound(alphabet.begin(), alphabet.end(), label);
  if (it == alphabet.end() || *it != label) return std::nullopt;
  return static_cast<int>(it - alphabet.begin());
}

int Dfa::step(int state, std::string_view label) const {
  auto idx = labelIndex(label);
  return idx ? step(state, *idx) : dead;
}

int Dfa::run(const std::vector<std::string>& word) const {
  int s = start;
  for (const auto& l : word) s = step(s, std::string_view(l));
  return s;
}

std::vector<std::string> orderLabels(std::string_view order) {
  std::vector<std::string> out;
  for (size_t i = 0; i < order.size();) {
    if (identStart(order[i])) {
      size_t j = i;
      while (j < order.size() && identChar(order[j])) ++j;
      std::string l(order.substr(i, j - i));
      if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(std::move(l));
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

Dfa compileOrder(std::string_view order, const std::set<std::string>& alphabetSet) {
  for (size_t i = 0; i < order.size(); ++i) {
    char c = order[i];
    if (!(identChar(c) || c == ' ' || c == '\t' || c == '|' || c == '(' || c == ')' || c == '*' ||
          c == '+' || c == '?'))
      throw RegexSyntaxError(i, "illegal character '" + std::string(1, c) + "'");
  }

  std::vector<std::string> alphabet(alphabetSet.begin(), alphabetSet.end());
  Nfa nfa;
  Fragment f = PatternParser(order, alphabet, nfa).parseAll();

  // Subset construction.
  const size_t k = alphabet.size();
  std::map<StateSet, int> ids;
  std::vector<StateSet> sets;
  Dfa raw;
  raw.alphabet = alphabet;
  auto intern = [&](StateSet s) {
    auto [it, inserted] = ids.emplace(s, static_cast<int>(sets.size()));
    if (inserted) sets.push_back(std::move(s));
    return it->second;
  };
  intern(closure(nfa, {f.in}));
  for (size_t cur = 0; cur < sets.size(); ++cur) {
    for (size_t a = 0; a < k; ++a) {
      StateSet moved;
      for (int s : sets[cur])
        for (auto [label, target] : nfa.states[s].moves)
          if (label == static_cast<int>(a)) moved.push_back(target);
      int target = intern(closure(nfa, std::move(moved)));
      raw.delta.resize(std::max(raw.delta.size(), (cur + 1) * k));
      raw.delta[cur * k + a] = target;
    }
  }
  raw.stateCount = static_cast<int>(sets.size());
  raw.delta.resize(static_cast<size_t>(raw.stateCount) * k);
  raw.start = 0;
  for (const auto& s : sets)
    raw.accepting.push_back(std::binary_search(s.begin(), s.end(), f.out));

  Dfa dfa = minimize(raw);
  dfa.requiredLabels = requiredLabels(dfa);
  return dfa;
}

std::set<std::string> requiredLabels(const Dfa& dfa) {
  std::set<std::string> out;
  const size_t k = dfa.alphabet.size();
  for (size_t removed = 0; removed < k; ++removed) {
    std::vector<bool> seen(dfa.stateCount);
    std::deque<int> queue{dfa.start};
    seen[dfa.start] = true;
    bool reachable = false;
    while (!queue.empty() && !reachable) {
      int s = queue.front();
      queue.pop_front();
      if (dfa.isAccepting(s)) reachable = true;
      for (size_t a = 0; a < k; ++a) {
        if (a == removed) continue;
        int t = dfa.step(s, static_cast<int>(a));
        if (!seen[t]) {
          seen[t] = true;
          queue.push_back(t);
        }
      }
    }
    if (!reachable) out.insert(dfa.alphabet[removed]);
  }
  return out;
}

}  // namespace cryptomate
