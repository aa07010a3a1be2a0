#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "modrev/lts.hpp"
#include "modrev/mlts.hpp"
#include "modrev/requirement.hpp"
#include "modrev/rng.hpp"

namespace support {

inline std::string data_path(const std::string& name) {
  return std::string(MODREV_DATA_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline modrev::Mlts fixture(const std::string& name) {
  return modrev::parse_mlts(slurp(data_path(name)));
}

inline std::vector<modrev::Requirement> requirements(const std::string& name) {
  return modrev::parse_requirements(slurp(data_path(name)));
}

// Plain adjacency view of an LTS, built from its public transitions.
struct Graph {
  std::size_t states = 0;
  std::size_t initial = 0;
  std::vector<std::vector<std::pair<std::string, std::size_t>>> out;
};

inline Graph graph_of(const modrev::Lts& lts) {
  Graph g;
  g.states = lts.num_states();
  g.initial = lts.initial();
  g.out.resize(g.states);
  for (const auto& t : lts.transitions()) g.out[t.from].push_back({t.action, t.to});
  return g;
}

// Deadlock completion done independently of the library.
inline Graph completed(Graph g) {
  for (auto& edges : g.out) {
    if (edges.empty()) edges.push_back({"_end", static_cast<std::size_t>(&edges - &g.out[0])});
  }
  return g;
}

// Depth-first reachable set.
inline std::set<std::size_t> dfs_reachable(const Graph& g) {
  std::set<std::size_t> seen{g.initial};
  std::vector<std::size_t> stack{g.initial};
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    for (const auto& [a, t] : g.out[s]) {
      if (seen.insert(t).second) stack.push_back(t);
    }
  }
  return seen;
}

// All action sequences of length <= k from the initial state.
inline std::set<std::vector<std::string>> traces(const Graph& g, std::size_t k) {
  std::set<std::vector<std::string>> out;
  std::function<void(std::size_t, std::vector<std::string>&)> go =
      [&](std::size_t s, std::vector<std::string>& prefix) {
        out.insert(prefix);
        if (prefix.size() == k) return;
        for (const auto& [a, t] : g.out[s]) {
          prefix.push_back(a);
          go(t, prefix);
          prefix.pop_back();
        }
      };
  std::vector<std::string> prefix;
  go(g.initial, prefix);
  return out;
}

// ---- LTL over lasso words, by direct fixpoint semantics ----

enum class F { tt, ff, atom, neg, conj, disj, impl, next, until, weak, release, globally, finally };

struct Node {
  F op;
  std::string atom;
  std::shared_ptr<Node> a, b;
};
using NodePtr = std::shared_ptr<Node>;

inline NodePtr leaf(F op, std::string atom = {}) {
  return std::make_shared<Node>(Node{op, std::move(atom), nullptr, nullptr});
}
inline NodePtr un(F op, NodePtr a) { return std::make_shared<Node>(Node{op, {}, a, nullptr}); }
inline NodePtr bin(F op, NodePtr a, NodePtr b) {
  return std::make_shared<Node>(Node{op, {}, a, b});
}

inline std::string text(const NodePtr& n) {
  switch (n->op) {
    case F::tt: return "true";
    case F::ff: return "false";
    case F::atom: return n->atom;
    case F::neg: return "!(" + text(n->a) + ")";
    case F::next: return "X(" + text(n->a) + ")";
    case F::globally: return "G(" + text(n->a) + ")";
    case F::finally: return "F(" + text(n->a) + ")";
    case F::conj: return "(" + text(n->a) + " && " + text(n->b) + ")";
    case F::disj: return "(" + text(n->a) + " || " + text(n->b) + ")";
    case F::impl: return "(" + text(n->a) + " -> " + text(n->b) + ")";
    case F::until: return "(" + text(n->a) + " U " + text(n->b) + ")";
    case F::weak: return "(" + text(n->a) + " W " + text(n->b) + ")";
    case F::release: return "(" + text(n->a) + " R " + text(n->b) + ")";
  }
  return {};
}

// Atom semantics: bare atoms match any declared agent prefix, prefixed atoms
// match exactly, nothing matches `_end`.
inline bool atom_matches(const std::string& atom, const std::string& action) {
  if (action == "_end") return false;
  if (atom == action) return true;
  if (atom.find('.') != std::string::npos) return false;
  for (const char* agent : {"u.", "mu."}) {
    if (action == agent + atom) return true;
  }
  return false;
}

// Truth of f at every position of stem + loop^omega.
inline std::vector<bool> eval(const NodePtr& f, const std::vector<std::string>& word,
                              std::size_t loop_start) {
  const std::size_t n = word.size();
  auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : loop_start; };
  std::vector<bool> r(n);
  auto fix = [&](const std::vector<bool>& hold, const std::vector<bool>& step, bool init,
                 bool release) {
    std::vector<bool> x(n, init);
    for (std::size_t round = 0; round < 2 * n + 2; ++round) {
      for (std::size_t k = n; k-- > 0;) {
        x[k] = release ? (hold[k] && (step[k] || x[succ(k)]))
                       : (hold[k] || (step[k] && x[succ(k)]));
      }
    }
    return x;
  };
  switch (f->op) {
    case F::tt: return std::vector<bool>(n, true);
    case F::ff: return std::vector<bool>(n, false);
    case F::atom:
      for (std::size_t i = 0; i < n; ++i) r[i] = atom_matches(f->atom, word[i]);
      return r;
    case F::neg: {
      auto a = eval(f->a, word, loop_start);
      for (std::size_t i = 0; i < n; ++i) r[i] = !a[i];
      return r;
    }
    case F::next: {
      auto a = eval(f->a, word, loop_start);
      for (std::size_t i = 0; i < n; ++i) r[i] = a[succ(i)];
      return r;
    }
    case F::conj:
    case F::disj:
    case F::impl: {
      auto a = eval(f->a, word, loop_start);
      auto b = eval(f->b, word, loop_start);
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = f->op == F::conj ? (a[i] && b[i]) : f->op == F::disj ? (a[i] || b[i])
                                                                     : (!a[i] || b[i]);
      }
      return r;
    }
    case F::until:
      return fix(eval(f->b, word, loop_start), eval(f->a, word, loop_start), false, false);
    case F::weak:
      return fix(eval(f->b, word, loop_start), eval(f->a, word, loop_start), true, false);
    case F::release:
      return fix(eval(f->b, word, loop_start), eval(f->a, word, loop_start), true, true);
    case F::globally:
      return fix(eval(f->a, word, loop_start), std::vector<bool>(n, false), true, true);
    case F::finally:
      return fix(eval(f->a, word, loop_start), std::vector<bool>(n, true), false, false);
  }
  return r;
}

// Searches every lasso whose stem plus loop has at most max_len actions.
// Returns a violating lasso word (stem then one loop unrolling) if any.
inline std::optional<std::vector<std::string>> lasso_violation(const Graph& g, const NodePtr& f,
                                                               std::size_t max_len) {
  std::vector<std::size_t> path{g.initial};
  std::vector<std::string> word;
  std::optional<std::vector<std::string>> found;
  std::function<void()> go = [&]() {
    if (found) return;
    std::size_t s = path.back();
    for (const auto& [a, t] : g.out[s]) {
      word.push_back(a);
      for (std::size_t k = 0; k < path.size() && !found; ++k) {
        if (path[k] == t && !eval(f, word, k)[0]) found = word;
      }
      if (!found && word.size() < max_len) {
        path.push_back(t);
        go();
        path.pop_back();
      }
      word.pop_back();
      if (found) return;
    }
  };
  go();
  return found;
}

// Safety-fragment formulas of bounded depth over the given atoms.
inline NodePtr random_safety(modrev::SplitMix64& rng, const std::vector<std::string>& atoms,
                             std::size_t depth) {
  auto atom = [&] { return leaf(F::atom, atoms[rng.below(atoms.size())]); };
  auto literal = [&] { return rng.below(2) ? atom() : un(F::neg, atom()); };
  if (depth == 0) return rng.below(10) == 0 ? leaf(rng.below(2) ? F::tt : F::ff) : literal();
  switch (rng.below(8)) {
    case 0: return un(F::globally, random_safety(rng, atoms, depth - 1));
    case 1: return un(F::next, random_safety(rng, atoms, depth - 1));
    case 2:
      return bin(F::conj, random_safety(rng, atoms, depth - 1),
                 random_safety(rng, atoms, depth - 1));
    case 3:
      return bin(F::disj, random_safety(rng, atoms, depth - 1),
                 random_safety(rng, atoms, depth - 1));
    case 4:
      return bin(F::weak, random_safety(rng, atoms, depth - 1),
                 random_safety(rng, atoms, depth - 1));
    case 5:
      return bin(F::release, random_safety(rng, atoms, depth - 1),
                 random_safety(rng, atoms, depth - 1));
    case 6: return bin(F::impl, literal(), random_safety(rng, atoms, depth - 1));
    default: return un(F::neg, un(F::finally, literal()));
  }
}

// Random LTS with 1..max_states states; actions may carry agent prefixes.
inline modrev::Lts random_lts(modrev::SplitMix64& rng, std::size_t max_states,
                              const std::vector<std::string>& actions) {
  std::size_t n = 1 + rng.below(max_states);
  std::vector<modrev::Transition> ts;
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t k = rng.below(3);
    for (std::size_t e = 0; e < k; ++e) {
      ts.push_back({static_cast<modrev::StateId>(s), actions[rng.below(actions.size())],
                    static_cast<modrev::StateId>(rng.below(n))});
    }
  }
  std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) {
    return std::tie(a.from, a.action, a.to) < std::tie(b.from, b.action, b.to);
  });
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return modrev::Lts("R", n, 0, ts);
}

// Weighted payoff of a row computed straight from tag strings.
inline int brute_payoff(const std::vector<bool>& truth, const std::vector<modrev::Requirement>& reqs) {
  int sum = 0;
  for (std::size_t r = 0; r < reqs.size(); ++r) sum += truth[r] ? reqs[r].weight : 0;
  return sum;
}

}  // namespace support
