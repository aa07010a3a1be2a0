#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "modrev/ltl.hpp"

namespace modrev::ltl {

/// Hash-consed store of NNF formulas with memoized progression over actions.
///
/// Boolean structure is kept in minimal disjunctive normal form over the
/// non-boolean nodes: clauses sorted by id and absorbed clauses dropped. Every reachable obligation is therefore a
/// canonical combination of subformulas of the interned root, and the set of
/// obligations reachable by progression is finite.
///
/// Atom semantics: an unprefixed atom `a` holds on action `a` and on `g.a`
/// for every declared agent g; a prefixed atom holds only on that exact
/// action; nothing holds on `_end`.
class Progressor {
 public:
  using Id = std::uint32_t;
  static constexpr Id kTrue = 0;
  static constexpr Id kFalse = 1;

  explicit Progressor(std::vector<std::string> agents = {"u", "mu"});

  /// Interns nnf(f).
  Id intern(const FormulaPtr& f);

  /// Obligation left on the rest of the trace after observing `action`.
  Id progress(Id f, std::string_view action);

  /// Progression over a whole finite trace.
  Id progress(Id f, const std::vector<std::string>& trace);

  bool atom_holds(std::string_view atom, std::string_view action) const;

  /// Ids of the maximal non-boolean nodes under the top-level && / ||.
  std::vector<Id> leaves(Id f) const;

  /// Every node reachable from f through children, including f.
  std::vector<Id> subformulas(Id f) const;

  std::string describe(Id f) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  enum class Kind : std::uint8_t {
    top, bottom, literal, conj, disj, next, globally, finally,
    until, weak_until, release, strong_release,
  };

  struct Node {
    Kind kind;
    std::uint32_t atom = 0;  // literal
    bool negated = false;    // literal
    std::vector<Id> args;
  };

  Id make(Node node);
  Id make_junction(Kind kind, std::vector<Id> args);
  std::vector<std::vector<Id>> clauses(Id f) const;
  Id build(const Formula& f);
  std::uint32_t action_index(std::string_view action);

  std::vector<std::string> agents_;
  std::vector<std::string> atom_names_;
  std::vector<Node> nodes_;
  std::map<std::tuple<Kind, std::uint32_t, bool, std::vector<Id>>, Id> index_;
  std::unordered_map<std::string, std::uint32_t> actions_;
  std::vector<std::vector<bool>> holds_;  // [action][atom]
  std::unordered_map<std::uint64_t, Id> memo_;
};

}  // namespace modrev::ltl
