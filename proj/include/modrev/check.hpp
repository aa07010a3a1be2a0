#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "modrev/lts.hpp"
#include "modrev/ltl.hpp"
#include "modrev/progression.hpp"

namespace modrev {

class NonSafetyFormula : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CheckOptions {
  std::vector<std::string> agents{"u", "mu"};
  /// Hard cap on explored (state, obligation) pairs.
  std::size_t max_pairs = 50'000'000;
};

struct Verdict {
  bool satisfied = true;
  /// Minimum-length bad prefix; empty when satisfied.
  std::vector<std::string> counterexample;
  std::vector<std::string> warnings;
  std::size_t explored_pairs = 0;
  std::size_t distinct_obligations = 0;
};

/// Safety model checker by formula progression over (state, obligation)
/// pairs, breadth-first with edges in (action name, target) order.
///
/// Keeps its progression memo between runs, so checking one formula against
/// many models amortizes. Not thread-safe; use one instance per worker.
class SafetyChecker {
 public:
  /// Throws NonSafetyFormula unless is_safety(formula).
  explicit SafetyChecker(ltl::FormulaPtr formula, CheckOptions options = {});

  /// Deadlock states are completed with `_end` (a warning is recorded).
  Verdict run(const Lts& model);

  const ltl::FormulaPtr& formula() const noexcept { return formula_; }
  ltl::Progressor& progressor() noexcept { return progressor_; }
  ltl::Progressor::Id root() const noexcept { return root_; }

 private:
  ltl::FormulaPtr formula_;
  CheckOptions options_;
  ltl::Progressor progressor_;
  ltl::Progressor::Id root_;
};

Verdict check(const Lts& model, const ltl::FormulaPtr& formula, const CheckOptions& options = {});

}  // namespace modrev
