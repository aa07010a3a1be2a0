#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "modrev/check.hpp"
#include "modrev/ltl.hpp"
#include "modrev/mlts.hpp"
#include "modrev/weaken.hpp"

namespace modrev {

enum class RequirementKind { security, functional };

std::string_view to_string(RequirementKind k);

struct Requirement {
  std::string id;
  RequirementKind kind = RequirementKind::security;
  int weight = 1;
  ltl::FormulaPtr formula;
  std::string source;  // formula text as written
};

/// One requirement per line: `req <id> kind=<security|functional> weight=<int>: <LTL>`.
/// Rejects duplicate ids, non-positive weights and non-safety formulas.
std::vector<Requirement> parse_requirements(std::string_view source);

std::string render_requirements(const std::vector<Requirement>& reqs);

int total_weight(const std::vector<Requirement>& reqs);

struct RequirementCheckOptions {
  /// Check functional requirements against the weakened model as well.
  bool weaken_functional = false;
};

/// Security requirements are checked on weaken(to_lts(rev), occ); functional
/// ones on to_lts(rev) directly. Both are deadlock-completed with `_end`.
Verdict check_requirement(const Mlts& revision, const Requirement& req,
                          const OccupancyAutomaton& occupancy,
                          const RequirementCheckOptions& options = {});

/// Reusable checker for one requirement set. Caches progression across
/// revisions; not thread-safe, make one per worker.
class RequirementChecker {
 public:
  RequirementChecker(const std::vector<Requirement>& reqs, OccupancyAutomaton occupancy,
                     RequirementCheckOptions options = {});

  Verdict check(const Mlts& revision, std::size_t req_index);

  /// Short-circuits on the first violated requirement.
  bool satisfies_all(const Mlts& revision);

  /// Satisfaction of every requirement, sharing the expanded models.
  std::vector<bool> check_each(const Mlts& revision);

  std::size_t size() const noexcept { return checkers_.size(); }

 private:
  std::vector<Requirement> reqs_;
  OccupancyAutomaton occupancy_;
  RequirementCheckOptions options_;
  std::vector<std::unique_ptr<SafetyChecker>> checkers_;
};

}  // namespace modrev
