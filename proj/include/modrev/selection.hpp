#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modrev/pipeline.hpp"

namespace modrev {

/// Raised when a selection would rest on a prediction that was never
/// model-checked and the caller did not allow it.
class UnverifiedPrediction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Revision indices whose verdicts are true for every requirement, in
/// enumeration order. Predicted-true entries count only with allow_predicted;
/// otherwise relying on one throws UnverifiedPrediction (verify those rows
/// first, see relied_upon_predictions).
std::vector<std::size_t> eligible(const RevisionVerdicts& verdicts,
                                  const std::vector<Requirement>& reqs,
                                  bool allow_predicted = false);

struct DegradationQuery {
  int payoff_threshold = 0;
  std::optional<std::vector<std::string>> waivable;  // all when empty
  std::optional<std::size_t> max_waived;
};

struct Selected {
  std::size_t revision = 0;
  Permutation permutation;
  int payoff = 0;
  std::vector<std::string> satisfied;
  std::vector<std::string> waived;
};

/// Revisions whose satisfied weight reaches the threshold with every
/// unsatisfied requirement waivable. Sorted by payoff descending, then fewer
/// waived, then enumeration index. Throws std::invalid_argument on a bad query.
std::vector<Selected> degrade(const RevisionVerdicts& verdicts,
                              const std::vector<Requirement>& reqs, const DegradationQuery& q,
                              bool allow_predicted = false);

/// Revisions degrade() would return if every predicted-true entry held and
/// whose inclusion depends on at least one such entry. Verifying these first
/// makes degrade() independent of predictions.
std::vector<std::size_t> relied_upon_predictions(const RevisionVerdicts& verdicts,
                                                 const std::vector<Requirement>& reqs,
                                                 const DegradationQuery& q);

/// Ordering rule over forward positions: `A after B` fires when A's module
/// sits later in the chain than B's; `A before B` when earlier.
struct OrderingLint {
  std::string name;
  std::string action;
  bool after = true;
  std::string other;
};

/// One rule per line: `lint <name>: <action> after|before <action>`.
std::vector<OrderingLint> parse_lints(std::string_view source);

/// Names of the lints that fire on a revision, plus `backward-self-loop`
/// when a backward action sits in the first module.
std::vector<std::string> lint_revision(const Mlts& revision, const std::vector<OrderingLint>& lints);

nlohmann::json report_json(const std::vector<Selected>& selected, const Mlts& base,
                           const std::vector<OrderingLint>& lints, const DegradationQuery& q);

/// Serialized mLTS and chain LTS of each revision with its lints.
std::string report_text(const std::vector<Selected>& selected, const Mlts& base,
                        const std::vector<OrderingLint>& lints, const DegradationQuery& q);

}  // namespace modrev
