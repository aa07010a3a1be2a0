#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modrev/ml.hpp"
#include "modrev/recompose.hpp"
#include "modrev/requirement.hpp"
#include "modrev/weaken.hpp"

// Accelerated checking: label a shuffled slice by model checking, learn one
// classifier per requirement, predict the rest, verify predicted positives.
namespace modrev {

enum class Coverage { full, common };

std::string_view to_string(Coverage c);
Coverage parse_coverage(std::string_view text);

enum class Tag : std::uint8_t {
  checked_true,
  checked_false,
  predicted_true,
  predicted_false,
  verified_true,
  verified_false,
};

std::string_view to_string(Tag t);
Tag parse_tag(std::string_view text);
bool is_true(Tag t);
bool is_predicted(Tag t);

struct PipelineConfig {
  double tau = 0.3;
  std::uint64_t seed = 0;
  bool verify = true;
  // Verification also re-checks revisions with up to this many
  // predicted-false verdicts (and no checked-false one).
  std::size_t verify_slack = 1;
  Coverage coverage = Coverage::full;
  ml::GbtParams gbt;
  std::size_t jobs = 1;
  RequirementCheckOptions check;
};

/// Throws std::invalid_argument unless 0 < tau <= 1 and jobs >= 1.
void validate(const PipelineConfig& cfg);

/// Revisions under a coverage, in enumeration order (lexicographic for full,
/// stream order for common). Common coverage needs 4 <= n <= 9.
std::vector<Permutation> coverage_revisions(std::size_t n_modules, Coverage coverage);

struct RequirementRun {
  std::string id;
  bool fallback = false;  // single-class slice: remainder was checked instead
  std::size_t training_positives = 0;
  std::size_t predicted_positives = 0;
};

struct RevisionVerdicts {
  std::vector<Permutation> revisions;        // enumeration order
  std::vector<std::string> requirement_ids;
  std::vector<std::vector<Tag>> tags;        // [revision][requirement]
  std::vector<std::vector<double>> scores;   // predicted probability, NaN if never predicted
  std::vector<std::size_t> shuffle;          // shuffle[k] = revision index at shuffled position k
  std::size_t training_size = 0;
  bool verify = true;
  std::size_t checks = 0;  // requirement checks performed
  double t_mc_ms = 0;
  double t_ml_ms = 0;
  std::vector<std::string> warnings;
  std::vector<RequirementRun> requirements;

  std::size_t size() const noexcept { return revisions.size(); }
  bool all_true(std::size_t revision) const;
  bool has_unverified_prediction(std::size_t revision) const;
};

/// Steps: shuffle the coverage with cfg.seed, check the first ceil(tau*size)
/// revisions, train a GBT per requirement, predict the rest, then (with
/// verify) re-check every revision whose verdicts are all positive, or miss
/// that by at most verify_slack predicted-false entries.
RevisionVerdicts run_pipeline(const Mlts& base, const std::vector<Requirement>& reqs,
                              const OccupancyAutomaton& occupancy, const PipelineConfig& cfg);

/// Checks every revision of the coverage; all tags are checked-*.
RevisionVerdicts run_exhaustive(const Mlts& base, const std::vector<Requirement>& reqs,
                                const OccupancyAutomaton& occupancy, const PipelineConfig& cfg);

/// Re-checks predicted entries of one revision in place, turning them into
/// verified-*. Returns the number of checks performed.
std::size_t verify_revision(RevisionVerdicts& verdicts, std::size_t revision, const Mlts& base,
                            const std::vector<Requirement>& reqs,
                            const OccupancyAutomaton& occupancy,
                            const RequirementCheckOptions& options = {});

enum class Phase { checking, ml };

std::string_view to_string(Phase p);

struct EarlyExitResult {
  std::optional<Permutation> found;
  Phase phase = Phase::checking;
  std::size_t position = 0;  // 1-based: shuffled position, or rank after the slice
  std::size_t checks = 0;    // revisions checked against the full set
  double elapsed_ms = 0;
};

/// Checks the shuffled slice revision by revision and returns on the first
/// satisfier. Otherwise trains on the slice, ranks the remainder by the
/// product of predicted probabilities and verifies in rank order.
EarlyExitResult early_exit_search(const Mlts& base, const std::vector<Requirement>& reqs,
                                  const OccupancyAutomaton& occupancy, const PipelineConfig& cfg);

/// Same, over an explicit revision list (shuffled with cfg.seed).
EarlyExitResult early_exit_search(const Mlts& base, const std::vector<Requirement>& reqs,
                                  const OccupancyAutomaton& occupancy, const PipelineConfig& cfg,
                                  std::vector<Permutation> revisions);

/// Header `permutation,<id>...`; one row per revision in enumeration order.
std::string verdicts_to_csv(const RevisionVerdicts& v);
/// Restores revisions, requirement ids and tags; throws ParseError.
RevisionVerdicts verdicts_from_csv(std::string_view text);

/// Per-requirement metrics of the predicted entries against oracle tags.
/// Entries that were never predicted are skipped; empty if none remain.
std::vector<std::optional<ml::Metrics>> prediction_metrics(const RevisionVerdicts& run,
                                                           const RevisionVerdicts& oracle);

nlohmann::json summary_json(const RevisionVerdicts& v, bool timing = true);

}  // namespace modrev
