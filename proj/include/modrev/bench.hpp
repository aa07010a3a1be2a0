#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modrev/pipeline.hpp"

// Search-time comparison of the coverage-order baseline and accelerated
// checking, plus the analytic cost model.
namespace modrev::bench {

enum class Template { t1, t2, t3 };

/// t1 `G(a -> G !b)`, t2 `G(a -> (!b W c))`, t3 `G(a -> X !b)`.
std::string_view to_string(Template t);
std::string instantiate(Template t, const std::string& a, const std::string& b,
                        const std::string& c);

struct GeneratorConfig {
  std::uint64_t seed = 0;
  std::size_t target_count = 1000;
  std::size_t retry_budget = 100000;  // candidates drawn before giving up
};

struct GeneratedRequirement {
  Requirement requirement;
  Template tmpl = Template::t1;
  std::optional<Permutation> witness;  // first satisfier in coverage order
};

/// Thrown when the retry budget runs out before target_count is reached.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws template instances over distinct agent-prefixed machine actions and
/// keeps those satisfied by at least one revision of the common coverage.
/// Needs at least three distinct machine actions and 4..9 modules.
std::vector<GeneratedRequirement> generate_requirements(const Mlts& base,
                                                        const GeneratorConfig& gen,
                                                        const OccupancyAutomaton& occupancy);

struct TrialRecord {
  std::size_t n_modules = 0;
  std::string requirement_id;
  Template tmpl = Template::t1;
  std::string formula;
  bool oracle_satisfiable = false;
  bool oasis_found = false;
  std::size_t oasis_position = 0;
  std::size_t oasis_checks = 0;
  double oasis_time_ms = 0;
  bool oacal_found = false;
  Phase oacal_phase = Phase::checking;
  std::size_t oacal_position = 0;
  std::size_t oacal_checks = 0;
  double oacal_time_ms = 0;
};

/// Runs both searches on every requirement. OACAL uses early_exit_search
/// over the common coverage with cfg; trials run one at a time.
std::vector<TrialRecord> run_benchmark(const Mlts& base,
                                       const std::vector<GeneratedRequirement>& reqs,
                                       const OccupancyAutomaton& occupancy,
                                       const PipelineConfig& cfg);

struct Summary {
  std::size_t n_modules = 0;
  std::size_t trials = 0;
  double mean_oasis_ms = 0;
  double mean_oacal_ms = 0;
  double max_oasis_ms = 0;
  double max_oacal_ms = 0;
  double ratio_avg = 0;  // mean oasis / mean oacal
  double ratio_max = 0;  // max oasis / max oacal
  std::size_t disagreements = 0;  // trials where a search contradicts the oracle
};

Summary summarize(const std::vector<TrialRecord>& trials);

/// Same columns either way; timing cells hold `-` when timing is false.
std::string trials_to_csv(const std::vector<TrialRecord>& trials, bool timing = true);

struct CostModelParams {
  std::size_t n_modules = 7;
  double tau = 0.3;
  double trees = 100;
  double depth = 6;
  double machine_constant = 1.12e-2;  // ms per complexity unit
  double t_dcs = 50;                  // ms per coverage-order check
  double t_mc = 50;                   // ms per model check
  double pos_avg = 0;                 // average-case position in the redundant coverage
  double pos_max = 0;                 // worst-case position
  double cov_r = 0;                   // redundant coverage size
  double cov_nr = 0;                  // non-redundant coverage size
};

struct CostModel {
  double t_oasis_avg = 0;
  double t_oasis_max = 0;
  double t_oacal_avg = 0;
  double t_oacal_max = 0;
  double ratio_avg = 0;
  double ratio_max = 0;
  double checked_avg = 0;  // (tau - tau^2/2) * cov_nr
  double checked_max = 0;  // tau * cov_nr
  double ml_avg = 0;       // (1 - tau) * C*K*d*N*log2(tau*cov_nr)
  double ml_max = 0;       // C*K*d*N*log2(tau*cov_nr)
};

/// K*d*N*log2(n): the boosted-tree training cost in complexity units.
double training_units(double trees, double depth, double n_features, double n_rows);

/// Throws std::invalid_argument when tau*cov_nr <= 1 (non-positive log) or
/// tau is outside (0, 1].
CostModel cost_model(const CostModelParams& p);

/// OACAL time for one requirement whose first satisfier sits at fraction
/// pos_nr of the shuffled non-redundant coverage.
double oacal_time(const CostModelParams& p, double pos_nr);

/// Least-squares slope through the origin of (units, ms) samples. Needs at
/// least three samples with some non-zero unit count.
double fit_machine_constant(const std::vector<std::pair<double, double>>& samples);

/// Cost-model inputs for n modules from the coverage replay: positions are
/// the median and last first appearances, coverages the emission counts.
CostModelParams params_from_coverage(std::size_t n_modules);

/// Median wall time of `repeats` warm checks of base against reqs.
double median_check_ms(const Mlts& base, const std::vector<Requirement>& reqs,
                       const OccupancyAutomaton& occupancy, std::size_t repeats = 100);

/// Times train_gbt on random permutation rows of width n_features for each
/// row count and returns (units, ms) samples.
std::vector<std::pair<double, double>> time_training(std::size_t n_features,
                                                     const std::vector<std::size_t>& row_counts,
                                                     const ml::GbtParams& params,
                                                     std::uint64_t seed = 0);

nlohmann::json to_json(const Summary& s, bool timing = true);
nlohmann::json to_json(const CostModel& m);

}  // namespace modrev::bench
