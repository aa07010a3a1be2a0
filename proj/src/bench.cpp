#include "modrev/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "modrev/check.hpp"
#include "modrev/oasis.hpp"
#include "modrev/rng.hpp"

namespace modrev::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::string> machine_actions(const Mlts& base) {
  std::set<std::string> names;
  for (const auto& m : base.modules()) {
    for (const auto& a : m.actions) names.insert(a.name);
  }
  return {names.begin(), names.end()};
}

}  // namespace

std::string_view to_string(Template t) {
  switch (t) {
    case Template::t1: return "T1";
    case Template::t2: return "T2";
    case Template::t3: return "T3";
  }
  return "?";
}

std::string instantiate(Template t, const std::string& a, const std::string& b,
                        const std::string& c) {
  switch (t) {
    case Template::t1: return "G(" + a + " -> G !" + b + ")";
    case Template::t2: return "G(" + a + " -> (!" + b + " W " + c + "))";
    case Template::t3: return "G(" + a + " -> X !" + b + ")";
  }
  return {};
}

std::vector<GeneratedRequirement> generate_requirements(const Mlts& base,
                                                        const GeneratorConfig& gen,
                                                        const OccupancyAutomaton& occupancy) {
  auto actions = machine_actions(base);
  if (actions.size() < 3) {
    throw std::invalid_argument("requirement generation needs at least three distinct actions");
  }
  std::vector<std::string> pool;
  for (const auto& agent : {base.agents().user, base.agents().attacker}) {
    for (const auto& a : actions) pool.push_back(agent + "." + a);
  }

  // Weakened models of the shared coverage, built once.
  auto coverage = oasis::common_coverage(base.size());
  std::vector<Lts> models;
  models.reserve(coverage.size());
  for (const auto& p : coverage) {
    models.push_back(complete_deadlocks(weaken(to_lts(apply(base, p)), occupancy)));
  }
  CheckOptions options;
  options.agents = {base.agents().user, base.agents().attacker};

  SplitMix64 rng(gen.seed);
  std::vector<GeneratedRequirement> out;
  std::set<std::string> seen;
  std::size_t drawn = 0;
  while (out.size() < gen.target_count) {
    if (drawn++ == gen.retry_budget) {
      throw BudgetExceeded("requirement generation accepted " + std::to_string(out.size()) +
                           " of " + std::to_string(gen.target_count) + " within a budget of " +
                           std::to_string(gen.retry_budget) + " candidates");
    }
    auto tmpl = static_cast<Template>(rng.below(3));
    std::size_t i = rng.below(pool.size());
    std::size_t j = rng.below(pool.size() - 1);
    if (j >= i) ++j;
    std::size_t k = rng.below(pool.size() - 2);
    for (std::size_t skip : {std::min(i, j), std::max(i, j)}) {
      if (k >= skip) ++k;
    }
    std::string text = instantiate(tmpl, pool[i], pool[j], pool[k]);
    if (!seen.insert(text).second) continue;

    SafetyChecker checker(ltl::parse(text), options);
    std::optional<Permutation> witness;
    for (std::size_t r = 0; r < models.size() && !witness; ++r) {
      if (checker.run(models[r]).satisfied) witness = coverage[r];
    }
    if (!witness) continue;

    GeneratedRequirement g;
    std::ostringstream id;
    id << 'B' << std::setw(4) << std::setfill('0') << out.size() + 1;
    g.requirement.id = id.str();
    g.requirement.kind = RequirementKind::security;
    g.requirement.weight = 1;
    g.requirement.source = text;
    g.requirement.formula = ltl::parse(text);
    g.tmpl = tmpl;
    g.witness = std::move(witness);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<TrialRecord> run_benchmark(const Mlts& base,
                                       const std::vector<GeneratedRequirement>& reqs,
                                       const OccupancyAutomaton& occupancy,
                                       const PipelineConfig& cfg) {
  auto coverage = oasis::common_coverage(base.size());
  std::vector<TrialRecord> out;
  for (const auto& g : reqs) {
    TrialRecord t;
    t.n_modules = base.size();
    t.requirement_id = g.requirement.id;
    t.tmpl = g.tmpl;
    t.formula = g.requirement.source;
    t.oracle_satisfiable = g.witness.has_value();
    std::vector<Requirement> one{g.requirement};

    auto oasis = oasis::oasis_search(base, one, occupancy, cfg.check);
    t.oasis_found = oasis.found.has_value();
    t.oasis_position = oasis.position;
    t.oasis_checks = oasis.checks_performed;
    t.oasis_time_ms = oasis.elapsed_ms;

    auto oacal = early_exit_search(base, one, occupancy, cfg, coverage);
    t.oacal_found = oacal.found.has_value();
    t.oacal_phase = oacal.phase;
    t.oacal_position = oacal.position;
    t.oacal_checks = oacal.checks;
    t.oacal_time_ms = oacal.elapsed_ms;
    out.push_back(std::move(t));
  }
  return out;
}

Summary summarize(const std::vector<TrialRecord>& trials) {
  Summary s;
  s.trials = trials.size();
  if (trials.empty()) return s;
  s.n_modules = trials.front().n_modules;
  for (const auto& t : trials) {
    s.mean_oasis_ms += t.oasis_time_ms;
    s.mean_oacal_ms += t.oacal_time_ms;
    s.max_oasis_ms = std::max(s.max_oasis_ms, t.oasis_time_ms);
    s.max_oacal_ms = std::max(s.max_oacal_ms, t.oacal_time_ms);
    if (t.oasis_found != t.oracle_satisfiable || t.oacal_found != t.oracle_satisfiable) {
      ++s.disagreements;
    }
  }
  s.mean_oasis_ms /= static_cast<double>(s.trials);
  s.mean_oacal_ms /= static_cast<double>(s.trials);
  s.ratio_avg = s.mean_oacal_ms > 0 ? s.mean_oasis_ms / s.mean_oacal_ms : 0;
  s.ratio_max = s.max_oacal_ms > 0 ? s.max_oasis_ms / s.max_oacal_ms : 0;
  return s;
}

std::string trials_to_csv(const std::vector<TrialRecord>& trials, bool timing) {
  std::ostringstream os;
  os << "n_modules,requirement_id,template,oracle_satisfiable,oasis_found,oasis_position,"
        "oasis_checks,oasis_time_ms,oacal_found,oacal_phase,oacal_position,oacal_checks,"
        "oacal_time_ms,formula\n";
  auto ms = [&](double v) { return timing ? std::to_string(v) : std::string("-"); };
  for (const auto& t : trials) {
    os << t.n_modules << ',' << t.requirement_id << ',' << to_string(t.tmpl) << ','
       << t.oracle_satisfiable << ',' << t.oasis_found << ',' << t.oasis_position << ','
       << t.oasis_checks << ',' << ms(t.oasis_time_ms) << ',' << t.oacal_found << ','
       << to_string(t.oacal_phase) << ',' << t.oacal_position << ',' << t.oacal_checks << ','
       << ms(t.oacal_time_ms) << ",\"" << t.formula << "\"\n";
  }
  return os.str();
}

double training_units(double trees, double depth, double n_features, double n_rows) {
  return trees * depth * n_features * std::log2(n_rows);
}

CostModel cost_model(const CostModelParams& p) {
  if (!(p.tau > 0 && p.tau <= 1)) throw std::invalid_argument("tau must lie in (0, 1]");
  const double slice = p.tau * p.cov_nr;
  if (slice <= 1) {
    throw std::invalid_argument("log argument tau*cov_nr must exceed 1, got " +
                                std::to_string(slice));
  }
  const double ml = p.machine_constant *
                    training_units(p.trees, p.depth, static_cast<double>(p.n_modules), slice);
  CostModel m;
  m.t_oasis_avg = p.pos_avg * p.t_dcs;
  m.t_oasis_max = p.pos_max * p.t_dcs;
  m.checked_avg = (p.tau - p.tau * p.tau / 2) * p.cov_nr;
  m.checked_max = slice;
  m.ml_avg = (1 - p.tau) * ml;
  m.ml_max = ml;
  m.t_oacal_avg = m.checked_avg * p.t_mc + m.ml_avg;
  m.t_oacal_max = m.checked_max * p.t_mc + m.ml_max;
  m.ratio_avg = m.t_oasis_avg / m.t_oacal_avg;
  m.ratio_max = m.t_oasis_max / m.t_oacal_max;
  return m;
}

double oacal_time(const CostModelParams& p, double pos_nr) {
  if (pos_nr <= p.tau) return pos_nr * p.cov_nr * p.t_mc;
  return cost_model(p).t_oacal_max;
}

double fit_machine_constant(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("need at least three samples");
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : samples) {
    sxy += x * y;
    sxx += x * x;
  }
  if (sxx == 0) throw std::invalid_argument("degenerate samples: all complexity units are zero");
  return sxy / sxx;
}

CostModelParams params_from_coverage(std::size_t n_modules) {
  auto stats = oasis::coverage_stats(n_modules);
  CostModelParams p;
  p.n_modules = n_modules;
  p.pos_avg = static_cast<double>(stats.median_first_position);
  p.pos_max = static_cast<double>(stats.last_first_position);
  p.cov_r = static_cast<double>(stats.total.generated);
  p.cov_nr = static_cast<double>(stats.total.non_redundant);
  return p;
}

double median_check_ms(const Mlts& base, const std::vector<Requirement>& reqs,
                       const OccupancyAutomaton& occupancy, std::size_t repeats) {
  if (repeats == 0) throw std::invalid_argument("repeats must be positive");
  RequirementChecker checker(reqs, occupancy);
  for (int i = 0; i < 5; ++i) checker.check_each(base);
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t i = 0; i < repeats; ++i) {
    auto start = Clock::now();
    checker.check_each(base);
    samples.push_back(ms_since(start));
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

std::vector<std::pair<double, double>> time_training(std::size_t n_features,
                                                     const std::vector<std::size_t>& row_counts,
                                                     const ml::GbtParams& params,
                                                     std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::pair<double, double>> out;
  for (std::size_t n : row_counts) {
    std::vector<ml::FeatureRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = Permutation::identity(n_features);
      seeded_shuffle(p.order, rng());
      // A rule plus 10% label noise keeps every tree growing.
      bool label = p.order[0] < p.order[n_features - 1];
      if (rng.below(10) == 0) label = !label;
      rows.push_back(ml::FeatureRow::from(p, label));
    }
    auto start = Clock::now();
    auto model = ml::train_gbt(std::move(rows), params);
    double ms = ms_since(start);
    out.emplace_back(training_units(static_cast<double>(params.trees),
                                    static_cast<double>(params.max_depth),
                                    static_cast<double>(n_features), static_cast<double>(n)),
                     ms);
  }
  return out;
}

nlohmann::json to_json(const Summary& s, bool timing) {
  nlohmann::json j{{"n_modules", s.n_modules},
                   {"trials", s.trials},
                   {"disagreements", s.disagreements}};
  if (timing) {
    j["mean_oasis_ms"] = s.mean_oasis_ms;
    j["mean_oacal_ms"] = s.mean_oacal_ms;
    j["max_oasis_ms"] = s.max_oasis_ms;
    j["max_oacal_ms"] = s.max_oacal_ms;
    j["ratio_avg"] = s.ratio_avg;
    j["ratio_max"] = s.ratio_max;
  }
  return j;
}

nlohmann::json to_json(const CostModel& m) {
  return {{"t_oasis_avg", m.t_oasis_avg}, {"t_oasis_max", m.t_oasis_max},
          {"t_oacal_avg", m.t_oacal_avg}, {"t_oacal_max", m.t_oacal_max},
          {"ratio_avg", m.ratio_avg},     {"ratio_max", m.ratio_max},
          {"checked_avg", m.checked_avg}, {"checked_max", m.checked_max},
          {"ml_avg", m.ml_avg},           {"ml_max", m.ml_max}};
}

}  // namespace modrev::bench
