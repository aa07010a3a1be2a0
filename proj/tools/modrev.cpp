// modrev: recomposition search, checking and coverage analysis from the
// command line.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "io.hpp"
#include "modrev/bench.hpp"
#include "modrev/check.hpp"
#include "modrev/lts.hpp"
#include "modrev/mlts.hpp"
#include "modrev/oasis.hpp"
#include "modrev/pipeline.hpp"
#include "modrev/recompose.hpp"
#include "modrev/requirement.hpp"
#include "modrev/selection.hpp"
#include "modrev/weaken.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace modrev::cli {
namespace {

enum Exit { kOk = 0, kInputError = 1, kNothingFound = 2, kAssertMismatch = 3 };

// An input problem already formatted for the user.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string located(const fs::path& path, const ParseError& e) {
  return path.string() + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
         ": " + e.message();
}

template <typename Fn>
auto parse_file(const fs::path& path, const std::string& text, Fn&& fn) {
  try {
    return fn(text);
  } catch (const ParseError& e) {
    throw InputError(located(path, e));
  } catch (const ModelError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Mlts load_mlts(const fs::path& path, Manifest* manifest = nullptr) {
  auto text = read_file(path);
  if (manifest) manifest->input(path, text);
  return parse_file(path, text, [](const std::string& t) { return parse_mlts(t); });
}

std::vector<Requirement> load_requirements(const fs::path& path, Manifest* manifest = nullptr) {
  auto text = read_file(path);
  if (manifest) manifest->input(path, text);
  return parse_file(path, text, [](const std::string& t) { return parse_requirements(t); });
}

std::vector<OrderingLint> load_lints(const std::string& path) {
  if (path.empty()) return {};
  auto text = read_file(path);
  return parse_file(path, text, [](const std::string& t) { return parse_lints(t); });
}

Mlts maybe_permuted(const Mlts& base, const std::string& permutation) {
  if (permutation.empty()) return base;
  auto p = Permutation::parse(permutation);
  validate(p, base.size());
  return apply(base, p);
}

std::string first_keyword(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string word;
    if (words >> word) return word.substr(0, word.find(','));
  }
  return {};
}

void write_output(Manifest& manifest, const fs::path& path, const std::string& content) {
  write_file(path, content);
  manifest.output(path);
}

void finish(Manifest& manifest, const fs::path& out_dir, const std::string& config,
            bool timing) {
  write_output(manifest, out_dir / "run.conf", config);
  write_file(out_dir / "manifest.json", manifest.to_json(timing).dump(2) + "\n");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Options shared by the search-style commands.
struct MlOptions {
  double tau = 0.3;
  std::uint64_t seed = 0;
  std::size_t trees = 100;
  std::size_t depth = 6;
  double eta = 0.1;
  bool verify = true;
  std::size_t verify_slack = 1;
  std::string coverage = "full";
  std::size_t jobs = 1;
  bool weaken_functional = false;

  void add_to(CLI::App& app) {
    app.add_option("--tau", tau, "Fraction of shuffled revisions labelled by model checking")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", seed, "Seed for every random choice of the run");
    app.add_option("--trees", trees, "Boosting rounds")->check(CLI::PositiveNumber);
    app.add_option("--depth", depth, "Maximum tree depth")->check(CLI::PositiveNumber);
    app.add_option("--eta", eta, "Learning rate")->check(CLI::PositiveNumber);
    app.add_flag("--verify,!--no-verify", verify, "Re-check predicted positives")
        ->default_str(verify ? "true" : "false");
    app.add_option("--verify-slack", verify_slack,
                   "Also verify revisions with up to this many predicted-false verdicts");
    app.add_option("--coverage", coverage, "Revision set: full (all orderings) or common")
        ->check(CLI::IsMember({"full", "common"}));
    app.add_option("--jobs", jobs, "Worker threads for checking")->check(CLI::PositiveNumber);
    app.add_flag("--weaken-functional", weaken_functional,
                 "Check functional requirements on the weakened model too");
  }

  PipelineConfig config() const {
    PipelineConfig cfg;
    cfg.tau = tau;
    cfg.seed = seed;
    cfg.verify = verify;
    cfg.verify_slack = verify_slack;
    cfg.coverage = parse_coverage(coverage);
    cfg.gbt.trees = trees;
    cfg.gbt.max_depth = depth;
    cfg.gbt.eta = eta;
    cfg.jobs = jobs;
    cfg.check.weaken_functional = weaken_functional;
    return cfg;
  }
};

struct QueryOptions {
  std::optional<int> threshold;
  std::string waivable;
  std::optional<std::size_t> max_waived;
  bool allow_predicted = false;
  bool exact = false;

  void add_to(CLI::App& app) {
    app.add_flag("--exact", exact,
                 "Also check revisions excluded only by predicted-false verdicts");
    app.add_option("--threshold", threshold,
                   "Minimum payoff (sum of satisfied weights); default: all weights");
    app.add_option("--waivable", waivable, "Comma-separated requirement ids that may fail");
    app.add_option("--max-waived", max_waived, "Maximum number of failed requirements");
    app.add_flag("--allow-predicted", allow_predicted,
                 "Accept unverified predicted verdicts instead of refusing");
  }

  DegradationQuery query(const std::vector<Requirement>& reqs) const {
    DegradationQuery q;
    q.payoff_threshold = threshold.value_or(total_weight(reqs));
    if (!waivable.empty()) {
      std::vector<std::string> ids;
      std::stringstream ss(waivable);
      for (std::string id; std::getline(ss, id, ',');) {
        if (!id.empty()) ids.push_back(id);
      }
      q.waivable = ids;
    }
    q.max_waived = max_waived;
    return q;
  }
};

// Rows that would qualify if their predicted-false entries were true.
std::vector<std::size_t> possibly_missed(const RevisionVerdicts& v,
                                         const std::vector<Requirement>& reqs,
                                         const DegradationQuery& q) {
  RevisionVerdicts optimistic = v;
  bool any = false;
  for (auto& row : optimistic.tags) {
    for (auto& t : row) {
      if (t == Tag::predicted_false) {
        t = Tag::predicted_true;
        any = true;
      }
    }
  }
  if (!any) return {};
  std::vector<bool> actual(v.size(), false);
  for (const auto& s : degrade(v, reqs, q, true)) actual[s.revision] = true;
  std::vector<std::size_t> out;
  for (const auto& s : degrade(optimistic, reqs, q, true)) {
    if (!actual[s.revision]) out.push_back(s.revision);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- validate ----

int cmd_validate(const std::vector<std::string>& paths) {
  int status = kOk;
  for (const auto& p : paths) {
    try {
      auto text = read_file(p);
      auto kind = first_keyword(text);
      std::string summary;
      if (kind == "system") {
        auto m = parse_file(p, text, [](const std::string& t) { return parse_mlts(t); });
        summary = "mlts " + m.name() + ", " + std::to_string(m.size()) + " modules";
      } else if (kind == "lts") {
        auto l = parse_file(p, text, [](const std::string& t) { return parse_lts(t); });
        summary = "lts " + l.name() + ", " + std::to_string(l.num_states()) + " states";
      } else if (kind == "req") {
        auto r = parse_file(p, text, [](const std::string& t) { return parse_requirements(t); });
        summary = std::to_string(r.size()) + " requirements, total weight " +
                  std::to_string(total_weight(r));
      } else if (kind == "lint") {
        auto l = parse_file(p, text, [](const std::string& t) { return parse_lints(t); });
        summary = std::to_string(l.size()) + " lints";
      } else if (kind == "permutation") {
        auto v = parse_file(p, text, [](const std::string& t) { return verdicts_from_csv(t); });
        summary = "verdicts, " + std::to_string(v.size()) + " revisions";
      } else {
        throw InputError(p + ":1:1: unrecognized file (expected system, lts, req, lint or a "
                         "verdict table)");
      }
      std::cout << "ok " << p << ": " << summary << "\n";
    } catch (const InputError& e) {
      std::cerr << e.what() << "\n";
      status = kInputError;
    } catch (const std::exception& e) {
      std::cerr << p << ": " << e.what() << "\n";
      status = kInputError;
    }
  }
  return status;
}

// ---- weaken / check / enumerate ----

Lts load_machine(const std::string& path, const std::string& permutation, Agents& agents) {
  auto text = read_file(path);
  if (first_keyword(text) == "lts") {
    if (!permutation.empty()) throw InputError("--permutation needs an mLTS model");
    return parse_file(path, text, [](const std::string& t) { return parse_lts(t); });
  }
  auto m = parse_file(path, text, [](const std::string& t) { return parse_mlts(t); });
  agents = m.agents();
  return to_lts(maybe_permuted(m, permutation));
}

int cmd_weaken(const std::string& model, const std::string& permutation, const std::string& out) {
  Agents agents;
  Lts machine = load_machine(model, permutation, agents);
  auto text = render_lts(weaken(machine, OccupancyAutomaton::standard(agents)));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return kOk;
}

int cmd_check(const std::string& model, const std::string& reqs_path,
              const std::string& permutation, bool weaken_functional) {
  auto reqs = load_requirements(reqs_path);
  auto text = read_file(model);
  bool plain = first_keyword(text) == "lts";
  std::optional<Mlts> rev;
  std::optional<Lts> lts;
  if (plain) {
    Agents agents;
    lts = complete_deadlocks(load_machine(model, permutation, agents));
  } else {
    rev = maybe_permuted(load_mlts(model), permutation);
  }
  RequirementCheckOptions options;
  options.weaken_functional = weaken_functional;
  for (const auto& r : reqs) {
    Verdict v = plain ? check(*lts, r.formula)
                      : check_requirement(*rev, r, OccupancyAutomaton::standard(rev->agents()),
                                          options);
    std::cout << r.id << (v.satisfied ? " satisfied" : " violated");
    if (!v.satisfied) {
      std::cout << ":";
      for (const auto& a : v.counterexample) std::cout << ' ' << a;
    }
    std::cout << "\n";
    for (const auto& w : v.warnings) std::cerr << "warning: " << r.id << ": " << w << "\n";
  }
  return kOk;
}

int cmd_enumerate(const std::string& model, std::size_t modules, const std::string& order,
                  std::uint64_t seed, std::size_t limit, bool count_only) {
  std::size_t n = modules;
  if (!model.empty()) n = load_mlts(model).size();
  if (n == 0) throw InputError("give a model or --modules");
  auto ord = order == "shuffled" ? EnumerationOrder::shuffled : EnumerationOrder::lexicographic;
  PermutationStream stream(n, ord, seed);
  std::cout << "# " << stream.size() << " revisions\n";
  if (count_only) return kOk;
  std::size_t shown = 0;
  while (auto p = stream.next()) {
    if (limit && shown == limit) break;
    std::cout << p->to_string() << "\n";
    ++shown;
  }
  return kOk;
}

// ---- search ----

json selection_doc(const std::vector<Selected>& selected, const Mlts& base,
                   const DegradationQuery& q) {
  json doc = report_json(selected, base, {}, q);
  doc["count"] = selected.size();
  return doc;
}

int cmd_search(const std::string& model, const std::string& reqs_path, const std::string& mode,
               const MlOptions& ml, bool early_exit, bool with_oracle, bool allow_predicted,
               const std::string& out, bool no_timing, const std::string& config) {
  Manifest manifest("search", config);
  auto base = load_mlts(model, &manifest);
  auto reqs = load_requirements(reqs_path, &manifest);
  auto occ = OccupancyAutomaton::standard(base.agents());
  auto cfg = ml.config();
  manifest.seed("seed", cfg.seed);
  fs::path dir(out);
  auto start = std::chrono::steady_clock::now();
  DegradationQuery all;
  all.payoff_threshold = total_weight(reqs);
  all.waivable = std::vector<std::string>{};
  int status = kOk;

  if (mode == "oasis") {
    auto r = oasis::oasis_search(base, reqs, occ, cfg.check);
    json doc{{"mode", "oasis"},
             {"found", r.found ? json(r.found->to_string()) : json(nullptr)},
             {"position", r.position},
             {"checks", r.checks_performed},
             {"requirement_checks", r.requirement_checks}};
    if (!no_timing) doc["elapsed_ms"] = r.elapsed_ms;
    std::vector<Selected> sel;
    if (r.found) {
      Selected s;
      s.permutation = *r.found;
      s.payoff = all.payoff_threshold;
      for (const auto& q : reqs) s.satisfied.push_back(q.id);
      sel.push_back(std::move(s));
    }
    write_output(manifest, dir / "search.json", doc.dump(2) + "\n");
    write_output(manifest, dir / "selection.json", selection_doc(sel, base, all).dump(2) + "\n");
    std::cout << (r.found ? "found " + r.found->to_string() + " at position " +
                                std::to_string(r.position)
                          : std::string("no revision found")) << " after " << r.checks_performed
              << " checks\n";
    if (!r.found) status = kNothingFound;
  } else if (mode == "oacal" && early_exit) {
    auto r = early_exit_search(base, reqs, occ, cfg);
    json doc{{"mode", "oacal"},
             {"early_exit", true},
             {"found", r.found ? json(r.found->to_string()) : json(nullptr)},
             {"phase", to_string(r.phase)},
             {"position", r.position},
             {"checks", r.checks}};
    if (!no_timing) doc["elapsed_ms"] = r.elapsed_ms;
    write_output(manifest, dir / "search.json", doc.dump(2) + "\n");
    std::cout << (r.found ? "found " + r.found->to_string() : std::string("no revision found"))
              << " in phase " << to_string(r.phase) << " after " << r.checks << " checks\n";
    if (!r.found) status = kNothingFound;
  } else {
    RevisionVerdicts v = mode == "exhaustive" ? run_exhaustive(base, reqs, occ, cfg)
                                              : run_pipeline(base, reqs, occ, cfg);
    for (const auto& w : v.warnings) std::cerr << "warning: " << w << "\n";
    write_output(manifest, dir / "verdicts.csv", verdicts_to_csv(v));
    manifest.extra()["verdicts_sha256"] = sha256_hex(verdicts_to_csv(v));
    json summary = summary_json(v, !no_timing);
    summary["mode"] = mode;
    if (with_oracle && mode == "oacal") {
      auto oracle = run_exhaustive(base, reqs, occ, cfg);
      auto metrics = prediction_metrics(v, oracle);
      auto& m = summary["oracle_metrics"] = json::object();
      for (std::size_t r = 0; r < reqs.size(); ++r) {
        m[reqs[r].id] = metrics[r] ? ml::to_json(*metrics[r]) : json(nullptr);
      }
      summary["eligible_matches_oracle"] = eligible(v, reqs, true) == eligible(oracle, reqs);
    }
    manifest.extra()["run"] = summary;
    manifest.extra()["weaken_functional"] = cfg.check.weaken_functional;
    try {
      auto sel = degrade(v, reqs, all, allow_predicted);
      write_output(manifest, dir / "selection.json", selection_doc(sel, base, all).dump(2) + "\n");
      std::cout << sel.size() << " eligible of " << v.size() << " revisions\n";
      if (sel.empty()) status = kNothingFound;
    } catch (const UnverifiedPrediction& e) {
      std::cerr << "error: " << e.what()
                << "; rerun with --verify or pass --allow-predicted\n";
      status = kInputError;
    }
  }
  manifest.timing("total", elapsed_ms(start));
  finish(manifest, dir, config, !no_timing);
  return status;
}

// ---- table1 ----

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      auto n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, dots)), std::stoul(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw InputError("--n-range must look like 4..9, got '" + text + "'");
  }
}

int cmd_table1(const std::string& range, bool assert_paper, const std::string& out,
               const std::string& config) {
  auto [lo, hi] = parse_range(range);
  if (lo < 2 || hi > 9 || lo > hi) throw InputError("--n-range must lie within 2..9");
  auto rows = oasis::table1(lo, hi);
  std::ostringstream csv;
  csv << "n_modules,subset_size,generated,non_redundant\n";
  json doc = json::array();
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.cells.size(); ++k) {
      csv << row.n_modules << ',' << k + 1 << ',' << row.cells[k].generated << ','
          << row.cells[k].non_redundant << '\n';
    }
    csv << row.n_modules << ",all," << row.total.generated << ',' << row.total.non_redundant
        << '\n';
    doc.push_back({{"n_modules", row.n_modules},
                   {"generated", row.total.generated},
                   {"non_redundant", row.total.non_redundant},
                   {"median_first_position", row.median_first_position},
                   {"last_first_position", row.last_first_position},
                   {"mean_first_position", row.mean_first_position},
                   {"bin_width", row.bin_width},
                   {"bin_counts", row.bin_counts},
                   {"ols", {{"slope", row.fit.slope}, {"intercept", row.fit.intercept}}}});
  }
  std::cout << csv.str();
  if (!out.empty()) {
    Manifest manifest("table1", config);
    fs::path dir(out);
    write_output(manifest, dir / "table1.csv", csv.str());
    write_output(manifest, dir / "table1.json", doc.dump(2) + "\n");
    finish(manifest, dir, config, false);
  }
  if (!assert_paper) return kOk;
  if (lo < 4) std::cerr << "note: no published values below 4 modules\n";
  auto mismatches = oasis::compare_with_reference(rows);
  for (const auto& m : mismatches) std::cerr << "mismatch: " << m << "\n";
  if (!mismatches.empty()) return kAssertMismatch;
  std::cerr << "all published cells match\n";
  return kOk;
}

// ---- bench ----

int cmd_bench(const std::string& model, std::size_t count, std::size_t budget,
              std::size_t repeats, const MlOptions& ml, const std::string& out, bool no_timing,
              const std::string& config) {
  Manifest manifest("bench", config);
  auto base = load_mlts(model, &manifest);
  auto occ = OccupancyAutomaton::standard(base.agents());
  auto cfg = ml.config();
  cfg.coverage = Coverage::common;
  manifest.seed("seed", cfg.seed);
  bench::GeneratorConfig gen;
  gen.seed = cfg.seed;
  gen.target_count = count;
  gen.retry_budget = budget;
  auto start = std::chrono::steady_clock::now();
  auto generated = bench::generate_requirements(base, gen, occ);
  std::vector<Requirement> reqs;
  for (const auto& g : generated) reqs.push_back(g.requirement);
  auto trials = bench::run_benchmark(base, generated, occ, cfg);
  auto summary = bench::summarize(trials);

  json doc{{"summary", bench::to_json(summary, !no_timing)}};
  auto params = bench::params_from_coverage(base.size());
  params.tau = cfg.tau;
  params.trees = static_cast<double>(cfg.gbt.trees);
  params.depth = static_cast<double>(cfg.gbt.max_depth);
  doc["coverage"] = {{"cov_r", params.cov_r},
                     {"cov_nr", params.cov_nr},
                     {"pos_avg", params.pos_avg},
                     {"pos_max", params.pos_max}};
  doc["cost_model_reference_inputs"] = bench::to_json(bench::cost_model(params));
  if (!no_timing) {
    double t_mc = bench::median_check_ms(base, reqs, occ, repeats);
    auto samples = bench::time_training(base.size(), {250, 500, 1000, 2000}, cfg.gbt, cfg.seed);
    double c = bench::fit_machine_constant(samples);
    auto local = params;
    local.t_mc = local.t_dcs = t_mc;
    local.machine_constant = c;
    doc["measured"] = {{"t_mc_ms", t_mc}, {"machine_constant", c}};
    doc["cost_model_measured"] = bench::to_json(bench::cost_model(local));
  }
  fs::path dir(out);
  write_output(manifest, dir / "trials.csv", bench::trials_to_csv(trials, !no_timing));
  write_output(manifest, dir / "summary.json", doc.dump(2) + "\n");
  write_output(manifest, dir / "requirements.req", render_requirements(reqs));
  manifest.timing("total", elapsed_ms(start));
  finish(manifest, dir, config, !no_timing);
  std::cout << summary.trials << " trials, " << summary.disagreements << " disagreements";
  if (!no_timing) {
    std::cout << ", mean ratio " << summary.ratio_avg << ", max ratio " << summary.ratio_max;
  }
  std::cout << "\n";
  return summary.disagreements == 0 ? kOk : kAssertMismatch;
}

// ---- degrade / report ----

struct LoadedVerdicts {
  RevisionVerdicts verdicts;
  std::optional<json> manifest;
};

LoadedVerdicts load_verdicts(const fs::path& path, const std::string& reqs_text,
                             Manifest& manifest) {
  auto text = read_file(path);
  manifest.input(path, text);
  LoadedVerdicts out{parse_file(path, text,
                                [](const std::string& t) { return verdicts_from_csv(t); }),
                     std::nullopt};
  auto side = path.parent_path() / "manifest.json";
  if (!fs::exists(side)) return out;
  auto doc = json::parse(read_file(side));
  if (doc.value("verdicts_sha256", "") != sha256_hex(text)) {
    throw InputError(path.string() + ": stale verdict file (digest differs from " +
                     side.string() + ")");
  }
  bool reqs_known = false;
  for (const auto& in : doc.value("inputs", json::array())) {
    if (in.value("sha256", "") == sha256_hex(reqs_text)) reqs_known = true;
  }
  if (!reqs_known) {
    throw InputError(path.string() + ": verdicts were produced for a different requirement file");
  }
  out.verdicts.verify = doc.value("run", json::object()).value("verify", true);
  out.manifest = std::move(doc);
  return out;
}

int select_and_emit(const std::string& command, const std::string& model,
                    const std::string& verdicts_path, const std::string& reqs_path,
                    const std::string& lints_path, const QueryOptions& qo, bool text,
                    const std::string& out, const std::string& config) {
  Manifest manifest(command, config);
  auto reqs_text = read_file(reqs_path);
  manifest.input(reqs_path, reqs_text);
  auto reqs = parse_file(reqs_path, reqs_text,
                         [](const std::string& t) { return parse_requirements(t); });
  auto loaded = load_verdicts(verdicts_path, reqs_text, manifest);
  auto& v = loaded.verdicts;
  auto lints = load_lints(lints_path);
  auto q = qo.query(reqs);

  std::string model_path = model;
  if (model_path.empty() && loaded.manifest) {
    for (const auto& in : loaded.manifest->value("inputs", json::array())) {
      auto p = in.value("path", "");
      if (fs::exists(p) && first_keyword(read_file(p)) == "system") {
        model_path = p;
        break;
      }
    }
  }
  std::optional<Mlts> base;
  if (!model_path.empty()) base = load_mlts(model_path, &manifest);

  RequirementCheckOptions check_options;
  if (loaded.manifest) {
    check_options.weaken_functional = loaded.manifest->value("weaken_functional", false);
  }
  // Verify the predictions this query relies on, when a model is at hand.
  // With --exact, also verify rows a predicted-false entry keeps out.
  std::size_t verified = 0;
  if (!qo.allow_predicted && base) {
    auto occ = OccupancyAutomaton::standard(base->agents());
    auto rows = relied_upon_predictions(v, reqs, q);
    if (qo.exact) {
      auto missed = possibly_missed(v, reqs, q);
      rows.insert(rows.end(), missed.begin(), missed.end());
    }
    for (auto i : rows) verified += verify_revision(v, i, *base, reqs, occ, check_options);
  }
  auto missed = possibly_missed(v, reqs, q);
  std::vector<Selected> sel;
  try {
    sel = degrade(v, reqs, q, qo.allow_predicted);
  } catch (const UnverifiedPrediction& e) {
    throw InputError(std::string(e.what()) +
                     "; give the model so they can be verified, or pass --allow-predicted");
  }
  if (text && !base) throw InputError("report needs the model to render revisions");
  json doc = base ? report_json(sel, *base, lints, q) : report_json(sel, Mlts("none", {Module{"m", {{"go", Direction::forward, 0, ""}}}}), {}, q);
  doc["count"] = sel.size();
  doc["on_demand_checks"] = verified;
  doc["possibly_missed"] = missed.size();
  if (!missed.empty()) {
    std::cerr << "note: " << missed.size()
              << " revisions are excluded only by predicted-false verdicts; --exact checks them\n";
  }
  if (text) {
    std::cout << report_text(sel, *base, lints, q);
  } else {
    std::cout << doc.dump(2) << "\n";
  }
  if (!out.empty()) {
    fs::path dir(out);
    write_output(manifest, dir / (command + ".json"), doc.dump(2) + "\n");
    if (text) write_output(manifest, dir / "report.txt", report_text(sel, *base, lints, q));
    finish(manifest, dir, config, false);
  }
  return kOk;
}

// Fills options left unset on the command line from a key=value file.
void apply_config(CLI::App& sub, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw InputError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "config" || item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()}) {
      throw InputError(path + ": unknown section '" + item.parents.front() + "'");
    }
    CLI::Option* opt = nullptr;
    for (auto* o : sub.get_options()) {
      if (o->check_lname(item.name) || o->check_name(item.name)) opt = o;
    }
    if (!opt) throw InputError(path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    try {
      for (const auto& in : item.inputs) opt->add_result(in);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InputError(path + ": " + item.name + ": " + e.what());
    }
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Module recomposition search for interaction specifications", "modrev"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::map<CLI::App*, std::string> config_files;
  auto config_of = [&config_files](CLI::App* sub) {
    sub->add_option("--config", config_files[sub],
                    "key=value file mirroring the flags (run.conf); flags win");
  };

  // validate
  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Parse model, requirement and lint files");
  validate->add_option("paths", validate_paths, "Files to check")->required();

  // weaken
  std::string model, reqs_path, permutation, out_file;
  auto* weaken_cmd = app.add_subcommand("weaken", "Compose a model with the occupancy automaton");
  weaken_cmd->add_option("model", model, "mLTS or LTS file")->required();
  weaken_cmd->add_option("--permutation", permutation, "Revision to expand, e.g. 3,1,2");
  weaken_cmd->add_option("--out", out_file, "Write the LTS here instead of stdout");

  // check
  bool weaken_functional = false;
  auto* check_cmd = app.add_subcommand("check", "Check requirements against one revision");
  check_cmd->add_option("model", model, "mLTS or LTS file")->required();
  check_cmd->add_option("requirements", reqs_path, "Requirement file")->required();
  check_cmd->add_option("--permutation", permutation, "Revision to check, e.g. 3,1,2");
  check_cmd->add_flag("--weaken-functional", weaken_functional,
                      "Check functional requirements on the weakened model too");

  // enumerate
  std::size_t modules = 0, limit = 0;
  std::string order = "lexicographic";
  std::uint64_t enum_seed = 0;
  bool count_only = false;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "List module orderings");
  enumerate_cmd->add_option("model", model, "mLTS file (or use --modules)");
  enumerate_cmd->add_option("--modules", modules, "Module count when no model is given");
  enumerate_cmd->add_option("--order", order, "lexicographic or shuffled")
      ->check(CLI::IsMember({"lexicographic", "shuffled"}));
  enumerate_cmd->add_option("--seed", enum_seed, "Shuffle seed");
  enumerate_cmd->add_option("--limit", limit, "Print at most this many (0: all)");
  enumerate_cmd->add_flag("--count", count_only, "Print only the count");

  // search
  MlOptions ml;
  std::string mode = "oacal", out_dir = "out";
  bool early_exit = false, with_oracle = false, no_timing = false;
  QueryOptions qo;
  auto* search = app.add_subcommand("search", "Find revisions satisfying every requirement");
  search->add_option("model", model, "mLTS file")->required();
  search->add_option("requirements", reqs_path, "Requirement file")->required();
  search->add_option("--mode", mode, "exhaustive, oacal or oasis")
      ->check(CLI::IsMember({"exhaustive", "oacal", "oasis"}));
  ml.add_to(*search);
  search->add_flag("--early-exit", early_exit, "oacal: stop at the first verified revision");
  search->add_flag("--with-oracle", with_oracle,
                   "oacal: also check everything and report prediction metrics");
  search->add_flag("--allow-predicted", qo.allow_predicted,
                   "Accept unverified predicted verdicts in the selection");
  search->add_option("--out", out_dir, "Output directory");
  search->add_flag("--no-timing", no_timing, "Leave wall-clock fields out of the outputs");
  config_of(search);

  // table1
  std::string range = "4..9";
  bool assert_paper = false;
  std::string table_out;
  auto* table1 = app.add_subcommand("table1", "Coverage distribution of the subset-merge search");
  table1->add_option("--n-range", range, "Module counts, e.g. 4..9");
  table1->add_flag("--assert-paper", assert_paper,
                   "Compare with the published table; exit 3 on mismatch");
  table1->add_option("--out", table_out, "Also write CSV, JSON and a manifest here");
  config_of(table1);

  // bench
  std::size_t count = 20, budget = 100000, repeats = 100;
  MlOptions bench_ml;
  std::string bench_out = "bench_out";
  bool bench_no_timing = false;
  auto* bench_cmd = app.add_subcommand("bench", "Time both searches on generated requirements");
  bench_cmd->add_option("model", model, "mLTS file")->required();
  bench_cmd->add_option("--count", count, "Generated requirements")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--budget", budget, "Candidates drawn before giving up");
  bench_cmd->add_option("--repeats", repeats, "Warm checks behind the per-check time");
  bench_ml.add_to(*bench_cmd);
  bench_cmd->add_option("--out", bench_out, "Output directory");
  bench_cmd->add_flag("--no-timing", bench_no_timing, "Leave wall-clock fields out");
  config_of(bench_cmd);

  // degrade
  std::string verdicts_path, lints_path, degrade_out;
  auto* degrade_cmd = app.add_subcommand("degrade", "Select revisions by payoff threshold");
  degrade_cmd->add_option("verdicts", verdicts_path, "verdicts.csv from search")->required();
  degrade_cmd->add_option("requirements", reqs_path, "Requirement file")->required();
  degrade_cmd->add_option("--model", model, "mLTS file for on-demand verification");
  qo.add_to(*degrade_cmd);
  degrade_cmd->add_option("--lints", lints_path, "Ordering lint file");
  degrade_cmd->add_option("--out", degrade_out, "Also write JSON and a manifest here");
  config_of(degrade_cmd);

  // report
  auto* report_cmd = app.add_subcommand("report", "Render selected revisions with lints");
  report_cmd->add_option("model", model, "mLTS file")->required();
  report_cmd->add_option("verdicts", verdicts_path, "verdicts.csv from search")->required();
  report_cmd->add_option("requirements", reqs_path, "Requirement file")->required();
  QueryOptions report_qo;
  report_qo.add_to(*report_cmd);
  report_cmd->add_option("--lints", lints_path, "Ordering lint file");
  report_cmd->add_option("--out", degrade_out, "Also write JSON, text and a manifest here");
  config_of(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    for (auto& [sub, path] : config_files) {
      if (*sub && !path.empty()) apply_config(*sub, path);
    }
    if (*validate) return cmd_validate(validate_paths);
    if (*weaken_cmd) return cmd_weaken(model, permutation, out_file);
    if (*check_cmd) return cmd_check(model, reqs_path, permutation, weaken_functional);
    if (*enumerate_cmd) {
      return cmd_enumerate(model, modules, order, enum_seed, limit, count_only);
    }
    if (*search) {
      return cmd_search(model, reqs_path, mode, ml, early_exit, with_oracle, qo.allow_predicted,
                        out_dir, no_timing, search->config_to_str(true));
    }
    if (*table1) return cmd_table1(range, assert_paper, table_out, table1->config_to_str(true));
    if (*bench_cmd) {
      return cmd_bench(model, count, budget, repeats, bench_ml, bench_out, bench_no_timing,
                       bench_cmd->config_to_str(true));
    }
    if (*degrade_cmd) {
      return select_and_emit("degrade", model, verdicts_path, reqs_path, lints_path, qo, false,
                             degrade_out, degrade_cmd->config_to_str(true));
    }
    if (*report_cmd) {
      return select_and_emit("report", model, verdicts_path, reqs_path, lints_path, report_qo,
                             true, degrade_out, report_cmd->config_to_str(true));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace modrev::cli

int main(int argc, char** argv) { return modrev::cli::run(argc, argv); }
