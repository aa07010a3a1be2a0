#include "modrev/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "modrev/oasis.hpp"
#include "modrev/parallel.hpp"
#include "modrev/rng.hpp"
#include "text_util.hpp"

namespace modrev {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kNoScore = std::numeric_limits<double>::quiet_NaN();

std::size_t slice_size(double tau, std::size_t total) {
  // Guard against 0.3 * 5040 landing a hair above an integer.
  auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(total) - 1e-9));
  return std::min(std::max<std::size_t>(k, total == 0 ? 0 : 1), total);
}

std::vector<std::unique_ptr<RequirementChecker>> make_checkers(
    std::size_t jobs, const std::vector<Requirement>& reqs, const OccupancyAutomaton& occupancy,
    const RequirementCheckOptions& options) {
  std::vector<std::unique_ptr<RequirementChecker>> out;
  for (std::size_t w = 0; w < std::max<std::size_t>(1, jobs); ++w) {
    out.push_back(std::make_unique<RequirementChecker>(reqs, occupancy, options));
  }
  return out;
}

Tag checked(bool v) { return v ? Tag::checked_true : Tag::checked_false; }
Tag verified(bool v) { return v ? Tag::verified_true : Tag::verified_false; }

RevisionVerdicts empty_table(const Mlts& base, const std::vector<Requirement>& reqs,
                             const PipelineConfig& cfg) {
  validate(cfg);
  RevisionVerdicts v;
  v.revisions = coverage_revisions(base.modules().size(), cfg.coverage);
  for (const auto& r : reqs) {
    v.requirement_ids.push_back(r.id);
    v.requirements.push_back({r.id, false, 0, 0});
  }
  v.tags.assign(v.size(), std::vector<Tag>(reqs.size(), Tag::checked_false));
  v.scores.assign(v.size(), std::vector<double>(reqs.size(), kNoScore));
  v.shuffle.resize(v.size());
  std::iota(v.shuffle.begin(), v.shuffle.end(), std::size_t{0});
  v.verify = cfg.verify;
  return v;
}

}  // namespace

std::string_view to_string(Coverage c) { return c == Coverage::full ? "full" : "common"; }

Coverage parse_coverage(std::string_view text) {
  if (text == "full") return Coverage::full;
  if (text == "common") return Coverage::common;
  throw std::invalid_argument("coverage must be full or common, got '" + std::string(text) + "'");
}

std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::checked_true: return "checked-true";
    case Tag::checked_false: return "checked-false";
    case Tag::predicted_true: return "predicted-true";
    case Tag::predicted_false: return "predicted-false";
    case Tag::verified_true: return "verified-true";
    case Tag::verified_false: return "verified-false";
  }
  return "?";
}

Tag parse_tag(std::string_view text) {
  for (Tag t : {Tag::checked_true, Tag::checked_false, Tag::predicted_true, Tag::predicted_false,
                Tag::verified_true, Tag::verified_false}) {
    if (to_string(t) == text) return t;
  }
  throw std::invalid_argument("unknown verdict tag '" + std::string(text) + "'");
}

bool is_true(Tag t) {
  return t == Tag::checked_true || t == Tag::predicted_true || t == Tag::verified_true;
}

bool is_predicted(Tag t) { return t == Tag::predicted_true || t == Tag::predicted_false; }

void validate(const PipelineConfig& cfg) {
  if (!(cfg.tau > 0 && cfg.tau <= 1)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (cfg.jobs == 0) throw std::invalid_argument("jobs must be at least 1");
}

std::vector<Permutation> coverage_revisions(std::size_t n_modules, Coverage coverage) {
  if (coverage == Coverage::full) return enumerate(n_modules);
  if (n_modules < 4 || n_modules > 9) {
    throw std::invalid_argument("common coverage needs 4..9 modules, got " +
                                std::to_string(n_modules));
  }
  return oasis::common_coverage(n_modules);
}

bool RevisionVerdicts::all_true(std::size_t revision) const {
  const auto& row = tags.at(revision);
  return std::all_of(row.begin(), row.end(), is_true);
}

bool RevisionVerdicts::has_unverified_prediction(std::size_t revision) const {
  const auto& row = tags.at(revision);
  return std::any_of(row.begin(), row.end(), is_predicted);
}

RevisionVerdicts run_exhaustive(const Mlts& base, const std::vector<Requirement>& reqs,
                                const OccupancyAutomaton& occupancy, const PipelineConfig& cfg) {
  RevisionVerdicts v = empty_table(base, reqs, cfg);
  v.training_size = v.size();
  auto checkers = make_checkers(cfg.jobs, reqs, occupancy, cfg.check);
  auto start = Clock::now();
  parallel_for(cfg.jobs, v.size(), [&](std::size_t i, std::size_t w) {
    auto result = checkers[w]->check_each(apply(base, v.revisions[i]));
    for (std::size_t r = 0; r < reqs.size(); ++r) v.tags[i][r] = checked(result[r]);
  });
  v.t_mc_ms = ms_since(start);
  v.checks = v.size() * reqs.size();
  return v;
}

RevisionVerdicts run_pipeline(const Mlts& base, const std::vector<Requirement>& reqs,
                              const OccupancyAutomaton& occupancy, const PipelineConfig& cfg) {
  RevisionVerdicts v = empty_table(base, reqs, cfg);
  seeded_shuffle(v.shuffle, cfg.seed);
  v.training_size = slice_size(cfg.tau, v.size());
  const std::size_t n_reqs = reqs.size();
  auto checkers = make_checkers(cfg.jobs, reqs, occupancy, cfg.check);
  std::atomic<std::size_t> checks{0};

  // Step 2: label the slice.
  auto start = Clock::now();
  parallel_for(cfg.jobs, v.training_size, [&](std::size_t k, std::size_t w) {
    std::size_t i = v.shuffle[k];
    auto result = checkers[w]->check_each(apply(base, v.revisions[i]));
    for (std::size_t r = 0; r < n_reqs; ++r) v.tags[i][r] = checked(result[r]);
  });
  checks += v.training_size * n_reqs;
  v.t_mc_ms += ms_since(start);

  const std::size_t remaining = v.size() - v.training_size;
  if (remaining == 0) {
    v.checks = checks;
    return v;
  }

  // Steps 3-4: one classifier per requirement.
  std::vector<std::size_t> fallback;
  start = Clock::now();
  std::vector<std::optional<ml::GbtModel>> models(n_reqs);
  parallel_for(cfg.jobs, n_reqs, [&](std::size_t r, std::size_t) {
    std::vector<ml::FeatureRow> rows;
    rows.reserve(v.training_size);
    std::size_t positives = 0;
    for (std::size_t k = 0; k < v.training_size; ++k) {
      std::size_t i = v.shuffle[k];
      bool label = v.tags[i][r] == Tag::checked_true;
      positives += label;
      rows.push_back(ml::FeatureRow::from(v.revisions[i], label));
    }
    v.requirements[r].training_positives = positives;
    if (positives == 0 || positives == rows.size()) return;
    models[r] = ml::train_gbt(std::move(rows), cfg.gbt);
  });
  for (std::size_t r = 0; r < n_reqs; ++r) {
    if (models[r]) continue;
    fallback.push_back(r);
    v.requirements[r].fallback = true;
    v.warnings.push_back("requirement " + reqs[r].id +
                         ": single-class training slice, checking the remainder instead");
  }
  parallel_for(cfg.jobs, remaining, [&](std::size_t k, std::size_t) {
    std::size_t i = v.shuffle[v.training_size + k];
    auto x = ml::FeatureRow::from(v.revisions[i], false).x;
    for (std::size_t r = 0; r < n_reqs; ++r) {
      if (!models[r]) continue;
      double p = ml::predict(*models[r], x);
      v.scores[i][r] = p;
      v.tags[i][r] = p >= ml::kDecisionThreshold ? Tag::predicted_true : Tag::predicted_false;
    }
  });
  v.t_ml_ms += ms_since(start);

  start = Clock::now();
  if (!fallback.empty()) {
    parallel_for(cfg.jobs, remaining, [&](std::size_t k, std::size_t w) {
      std::size_t i = v.shuffle[v.training_size + k];
      Mlts rev = apply(base, v.revisions[i]);
      for (std::size_t r : fallback) v.tags[i][r] = checked(checkers[w]->check(rev, r).satisfied);
    });
    checks += remaining * fallback.size();
  }

  // Step 5: re-check every revision the predictions make eligible, plus
  // near misses so that a single false negative cannot drop a revision.
  if (cfg.verify) {
    std::vector<std::size_t> candidates;
    for (std::size_t k = v.training_size; k < v.size(); ++k) {
      std::size_t i = v.shuffle[k];
      if (!v.has_unverified_prediction(i)) continue;
      std::size_t predicted_false = 0;
      bool refuted = false;
      for (Tag t : v.tags[i]) {
        predicted_false += t == Tag::predicted_false;
        refuted |= t == Tag::checked_false;
      }
      if (!refuted && predicted_false <= cfg.verify_slack) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end());
    std::atomic<std::size_t> verify_checks{0};
    parallel_for(cfg.jobs, candidates.size(), [&](std::size_t c, std::size_t w) {
      std::size_t i = candidates[c];
      Mlts rev = apply(base, v.revisions[i]);
      for (std::size_t r = 0; r < n_reqs; ++r) {
        if (!is_predicted(v.tags[i][r])) continue;
        v.tags[i][r] = verified(checkers[w]->check(rev, r).satisfied);
        ++verify_checks;
      }
    });
    checks += verify_checks;
  }
  v.t_mc_ms += ms_since(start);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t r = 0; r < n_reqs; ++r) {
      if (v.tags[i][r] == Tag::predicted_true) ++v.requirements[r].predicted_positives;
    }
  }
  v.checks = checks;
  return v;
}

std::size_t verify_revision(RevisionVerdicts& verdicts, std::size_t revision, const Mlts& base,
                            const std::vector<Requirement>& reqs,
                            const OccupancyAutomaton& occupancy,
                            const RequirementCheckOptions& options) {
  if (reqs.size() != verdicts.requirement_ids.size()) {
    throw std::invalid_argument("requirement set does not match the verdict table");
  }
  auto& row = verdicts.tags.at(revision);
  std::size_t done = 0;
  std::optional<Mlts> rev;
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    if (!is_predicted(row[r])) continue;
    if (!rev) rev = apply(base, verdicts.revisions[revision]);
    row[r] = verified(check_requirement(*rev, reqs[r], occupancy, options).satisfied);
    ++done;
  }
  verdicts.checks += done;
  return done;
}

std::string_view to_string(Phase p) { return p == Phase::checking ? "checking" : "ml"; }

EarlyExitResult early_exit_search(const Mlts& base, const std::vector<Requirement>& reqs,
                                  const OccupancyAutomaton& occupancy, const PipelineConfig& cfg) {
  return early_exit_search(base, reqs, occupancy, cfg,
                           coverage_revisions(base.modules().size(), cfg.coverage));
}

EarlyExitResult early_exit_search(const Mlts& base, const std::vector<Requirement>& reqs,
                                  const OccupancyAutomaton& occupancy, const PipelineConfig& cfg,
                                  std::vector<Permutation> revisions) {
  validate(cfg);
  auto start = Clock::now();
  EarlyExitResult result;
  seeded_shuffle(revisions, cfg.seed);
  const std::size_t slice = slice_size(cfg.tau, revisions.size());
  RequirementChecker checker(reqs, occupancy, cfg.check);

  std::vector<std::vector<bool>> labels;
  labels.reserve(slice);
  for (std::size_t k = 0; k < slice; ++k) {
    auto verdicts = checker.check_each(apply(base, revisions[k]));
    ++result.checks;
    if (std::all_of(verdicts.begin(), verdicts.end(), [](bool b) { return b; })) {
      result.found = revisions[k];
      result.position = k + 1;
      result.elapsed_ms = ms_since(start);
      return result;
    }
    labels.push_back(std::move(verdicts));
  }

  result.phase = Phase::ml;
  std::vector<double> log_joint(revisions.size() - slice, 0.0);
  for (std::size_t r = 0; r < reqs.size(); ++r) {
    std::vector<ml::FeatureRow> rows;
    rows.reserve(slice);
    for (std::size_t k = 0; k < slice; ++k) {
      rows.push_back(ml::FeatureRow::from(revisions[k], labels[k][r]));
    }
    auto model = ml::train_gbt(std::move(rows), cfg.gbt);
    for (std::size_t k = slice; k < revisions.size(); ++k) {
      auto x = ml::FeatureRow::from(revisions[k], false).x;
      log_joint[k - slice] += std::log(ml::predict(model, x));
    }
  }
  std::vector<std::size_t> rank(log_joint.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return log_joint[a] > log_joint[b]; });
  for (std::size_t j = 0; j < rank.size(); ++j) {
    const auto& p = revisions[slice + rank[j]];
    ++result.checks;
    if (checker.satisfies_all(apply(base, p))) {
      result.found = p;
      result.position = slice + j + 1;
      break;
    }
  }
  result.elapsed_ms = ms_since(start);
  return result;
}

std::string verdicts_to_csv(const RevisionVerdicts& v) {
  std::ostringstream os;
  os << "permutation";
  for (const auto& id : v.requirement_ids) os << ',' << id;
  os << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << '"' << v.revisions[i].to_string() << '"';
    for (Tag t : v.tags[i]) os << ',' << to_string(t);
    os << '\n';
  }
  return os.str();
}

RevisionVerdicts verdicts_from_csv(std::string_view text) {
  RevisionVerdicts v;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      std::size_t start = 0;
      std::vector<std::string> cols;
      while (true) {
        auto comma = line.find(',', start);
        cols.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      if (cols.front() != "permutation") {
        throw ParseError("expected header starting with 'permutation'", line_no, 1);
      }
      v.requirement_ids.assign(cols.begin() + 1, cols.end());
      width = v.requirement_ids.size();
      continue;
    }
    if (line.front() != '"') throw ParseError("expected quoted permutation", line_no, 1);
    auto close = line.find('"', 1);
    if (close == std::string_view::npos) throw ParseError("unterminated quote", line_no, 1);
    Permutation p;
    try {
      p = Permutation::parse(line.substr(1, close - 1));
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no, 2);
    }
    std::vector<Tag> row;
    std::size_t start = close + 1;
    while (start < line.size()) {
      if (line[start] != ',') throw ParseError("expected ','", line_no, start + 1);
      auto comma = line.find(',', start + 1);
      auto field = line.substr(start + 1, comma == std::string_view::npos ? comma
                                                                          : comma - start - 1);
      try {
        row.push_back(parse_tag(field));
      } catch (const std::exception& e) {
        throw ParseError(e.what(), line_no, start + 2);
      }
      if (comma == std::string_view::npos) break;
      start = comma;
    }
    if (row.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " verdicts", line_no, 1);
    }
    v.revisions.push_back(std::move(p));
    v.tags.push_back(std::move(row));
  }
  if (line_no == 0) throw ParseError("empty verdict file", 1, 1);
  v.scores.assign(v.size(), std::vector<double>(width, kNoScore));
  v.shuffle.resize(v.size());
  std::iota(v.shuffle.begin(), v.shuffle.end(), std::size_t{0});
  for (const auto& id : v.requirement_ids) v.requirements.push_back({id, false, 0, 0});
  v.verify = std::none_of(v.tags.begin(), v.tags.end(), [](const auto& row) {
    return std::any_of(row.begin(), row.end(), [](Tag t) { return t == Tag::predicted_true; });
  });
  return v;
}

std::vector<std::optional<ml::Metrics>> prediction_metrics(const RevisionVerdicts& run,
                                                           const RevisionVerdicts& oracle) {
  if (run.revisions != oracle.revisions || run.requirement_ids != oracle.requirement_ids) {
    throw std::invalid_argument("verdict tables cover different revisions or requirements");
  }
  std::vector<std::optional<ml::Metrics>> out;
  for (std::size_t r = 0; r < run.requirement_ids.size(); ++r) {
    std::vector<std::pair<double, bool>> scores;
    for (std::size_t i = 0; i < run.size(); ++i) {
      if (std::isnan(run.scores[i][r])) continue;
      scores.emplace_back(run.scores[i][r], is_true(oracle.tags[i][r]));
    }
    if (scores.empty()) {
      out.emplace_back();
    } else {
      out.emplace_back(ml::evaluate(scores));
    }
  }
  return out;
}

nlohmann::json summary_json(const RevisionVerdicts& v, bool timing) {
  nlohmann::json doc;
  doc["revisions"] = v.size();
  doc["training_size"] = v.training_size;
  doc["verify"] = v.verify;
  doc["checks"] = v.checks;
  std::size_t eligible = 0;
  for (std::size_t i = 0; i < v.size(); ++i) eligible += v.all_true(i);
  doc["all_true"] = eligible;
  auto& reqs = doc["requirements"] = nlohmann::json::array();
  for (std::size_t r = 0; r < v.requirement_ids.size(); ++r) {
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto key = std::string(to_string(v.tags[i][r]));
      counts[key] = counts.value(key, 0) + 1;
    }
    nlohmann::json entry{{"id", v.requirement_ids[r]}, {"tags", counts}};
    if (r < v.requirements.size()) {
      entry["fallback"] = v.requirements[r].fallback;
      entry["training_positives"] = v.requirements[r].training_positives;
    }
    reqs.push_back(std::move(entry));
  }
  doc["warnings"] = v.warnings;
  if (timing) doc["timing_ms"] = {{"model_checking", v.t_mc_ms}, {"machine_learning", v.t_ml_ms}};
  return doc;
}

}  // namespace modrev
