#include <doctest.h>

#include <cmath>

#include "modrev/pipeline.hpp"
#include "modrev/selection.hpp"
#include "support.hpp"

using namespace modrev;

namespace {

const char* kTicketReqs =
    "req A kind=security weight=2: G(u.password -> G !mu.confirm)\n"
    "req B kind=security weight=1: G(u.ID -> (!mu.time W u.dest))\n"
    "req C kind=functional weight=1: G(transport -> X !confirm)\n";

struct Setup {
  Mlts base;
  std::vector<Requirement> reqs;
  OccupancyAutomaton occ;
};

Setup ticket() {
  auto base = support::fixture("ticket6.mlts");
  return {base, parse_requirements(kTicketReqs), OccupancyAutomaton::standard(base.agents())};
}

std::vector<bool> truth_row(const RevisionVerdicts& v, std::size_t i) {
  std::vector<bool> t;
  for (auto tag : v.tags[i]) t.push_back(is_true(tag));
  return t;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("tags") {
    for (auto t : {Tag::checked_true, Tag::checked_false, Tag::predicted_true, Tag::predicted_false,
                   Tag::verified_true, Tag::verified_false}) {
      CHECK(parse_tag(to_string(t)) == t);
    }
    CHECK(to_string(Tag::checked_true) == "checked-true");
    CHECK(is_true(Tag::verified_true));
    CHECK_FALSE(is_true(Tag::predicted_false));
    CHECK(is_predicted(Tag::predicted_true));
    CHECK_FALSE(is_predicted(Tag::verified_true));
    CHECK_THROWS(parse_tag("maybe"));
  }

  TEST_CASE("config validation") {
    PipelineConfig cfg;
    cfg.tau = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.tau = 1.5;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.tau = 0.3;
    cfg.jobs = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    CHECK_THROWS(coverage_revisions(3, Coverage::common));
    CHECK(coverage_revisions(5, Coverage::full).size() == 120);
    CHECK(coverage_revisions(5, Coverage::common).size() == 42);
  }

  TEST_CASE("exhaustive tags agree with direct checks") {
    auto s = ticket();
    auto v = run_exhaustive(s.base, s.reqs, s.occ, {});
    REQUIRE(v.size() == 720);
    for (std::size_t i = 0; i < v.size(); i += 37) {
      auto rev = apply(s.base, v.revisions[i]);
      for (std::size_t r = 0; r < s.reqs.size(); ++r) {
        bool sat = check_requirement(rev, s.reqs[r], s.occ).satisfied;
        CHECK(v.tags[i][r] == (sat ? Tag::checked_true : Tag::checked_false));
      }
    }
  }

  TEST_CASE("tau = 1 is exhaustive checking") {
    auto s = ticket();
    PipelineConfig cfg;
    cfg.tau = 1.0;
    auto p = run_pipeline(s.base, s.reqs, s.occ, cfg);
    auto e = run_exhaustive(s.base, s.reqs, s.occ, cfg);
    CHECK(p.tags == e.tags);
    CHECK(p.revisions == e.revisions);
  }

  TEST_CASE("verified pipeline keeps the oracle eligible set") {
    auto s = ticket();
    auto oracle = run_exhaustive(s.base, s.reqs, s.occ, {});
    auto want = eligible(oracle, s.reqs);
    REQUIRE_FALSE(want.empty());
    for (std::uint64_t seed : {0, 1, 2}) {
      PipelineConfig cfg;
      cfg.seed = seed;
      auto v = run_pipeline(s.base, s.reqs, s.occ, cfg);
      CHECK(eligible(v, s.reqs) == want);
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t r = 0; r < s.reqs.size(); ++r) {
          if (!is_predicted(v.tags[i][r])) {
            CHECK(is_true(v.tags[i][r]) == is_true(oracle.tags[i][r]));
          }
        }
      }
    }
  }

  TEST_CASE("same seed, same table") {
    auto s = ticket();
    PipelineConfig cfg;
    cfg.seed = 9;
    auto a = run_pipeline(s.base, s.reqs, s.occ, cfg);
    cfg.jobs = 3;
    auto b = run_pipeline(s.base, s.reqs, s.occ, cfg);
    CHECK(a.tags == b.tags);
    CHECK(a.shuffle == b.shuffle);
    CHECK(a.checks == b.checks);
  }

  TEST_CASE("checking cost grows with tau") {
    auto s = ticket();
    std::size_t prev = 0;
    for (double tau : {0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) {
      PipelineConfig cfg;
      cfg.tau = tau;
      cfg.verify = false;
      auto v = run_pipeline(s.base, s.reqs, s.occ, cfg);
      CHECK(v.training_size == static_cast<std::size_t>(std::ceil(tau * 720 - 1e-9)));
      CHECK(v.training_size >= prev);
      CHECK(v.checks >= v.training_size * s.reqs.size());
      prev = v.training_size;
    }
  }

  TEST_CASE("single-class slices fall back to checking") {
    auto base = support::fixture("ticket6.mlts");
    auto reqs = parse_requirements("req T kind=functional weight=1: G(transport -> true)\n");
    PipelineConfig cfg;
    auto v = run_pipeline(base, reqs, OccupancyAutomaton::standard(), cfg);
    REQUIRE(v.requirements.size() == 1);
    CHECK(v.requirements[0].fallback);
    CHECK_FALSE(v.warnings.empty());
    for (const auto& row : v.tags) CHECK(row[0] == Tag::checked_true);
  }

  TEST_CASE("unverified runs expose predictions") {
    auto s = ticket();
    PipelineConfig cfg;
    cfg.verify = false;
    auto v = run_pipeline(s.base, s.reqs, s.occ, cfg);
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < v.size(); ++i) predicted += v.has_unverified_prediction(i);
    CHECK(predicted == v.size() - v.training_size);
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t r = 0; r < s.reqs.size(); ++r) {
        if (is_predicted(v.tags[i][r])) {
          CHECK(v.scores[i][r] >= 0.0);
          CHECK(v.scores[i][r] <= 1.0);
        } else {
          CHECK(std::isnan(v.scores[i][r]));
        }
      }
    }
    // Verifying a row turns every prediction into a checked fact.
    auto oracle = run_exhaustive(s.base, s.reqs, s.occ, {});
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v.has_unverified_prediction(i)) continue;
      verify_revision(v, i, s.base, s.reqs, s.occ);
      CHECK_FALSE(v.has_unverified_prediction(i));
      CHECK(truth_row(v, i) == truth_row(oracle, i));
      break;
    }
  }

  TEST_CASE("csv round trip") {
    auto s = ticket();
    PipelineConfig cfg;
    cfg.verify = false;
    auto v = run_pipeline(s.base, s.reqs, s.occ, cfg);
    auto csv = verdicts_to_csv(v);
    CHECK(csv.rfind("permutation,A,B,C\n", 0) == 0);
    auto back = verdicts_from_csv(csv);
    CHECK(back.revisions == v.revisions);
    CHECK(back.requirement_ids == v.requirement_ids);
    CHECK(back.tags == v.tags);
    CHECK(verdicts_to_csv(back) == csv);
    CHECK_THROWS_AS(verdicts_from_csv("permutation,A\n\"1,2\",sure\n"), ParseError);
    CHECK_THROWS_AS(verdicts_from_csv("revision,A\n"), ParseError);
  }

  TEST_CASE("prediction metrics against the oracle") {
    auto s = ticket();
    PipelineConfig cfg;
    cfg.verify = false;
    auto v = run_pipeline(s.base, s.reqs, s.occ, cfg);
    auto oracle = run_exhaustive(s.base, s.reqs, s.occ, {});
    auto metrics = prediction_metrics(v, oracle);
    REQUIRE(metrics.size() == s.reqs.size());
    for (std::size_t r = 0; r < s.reqs.size(); ++r) {
      if (!metrics[r]) continue;
      std::size_t total = metrics[r]->true_positives + metrics[r]->false_positives +
                          metrics[r]->true_negatives + metrics[r]->false_negatives;
      CHECK(total == v.size() - v.training_size);
    }
  }

  TEST_CASE("early exit returns a real satisfier") {
    auto s = ticket();
    auto oracle = run_exhaustive(s.base, s.reqs, s.occ, {});
    for (std::uint64_t seed : {0, 1, 2, 3}) {
      PipelineConfig cfg;
      cfg.seed = seed;
      auto r = early_exit_search(s.base, s.reqs, s.occ, cfg);
      REQUIRE(r.found.has_value());
      RequirementChecker checker(s.reqs, s.occ);
      CHECK(checker.satisfies_all(apply(s.base, *r.found)));
      CHECK(r.checks >= 1);
    }
    auto none = parse_requirements("req N kind=functional weight=1: G(!transport)\n");
    auto r = early_exit_search(s.base, none, s.occ, {});
    CHECK_FALSE(r.found.has_value());
    CHECK(r.checks == 720);
  }

  TEST_CASE("summary json") {
    auto s = ticket();
    auto v = run_pipeline(s.base, s.reqs, s.occ, {});
    auto doc = summary_json(v, false);
    CHECK(doc["revisions"] == 720);
    CHECK_FALSE(doc.contains("t_mc_ms"));
  }
}
