#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "modrev/bench.hpp"
#include "modrev/oasis.hpp"
#include "support.hpp"

using namespace modrev;

TEST_SUITE("bench") {
  TEST_CASE("templates") {
    CHECK(bench::instantiate(bench::Template::t1, "u.a", "mu.b", "u.c") == "G(u.a -> G !mu.b)");
    CHECK(bench::instantiate(bench::Template::t2, "u.a", "mu.b", "u.c") ==
          "G(u.a -> (!mu.b W u.c))");
    CHECK(bench::instantiate(bench::Template::t3, "u.a", "mu.b", "u.c") == "G(u.a -> X !mu.b)");
    CHECK(bench::to_string(bench::Template::t2) == "T2");
  }

  TEST_CASE("generated requirements are satisfiable in the common coverage") {
    auto base = support::fixture("ticket4.mlts");
    auto occ = OccupancyAutomaton::standard(base.agents());
    bench::GeneratorConfig gen;
    gen.seed = 3;
    gen.target_count = 15;
    auto reqs = bench::generate_requirements(base, gen, occ);
    REQUIRE(reqs.size() == 15);
    std::set<std::string> texts;
    auto cover = oasis::common_coverage(base.size());
    for (const auto& g : reqs) {
      CHECK(texts.insert(g.requirement.source).second);
      CHECK(ltl::is_safety(g.requirement.formula));
      REQUIRE(g.witness.has_value());
      CHECK(check_requirement(apply(base, *g.witness), g.requirement, occ).satisfied);
      // The witness is the first satisfier in coverage order.
      for (const auto& p : cover) {
        if (p == *g.witness) break;
        CHECK_FALSE(check_requirement(apply(base, p), g.requirement, occ).satisfied);
      }
    }
    CHECK(bench::generate_requirements(base, gen, occ).front().requirement.source ==
          reqs.front().requirement.source);
    gen.target_count = 100000;
    gen.retry_budget = 50;
    CHECK_THROWS_AS(bench::generate_requirements(base, gen, occ), bench::BudgetExceeded);
  }

  TEST_CASE("both searches agree with the oracle") {
    auto base = support::fixture("ticket6.mlts");
    auto occ = OccupancyAutomaton::standard(base.agents());
    bench::GeneratorConfig gen;
    gen.target_count = 10;
    auto reqs = bench::generate_requirements(base, gen, occ);
    auto trials = bench::run_benchmark(base, reqs, occ, {});
    REQUIRE(trials.size() == 10);
    for (const auto& t : trials) {
      CHECK(t.oracle_satisfiable);
      CHECK(t.oasis_found);
      CHECK(t.oacal_found);
    }
    auto s = bench::summarize(trials);
    CHECK(s.disagreements == 0);
    CHECK(s.trials == 10);
    auto csv = bench::trials_to_csv(trials, false);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    std::istringstream rows(csv);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line.substr(0, line.find('"')));
      for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
      REQUIRE(cells.size() == 13);
      CHECK(cells[7] == "-");
      CHECK(cells[12] == "-");
    }
  }

  TEST_CASE("cost model with the published inputs") {
    // Seven modules: 429 non-redundant revisions, first appearances at 471
    // (median) and 1693 (last), tau 0.3, 100 trees of depth 6.
    bench::CostModelParams p;
    p.pos_avg = 471;
    p.pos_max = 1693;
    p.cov_r = 1715;
    p.cov_nr = 429;
    auto m = bench::cost_model(p);
    const double c = 1.12e-2, k = 100, d = 6, n = 7, tau = 0.3, t = 50;
    const double ml = c * k * d * n * std::log2(tau * 429);
    CHECK(m.ml_max == doctest::Approx(ml));
    CHECK(m.ml_avg == doctest::Approx((1 - tau) * ml));
    CHECK(m.checked_avg == doctest::Approx((tau - tau * tau / 2) * 429));
    CHECK(m.checked_max == doctest::Approx(tau * 429));
    CHECK(std::abs(m.ml_avg / 230.76 - 1) < 0.005);
    CHECK(std::abs(m.ml_max / 329.65 - 1) < 0.005);
    CHECK(std::abs(m.ratio_avg - 4.13) < 0.05);
    CHECK(std::abs(m.ratio_max - 12.51) < 0.05);
    CHECK(m.ratio_avg == doctest::Approx(471 * t / (m.checked_avg * t + m.ml_avg)));
    // Inputs derived from the coverage replay give the same numbers.
    auto q = bench::params_from_coverage(7);
    CHECK(q.pos_avg == 471);
    CHECK(q.pos_max == 1693);
    CHECK(q.cov_nr == 429);
    CHECK(bench::cost_model(q).ratio_avg == doctest::Approx(m.ratio_avg));
  }

  TEST_CASE("cost model guards") {
    bench::CostModelParams p;
    p.cov_nr = 3;
    CHECK_THROWS_AS(bench::cost_model(p), std::invalid_argument);
    p.cov_nr = 429;
    p.tau = 0;
    CHECK_THROWS_AS(bench::cost_model(p), std::invalid_argument);
  }

  TEST_CASE("oacal time is piecewise in the satisfier position") {
    auto p = bench::params_from_coverage(7);
    CHECK(bench::oacal_time(p, 0.1) == doctest::Approx(0.1 * 429 * p.t_mc));
    CHECK(bench::oacal_time(p, 0.9) == doctest::Approx(bench::cost_model(p).t_oacal_max));
  }

  TEST_CASE("machine constant fit") {
    std::vector<std::pair<double, double>> samples{{10, 0.2}, {20, 0.4}, {40, 0.8}};
    CHECK(bench::fit_machine_constant(samples) == doctest::Approx(0.02));
    samples.push_back({30, 0.9});
    double sxy = 10 * 0.2 + 20 * 0.4 + 40 * 0.8 + 30 * 0.9;
    double sxx = 100 + 400 + 1600 + 900;
    CHECK(bench::fit_machine_constant(samples) == doctest::Approx(sxy / sxx));
    CHECK_THROWS(bench::fit_machine_constant({{1, 1}, {2, 2}}));
    CHECK_THROWS(bench::fit_machine_constant({{0, 1}, {0, 2}, {0, 3}}));
  }

  TEST_CASE("training time grows with rows") {
    ml::GbtParams params;
    params.trees = 20;
    auto samples = bench::time_training(6, {100, 400}, params, 1);
    REQUIRE(samples.size() == 2);
    CHECK(samples[1].first > samples[0].first);
    CHECK(samples[0].first == doctest::Approx(bench::training_units(20, 6, 6, 100)));
    CHECK(samples[0].second > 0);
  }
}
