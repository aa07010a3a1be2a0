#include <doctest.h>

#include <set>

#include "modrev/pipeline.hpp"
#include "modrev/selection.hpp"
#include "support.hpp"

using namespace modrev;

namespace {

struct Gifting {
  Mlts base;
  std::vector<Requirement> reqs;
  RevisionVerdicts oracle;
};

const Gifting& gifting() {
  static const Gifting g = [] {
    auto base = support::fixture("gifting.mlts");
    auto reqs = support::requirements("gifting.req");
    auto oracle = run_exhaustive(base, reqs, OccupancyAutomaton::standard(base.agents()), {});
    return Gifting{base, reqs, oracle};
  }();
  return g;
}

std::vector<bool> truth(const RevisionVerdicts& v, std::size_t i) {
  std::vector<bool> t;
  for (auto tag : v.tags[i]) t.push_back(is_true(tag));
  return t;
}

std::set<std::size_t> indices(const std::vector<Selected>& s) {
  std::set<std::size_t> out;
  for (const auto& x : s) out.insert(x.revision);
  return out;
}

DegradationQuery threshold(int t) {
  DegradationQuery q;
  q.payoff_threshold = t;
  return q;
}

RevisionVerdicts tiny(std::vector<std::vector<Tag>> tags) {
  RevisionVerdicts v;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    v.revisions.push_back(i == 0 ? Permutation::parse("1,2") : Permutation::parse("2,1"));
  }
  v.requirement_ids = {"A", "B"};
  v.tags = std::move(tags);
  return v;
}

const char* kTinyReqs =
    "req A kind=security weight=3: G(!x)\n"
    "req B kind=functional weight=1: G(!y)\n";

}  // namespace

TEST_SUITE("selection") {
  TEST_CASE("gifting has 46 eligible revisions") {
    const auto& g = gifting();
    auto e = eligible(g.oracle, g.reqs);
    CHECK(e.size() == 46);
    CHECK(std::is_sorted(e.begin(), e.end()));
    for (auto i : e) CHECK(g.oracle.all_true(i));
  }

  TEST_CASE("full threshold equals eligible") {
    const auto& g = gifting();
    auto sel = degrade(g.oracle, g.reqs, threshold(total_weight(g.reqs)));
    auto e = eligible(g.oracle, g.reqs);
    CHECK(indices(sel) == std::set<std::size_t>(e.begin(), e.end()));
  }

  TEST_CASE("threshold 16 adds only revisions that fail FR3 alone") {
    const auto& g = gifting();
    auto all = indices(degrade(g.oracle, g.reqs, threshold(17)));
    auto sel = degrade(g.oracle, g.reqs, threshold(16));
    CHECK(indices(sel).size() > all.size());
    for (const auto& s : sel) {
      if (all.count(s.revision)) continue;
      CHECK(s.waived == std::vector<std::string>{"FR3"});
      CHECK(s.payoff == 16);
    }
  }

  TEST_CASE("lower thresholds never shrink the selection") {
    const auto& g = gifting();
    std::set<std::size_t> prev;
    for (int t = total_weight(g.reqs); t >= 0; --t) {
      auto cur = indices(degrade(g.oracle, g.reqs, threshold(t)));
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
    CHECK(prev.size() == g.oracle.size());
  }

  TEST_CASE("payoffs match a brute-force weight sum") {
    const auto& g = gifting();
    auto sel = degrade(g.oracle, g.reqs, threshold(0));
    REQUIRE(sel.size() == g.oracle.size());
    for (const auto& s : sel) {
      CHECK(s.payoff == support::brute_payoff(truth(g.oracle, s.revision), g.reqs));
      CHECK(s.satisfied.size() + s.waived.size() == g.reqs.size());
    }
  }

  TEST_CASE("ordering is payoff, then fewer waived, then index") {
    const auto& g = gifting();
    auto sel = degrade(g.oracle, g.reqs, threshold(10));
    for (std::size_t i = 1; i < sel.size(); ++i) {
      const auto& a = sel[i - 1];
      const auto& b = sel[i];
      bool ordered = a.payoff > b.payoff ||
                     (a.payoff == b.payoff && (a.waived.size() < b.waived.size() ||
                                               (a.waived.size() == b.waived.size() &&
                                                a.revision < b.revision)));
      CHECK(ordered);
    }
    CHECK(degrade(g.oracle, g.reqs, threshold(10)).size() == sel.size());
  }

  TEST_CASE("waivable and max_waived restrict the selection") {
    const auto& g = gifting();
    DegradationQuery q = threshold(0);
    q.waivable = std::vector<std::string>{"FR3"};
    auto sel = degrade(g.oracle, g.reqs, q);
    CHECK(indices(sel) == indices(degrade(g.oracle, g.reqs, threshold(16))));
    q = threshold(0);
    q.max_waived = 0;
    CHECK(indices(degrade(g.oracle, g.reqs, q)) == indices(degrade(g.oracle, g.reqs, threshold(17))));
    q = threshold(0);
    q.waivable = std::vector<std::string>{"NOPE"};
    CHECK_THROWS_AS(degrade(g.oracle, g.reqs, q), std::invalid_argument);
    CHECK_THROWS_AS(degrade(g.oracle, g.reqs, threshold(18)), std::invalid_argument);
    CHECK_THROWS_AS(degrade(g.oracle, g.reqs, threshold(-1)), std::invalid_argument);
  }

  TEST_CASE("predictions are refused unless allowed") {
    auto reqs = parse_requirements(kTinyReqs);
    auto v = tiny({{Tag::predicted_true, Tag::checked_true}, {Tag::checked_true, Tag::checked_false}});
    CHECK_THROWS_AS(eligible(v, reqs), UnverifiedPrediction);
    CHECK(eligible(v, reqs, true) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(degrade(v, reqs, threshold(4)), UnverifiedPrediction);
    CHECK(relied_upon_predictions(v, reqs, threshold(4)) == std::vector<std::size_t>{0});
    // A row excluded anyway does not count as relied upon.
    auto w = tiny({{Tag::predicted_true, Tag::checked_false}, {Tag::checked_true, Tag::checked_true}});
    CHECK(relied_upon_predictions(w, reqs, threshold(4)).empty());
    CHECK(eligible(w, reqs) == std::vector<std::size_t>{1});
  }

  TEST_CASE("empty and unsatisfiable requirement sets") {
    const auto& g = gifting();
    RevisionVerdicts none;
    none.revisions = g.oracle.revisions;
    none.tags.assign(g.oracle.size(), {});
    CHECK(eligible(none, {}).size() == g.oracle.size());

    auto unsat = support::requirements("gifting_sr2_printed.req");
    auto v = run_exhaustive(g.base, unsat, OccupancyAutomaton::standard(), {});
    CHECK(eligible(v, unsat).empty());
  }

  TEST_CASE("lints") {
    const auto& g = gifting();
    auto lints = parse_lints(support::slurp(support::data_path("gifting.lint")));
    REQUIRE(lints.size() == 2);
    CHECK(lints[0].name == "pay-after-logout");
    CHECK(lints[0].after);
    CHECK_FALSE(lints[1].after);
    CHECK(lint_revision(g.base, lints).empty());
    auto fig = apply(g.base, Permutation::parse("2,1,4,6,3,7,5"));
    auto fired = lint_revision(fig, lints);
    CHECK(std::find(fired.begin(), fired.end(), "pay-after-logout") != fired.end());
    // Eligible revisions ending in logout place confirm before select.
    std::size_t ending = 0;
    for (auto i : eligible(g.oracle, g.reqs)) {
      auto rev = apply(g.base, g.oracle.revisions[i]);
      if (rev.modules().back().forward().name != "logout") continue;
      ++ending;
      auto l = lint_revision(rev, lints);
      CHECK(std::find(l.begin(), l.end(), "confirm-before-select") != l.end());
    }
    CHECK(ending == 2);
    CHECK_THROWS_AS(parse_lints("lint x: pay beside logout\n"), ParseError);
  }

  TEST_CASE("backward self-loop lint") {
    auto base = support::fixture("gifting.mlts");
    auto rev = apply(base, Permutation::parse("3,1,2,4,5,6,7"));
    auto fired = lint_revision(rev, {});
    CHECK(fired == std::vector<std::string>{"backward-self-loop"});
  }

  TEST_CASE("report carries payoff semantics and chains") {
    const auto& g = gifting();
    auto lints = parse_lints(support::slurp(support::data_path("gifting.lint")));
    auto q = threshold(17);
    auto sel = degrade(g.oracle, g.reqs, q);
    auto doc = report_json(sel, g.base, lints, q);
    CHECK(doc["payoff_semantics"].get<std::string>().find("sum of weights") != std::string::npos);
    CHECK(doc["revisions"].size() == 46);
    auto text = report_text(sel, g.base, lints, q);
    CHECK(text.find("system Gifting") != std::string::npos);
    CHECK(text.find("lts Gifting") != std::string::npos);
  }
}
