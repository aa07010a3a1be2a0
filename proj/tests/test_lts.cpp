#include <doctest.h>

#include "modrev/lts.hpp"
#include "modrev/mlts.hpp"
#include "modrev/weaken.hpp"
#include "support.hpp"

using namespace modrev;

TEST_SUITE("lts") {
  TEST_CASE("action names and agent split") {
    CHECK(is_valid_action_name("login"));
    CHECK(is_valid_action_name("mu.back"));
    CHECK(is_valid_action_name("_end"));
    CHECK_FALSE(is_valid_action_name(""));
    CHECK_FALSE(is_valid_action_name("a.b.c"));
    CHECK_FALSE(is_valid_action_name("1a"));
    CHECK_FALSE(is_valid_action_name("a."));
    CHECK(split_agent("mu.back") == std::pair<std::string_view, std::string_view>{"mu", "back"});
    CHECK(split_agent("back").first.empty());
  }

  TEST_CASE("constructor rejects broken models") {
    CHECK_THROWS_AS(Lts("X", 0, 0, {}), ModelError);
    CHECK_THROWS_AS(Lts("X", 2, 2, {}), ModelError);
    CHECK_THROWS_AS(Lts("X", 2, 0, {{0, "a", 2}}), ModelError);
    CHECK_THROWS_AS(Lts("X", 2, 0, {{0, "bad name", 1}}), ModelError);
  }

  TEST_CASE("alphabet is sorted and edges ordered by action name") {
    Lts l("X", 2, 0, {{0, "zeta", 1}, {0, "alpha", 1}, {1, "beta", 0}}, {"gamma"});
    REQUIRE(l.actions().size() == 4);
    CHECK(std::is_sorted(l.actions().begin(), l.actions().end()));
    auto out = l.outgoing(0);
    REQUIRE(out.size() == 2);
    CHECK(l.action_name(out[0].action) == "alpha");
    CHECK(l.action_name(out[1].action) == "zeta");
  }

  TEST_CASE("text round trip") {
    SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
      auto l = support::random_lts(rng, 8, {"a", "b", "u.c", "mu.d"});
      CHECK(parse_lts(render_lts(l)) == l);
    }
  }

  TEST_CASE("parse errors carry positions") {
    try {
      parse_lts("lts X\nstates 2\ninitial 0\ntrans 0 a 5\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(parse_lts("lts X\ninitial 0\n"), ParseError);
    CHECK_THROWS_AS(parse_lts("lts X\nstates 2\ninitial 0\nfoo 1\n"), ParseError);
  }

  TEST_CASE("reachable agrees with depth-first search") {
    SplitMix64 rng(11);
    for (int i = 0; i < 200; ++i) {
      auto l = support::random_lts(rng, 8, {"a", "b", "c"});
      auto g = support::graph_of(l);
      auto oracle = support::dfs_reachable(g);
      auto r = reachable(l);
      CHECK(r.num_states() == oracle.size());
      std::size_t oracle_edges = 0;
      for (auto s : oracle) oracle_edges += g.out[s].size();
      CHECK(r.num_transitions() == oracle_edges);
      CHECK(support::traces(support::graph_of(r), 5) == support::traces(g, 5));
    }
  }

  TEST_CASE("deadlock completion adds only _end self-loops") {
    SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) {
      auto l = support::random_lts(rng, 6, {"a", "b"});
      auto c = complete_deadlocks(l);
      auto expected = support::completed(support::graph_of(l));
      auto got = support::graph_of(c);
      REQUIRE(got.states == expected.states);
      for (std::size_t s = 0; s < got.states; ++s) {
        auto a = got.out[s], b = expected.out[s];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK_FALSE(got.out[s].empty());
      }
    }
  }
}

TEST_SUITE("mlts") {
  TEST_CASE("fixtures parse and round trip") {
    for (auto name : {"ticket_booking.mlts", "ticket4.mlts", "ticket6.mlts", "gifting.mlts"}) {
      auto m = support::fixture(name);
      CHECK(parse_mlts(render_mlts(m)) == m);
    }
  }

  TEST_CASE("chain expansion") {
    auto m = support::fixture("ticket4.mlts");
    auto l = to_lts(m);
    CHECK(l.num_states() == m.size() + 1);
    auto g = support::graph_of(l);
    // Forward chain.
    std::vector<std::string> forward;
    for (const auto& mod : m.modules()) forward.push_back(mod.forward().name);
    std::size_t s = 0;
    for (const auto& a : forward) {
      auto it = std::find_if(g.out[s].begin(), g.out[s].end(),
                             [&](const auto& e) { return e.first == a; });
      REQUIRE(it != g.out[s].end());
      CHECK(it->second == s + 1);
      s = it->second;
    }
    CHECK(g.out[m.size()].empty());
    // back at s2 returns to s1, reset at s3 goes to s0.
    CHECK(std::count(g.out[2].begin(), g.out[2].end(), std::pair<std::string, std::size_t>{"back", 1}) == 1);
    CHECK(std::count(g.out[3].begin(), g.out[3].end(), std::pair<std::string, std::size_t>{"reset", 0}) == 1);
  }

  TEST_CASE("backward action in the first module is a self-loop") {
    Mlts m("B", {Module{"a", {{"go", Direction::forward, 0, ""}, {"back", Direction::backward, 0, ""}}},
                 Module{"b", {{"next", Direction::forward, 0, ""}}}});
    CHECK(m.has_backward_self_loop());
    auto g = support::graph_of(to_lts(m));
    CHECK(std::count(g.out[0].begin(), g.out[0].end(), std::pair<std::string, std::size_t>{"back", 0}) == 1);
  }

  TEST_CASE("module-targeted actions follow their module") {
    auto m = support::fixture("ticket6.mlts");
    auto l = to_lts(m);
    auto dest = m.module_of_forward("dest");
    REQUIRE(dest < m.size());
    auto g = support::graph_of(l);
    CHECK(std::count(g.out[5].begin(), g.out[5].end(), std::pair<std::string, std::size_t>{"reselect", dest}) == 1);
  }

  TEST_CASE("invariants") {
    CHECK_THROWS_AS(Mlts("E", {}), ModelError);
    CHECK_THROWS_AS(Mlts("X", {Module{"a", {{"go", Direction::backward, 0, ""}}}}), ModelError);
    CHECK_THROWS_AS(Mlts("X", {Module{"a", {{"go", Direction::forward, 0, ""}}},
                               Module{"b", {{"go", Direction::forward, 0, ""}}}}),
                    ModelError);
    CHECK_THROWS_AS(Mlts("X", {Module{"a", {{"go", Direction::forward, 0, ""},
                                             {"jump", Direction::state_targeted, 9, ""}}}}),
                    ModelError);
    CHECK_THROWS_AS(Mlts("X", {Module{"a", {{"go", Direction::forward, 0, ""},
                                             {"jump", Direction::module_targeted, 0, "nowhere"}}}}),
                    ModelError);
    CHECK_THROWS_AS(parse_mlts("system X\nmodule a:\n  sideways go\n"), ParseError);
  }

  TEST_CASE("module consistency ignores order and ids") {
    auto m = support::fixture("ticket_booking.mlts");
    auto mods = m.modules();
    std::reverse(mods.begin(), mods.end());
    for (auto& mod : mods) mod.id += "_x";
    CHECK(module_consistent(m, Mlts("Other", mods, m.agents())));
    CHECK_FALSE(module_consistent(m, support::fixture("ticket6.mlts")));
  }
}

TEST_SUITE("weaken") {
  // Product of machine and occupancy automaton, built pair by pair.
  support::Graph product_oracle(const Lts& machine, const OccupancyAutomaton& occ) {
    auto mg = support::graph_of(machine);
    auto og = support::graph_of(occ.lts());
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    std::vector<std::pair<std::size_t, std::size_t>> order;
    support::Graph g;
    auto id = [&](std::pair<std::size_t, std::size_t> p) {
      auto [it, fresh] = index.try_emplace(p, order.size());
      if (fresh) {
        order.push_back(p);
        g.out.emplace_back();
      }
      return it->second;
    };
    id({mg.initial, og.initial});
    for (std::size_t k = 0; k < order.size(); ++k) {
      auto [m, o] = order[k];
      std::vector<std::pair<std::string, std::size_t>> edges;
      if (const auto& agent = occ.enabled(static_cast<StateId>(o))) {
        for (const auto& [a, t] : mg.out[m]) edges.push_back({*agent + "." + a, id({t, o})});
      }
      for (const auto& [a, t] : og.out[o]) edges.push_back({a, id({m, t})});
      g.out[k] = edges;
    }
    g.states = order.size();
    g.initial = 0;
    return g;
  }

  TEST_CASE("standard automaton shape") {
    auto occ = OccupancyAutomaton::standard();
    CHECK(occ.lts().num_states() == 3);
    CHECK(occ.enabled(0) == std::optional<std::string>("u"));
    CHECK_FALSE(occ.enabled(1).has_value());
    CHECK(occ.enabled(2) == std::optional<std::string>("mu"));
  }

  TEST_CASE("weaken matches the product oracle") {
    auto occ = OccupancyAutomaton::standard();
    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
      auto machine = support::random_lts(rng, 6, {"a", "b", "c"});
      auto w = weaken(machine, occ);
      auto oracle = product_oracle(machine, occ);
      CHECK(w.num_states() == oracle.states);
      std::size_t edges = 0;
      for (const auto& e : oracle.out) edges += e.size();
      CHECK(w.num_transitions() == edges);
      CHECK(support::traces(support::graph_of(w), 6) == support::traces(oracle, 6));
    }
  }

  TEST_CASE("weaken on fixtures") {
    auto occ = OccupancyAutomaton::standard();
    for (auto name : {"ticket4.mlts", "gifting.mlts"}) {
      auto machine = to_lts(support::fixture(name));
      auto w = weaken(machine, occ);
      auto oracle = product_oracle(machine, occ);
      CHECK(w.num_states() == oracle.states);
      CHECK(support::traces(support::graph_of(w), 7) == support::traces(oracle, 7));
    }
  }

  TEST_CASE("prefixed machines are rejected") {
    Lts l("X", 2, 0, {{0, "u.a", 1}});
    CHECK_THROWS_AS(weaken(l, OccupancyAutomaton::standard()), ModelError);
  }
}
