#include "modrev/weaken.hpp"

#include <deque>
#include <map>

namespace modrev {

OccupancyAutomaton::OccupancyAutomaton(Lts lts, std::vector<std::optional<std::string>> enabled)
    : lts_(std::move(lts)), enabled_(std::move(enabled)) {
  if (enabled_.size() != lts_.num_states()) {
    throw ModelError("occupancy automaton: one enabling tag per state required");
  }
  for (const auto& tag : enabled_) {
    if (tag && (tag->empty() || tag->find('.') != std::string::npos ||
                !is_valid_action_name(*tag))) {
      throw ModelError("occupancy automaton: invalid agent tag '" + *tag + "'");
    }
  }
}

OccupancyAutomaton OccupancyAutomaton::standard(const Agents& agents) {
  const StateId user = 0, empty = 1, malicious = 2;
  std::vector<Transition> t = {
      {user, agents.user + ".exit", empty},
      {empty, agents.user + ".enter", user},
      {empty, agents.attacker + ".enter", malicious},
      {malicious, agents.attacker + ".exit", empty},
  };
  return OccupancyAutomaton(Lts("Occupancy", 3, user, t),
                            {agents.user, std::nullopt, agents.attacker});
}

Lts weaken(const Lts& machine, const OccupancyAutomaton& occupancy) {
  for (const auto& a : machine.actions()) {
    if (a.find('.') != std::string::npos) {
      throw ModelError("weaken: machine action '" + a + "' is already agent-prefixed");
    }
  }
  const Lts& occ = occupancy.lts();
  using Pair = std::pair<StateId, StateId>;
  std::map<Pair, StateId> index;
  std::deque<Pair> queue;
  std::vector<Transition> transitions;

  auto visit = [&](Pair p) {
    auto [it, inserted] = index.try_emplace(p, static_cast<StateId>(index.size()));
    if (inserted) queue.push_back(p);
    return it->second;
  };
  visit({machine.initial(), occ.initial()});
  while (!queue.empty()) {
    Pair p = queue.front();
    queue.pop_front();
    StateId from = index.at(p);
    const auto& agent = occupancy.enabled(p.second);
    if (agent) {
      for (const auto& e : machine.outgoing(p.first)) {
        StateId to = visit({e.to, p.second});
        transitions.push_back({from, *agent + "." + machine.action_name(e.action), to});
      }
    }
    for (const auto& e : occ.outgoing(p.second)) {
      StateId to = visit({p.first, e.to});
      transitions.push_back({from, occ.action_name(e.action), to});
    }
  }
  // BFS discovery already numbers states from the initial pair; reachable()
  // pins the canonical numbering.
  return reachable(Lts(machine.name() + "_weakened", index.size(), 0, transitions));
}

}  // namespace modrev
