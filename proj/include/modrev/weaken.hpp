#pragma once

#include <optional>
#include <string>
#include <vector>

#include "modrev/lts.hpp"
#include "modrev/mlts.hpp"

namespace modrev {

/// Attack-scenario automaton over enter/exit events. Each state is tagged with
/// the agent whose machine actions are enabled there (or none).
class OccupancyAutomaton {
 public:
  OccupancyAutomaton(Lts lts, std::vector<std::optional<std::string>> enabled);

  /// UserPresent(0) / Empty(1) / MaliciousPresent(2), starting with the user present.
  static OccupancyAutomaton standard(const Agents& agents = {});

  const Lts& lts() const noexcept { return lts_; }
  const std::optional<std::string>& enabled(StateId s) const { return enabled_.at(s); }

 private:
  Lts lts_;
  std::vector<std::optional<std::string>> enabled_;
};

/// Product of an unprefixed machine with the occupancy automaton: machine
/// moves are relabelled `agent.action` in occupancy states that enable an
/// agent, occupancy moves leave the machine state unchanged. Restricted to
/// reachable states.
Lts weaken(const Lts& machine, const OccupancyAutomaton& occupancy);

}  // namespace modrev
