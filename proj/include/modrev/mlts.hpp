#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "modrev/lts.hpp"

namespace modrev {

enum class Direction {
  forward,          // s_i -> s_{i+1}
  backward,         // s_i -> s_{i-1}, self-loop at s_0
  state_targeted,   // s_i -> s_k, k positional
  module_targeted,  // s_i -> state of the module whose forward action is named
};

std::string_view to_string(Direction d);

struct DirectedAction {
  std::string name;
  Direction direction = Direction::forward;
  std::size_t target_state = 0;  // state_targeted only
  std::string target_action;     // module_targeted only

  friend auto operator<=>(const DirectedAction&, const DirectedAction&) = default;
};

struct Module {
  std::string id;
  std::vector<DirectedAction> actions;

  /// The unique forward action. Throws ModelError if there is not exactly one.
  const DirectedAction& forward() const;

  /// Actions sorted; two modules are interchangeable iff their keys match.
  std::vector<DirectedAction> content_key() const;

  friend bool operator==(const Module&, const Module&) = default;
};

struct Agents {
  std::string user = "u";
  std::string attacker = "mu";

  friend bool operator==(const Agents&, const Agents&) = default;
};

/// Chain-structured modular LTS: the module at index i is attached to s_i.
class Mlts {
 public:
  Mlts() = default;

  /// Validates all invariants; throws ModelError.
  Mlts(std::string name, std::vector<Module> modules, Agents agents = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<Module>& modules() const noexcept { return modules_; }
  std::size_t size() const noexcept { return modules_.size(); }
  const Agents& agents() const noexcept { return agents_; }

  /// Index of the module whose forward action is `action`, or size().
  std::size_t module_of_forward(std::string_view action) const;

  /// True when the module at position 0 carries a backward action.
  bool has_backward_self_loop() const;

  friend bool operator==(const Mlts&, const Mlts&) = default;

 private:
  std::string name_;
  std::vector<Module> modules_;
  Agents agents_;
};

Mlts parse_mlts(std::string_view source);

/// Canonical serializer; parse_mlts(render_mlts(m)) == m.
std::string render_mlts(const Mlts& m);

/// Chain expansion over states s_0..s_N. The terminal state s_N has no
/// outgoing transitions.
Lts to_lts(const Mlts& m);

/// Equal module multisets, ignoring order and module ids.
bool module_consistent(const Mlts& a, const Mlts& b);

}  // namespace modrev
