#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace modrev {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Reserved action used to complete deadlock states. No LTL atom matches it.
inline constexpr std::string_view kEndAction = "_end";

/// Raised by the text parsers. Carries a 1-based line and column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  /// The message without the location prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Raised when a model violates a structural invariant.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `name` or `agent.name`, each part matching [A-Za-z_][A-Za-z0-9_]*.
bool is_valid_action_name(std::string_view name);

/// Splits `agent.name`; returns an empty prefix for unprefixed actions.
std::pair<std::string_view, std::string_view> split_agent(std::string_view action);

struct Transition {
  StateId from = 0;
  std::string action;
  StateId to = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Labelled transition system over dense states 0..n-1.
///
/// Actions are interned into a sorted alphabet, so ActionId order equals
/// lexicographic name order. Edges are kept sorted by (from, action, to),
/// which fixes the exploration order of every search over the model.
class Lts {
 public:
  struct Edge {
    StateId from;
    ActionId action;
    StateId to;

    friend bool operator==(const Edge&, const Edge&) = default;
  };

  Lts() = default;

  /// Validates every invariant. `extra_actions` extends the alphabet with
  /// actions that label no transition.
  Lts(std::string name, std::size_t num_states, StateId initial,
      const std::vector<Transition>& transitions,
      const std::vector<std::string>& extra_actions = {});

  const std::string& name() const noexcept { return name_; }
  std::size_t num_states() const noexcept { return num_states_; }
  StateId initial() const noexcept { return initial_; }

  std::span<const std::string> actions() const noexcept { return actions_; }
  const std::string& action_name(ActionId a) const { return actions_.at(a); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t num_transitions() const noexcept { return edges_.size(); }

  /// Edges leaving `s`, sorted by action name then target.
  std::span<const Edge> outgoing(StateId s) const;

  std::vector<Transition> transitions() const;

  friend bool operator==(const Lts&, const Lts&) = default;

 private:
  std::string name_;
  std::size_t num_states_ = 0;
  StateId initial_ = 0;
  std::vector<std::string> actions_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
};

/// Restriction to states reachable from the initial state, renumbered in BFS
/// order (ties by action name, then original target index).
Lts reachable(const Lts& lts);

/// Adds a `_end` self-loop on every state without outgoing transitions.
Lts complete_deadlocks(const Lts& lts);

/// General LTS text format: `lts <Name>`, `states <n>`, `initial <k>`,
/// then `trans <from> <action> <to>` lines.
Lts parse_lts(std::string_view source);
std::string render_lts(const Lts& lts);

}  // namespace modrev
