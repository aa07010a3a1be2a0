#include "modrev/lts.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "text_util.hpp"

namespace modrev {

namespace {

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

std::string format_location(const std::string& what, std::size_t line, std::size_t column) {
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << what;
  return os.str();
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(format_location(what, line, column)),
      message_(what),
      line_(line), column_(column) {}

bool is_valid_action_name(std::string_view name) {
  auto dot = name.find('.');
  if (dot == std::string_view::npos) return is_identifier(name);
  return is_identifier(name.substr(0, dot)) && is_identifier(name.substr(dot + 1));
}

std::pair<std::string_view, std::string_view> split_agent(std::string_view action) {
  auto dot = action.find('.');
  if (dot == std::string_view::npos) return {{}, action};
  return {action.substr(0, dot), action.substr(dot + 1)};
}

Lts::Lts(std::string name, std::size_t num_states, StateId initial,
         const std::vector<Transition>& transitions,
         const std::vector<std::string>& extra_actions)
    : name_(std::move(name)), num_states_(num_states), initial_(initial) {
  if (num_states_ == 0) throw ModelError("LTS '" + name_ + "' has no states");
  if (initial_ >= num_states_) {
    throw ModelError("LTS '" + name_ + "': initial state " + std::to_string(initial_) +
                     " out of range");
  }
  for (const auto& t : transitions) actions_.push_back(t.action);
  actions_.insert(actions_.end(), extra_actions.begin(), extra_actions.end());
  std::sort(actions_.begin(), actions_.end());
  actions_.erase(std::unique(actions_.begin(), actions_.end()), actions_.end());
  for (const auto& a : actions_) {
    if (a != kEndAction && !is_valid_action_name(a)) {
      throw ModelError("LTS '" + name_ + "': invalid action name '" + a + "'");
    }
  }

  edges_.reserve(transitions.size());
  for (const auto& t : transitions) {
    if (t.from >= num_states_ || t.to >= num_states_) {
      throw ModelError("LTS '" + name_ + "': transition endpoint out of range on '" +
                       t.action + "'");
    }
    auto it = std::lower_bound(actions_.begin(), actions_.end(), t.action);
    edges_.push_back({t.from, static_cast<ActionId>(it - actions_.begin()), t.to});
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.action, a.to) < std::tie(b.from, b.action, b.to);
  });
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  offsets_.assign(num_states_ + 1, 0);
  for (const auto& e : edges_) ++offsets_[e.from + 1];
  for (std::size_t s = 0; s < num_states_; ++s) offsets_[s + 1] += offsets_[s];
}

std::span<const Lts::Edge> Lts::outgoing(StateId s) const {
  if (s >= num_states_) throw ModelError("state out of range");
  return std::span<const Edge>(edges_).subspan(offsets_[s], offsets_[s + 1] - offsets_[s]);
}

std::vector<Transition> Lts::transitions() const {
  std::vector<Transition> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({e.from, actions_[e.action], e.to});
  return out;
}

Lts reachable(const Lts& lts) {
  constexpr StateId kUnseen = ~StateId{0};
  std::vector<StateId> renumber(lts.num_states(), kUnseen);
  std::vector<StateId> order;
  std::deque<StateId> queue;
  renumber[lts.initial()] = 0;
  order.push_back(lts.initial());
  queue.push_back(lts.initial());
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (const auto& e : lts.outgoing(s)) {
      if (renumber[e.to] == kUnseen) {
        renumber[e.to] = static_cast<StateId>(order.size());
        order.push_back(e.to);
        queue.push_back(e.to);
      }
    }
  }
  std::vector<Transition> kept;
  for (const auto& e : lts.edges()) {
    if (renumber[e.from] != kUnseen) {
      kept.push_back({renumber[e.from], lts.action_name(e.action), renumber[e.to]});
    }
  }
  std::vector<std::string> alphabet(lts.actions().begin(), lts.actions().end());
  return Lts(lts.name(), order.size(), 0, kept, alphabet);
}

Lts complete_deadlocks(const Lts& lts) {
  std::vector<Transition> all = lts.transitions();
  for (StateId s = 0; s < lts.num_states(); ++s) {
    if (lts.outgoing(s).empty()) all.push_back({s, std::string(kEndAction), s});
  }
  std::vector<std::string> alphabet(lts.actions().begin(), lts.actions().end());
  return Lts(lts.name(), lts.num_states(), lts.initial(), all, alphabet);
}

Lts parse_lts(std::string_view source) {
  auto lines = detail::split_lines(source);
  std::string name;
  std::size_t num_states = 0;
  std::size_t initial = 0;
  bool have_name = false, have_states = false, have_initial = false;
  std::vector<Transition> transitions;

  auto expect_count = [](const detail::Line& line, std::size_t n) {
    if (line.tokens.size() != n) {
      const auto& last = line.tokens.back();
      throw ParseError("expected " + std::to_string(n - 1) + " argument(s) after '" +
                           std::string(line.tokens.front().text) + "'",
                       line.number, last.column);
    }
  };
  auto number = [](const detail::Line& line, const detail::Token& tok) {
    std::size_t v = 0;
    if (!detail::parse_size(tok.text, v)) {
      throw ParseError("expected a non-negative integer, got '" + std::string(tok.text) + "'",
                       line.number, tok.column);
    }
    return v;
  };

  for (const auto& line : lines) {
    const auto& head = line.tokens.front();
    if (head.text == "lts") {
      expect_count(line, 2);
      if (have_name) throw ParseError("duplicate 'lts' header", line.number, head.column);
      name = std::string(line.tokens[1].text);
      have_name = true;
    } else if (head.text == "states") {
      expect_count(line, 2);
      num_states = number(line, line.tokens[1]);
      have_states = true;
    } else if (head.text == "initial") {
      expect_count(line, 2);
      initial = number(line, line.tokens[1]);
      have_initial = true;
    } else if (head.text == "trans") {
      expect_count(line, 4);
      const auto& act = line.tokens[2];
      if (act.text != kEndAction && !is_valid_action_name(act.text)) {
        throw ParseError("invalid action name '" + std::string(act.text) + "'", line.number,
                         act.column);
      }
      std::size_t from = number(line, line.tokens[1]);
      std::size_t to = number(line, line.tokens[3]);
      if (have_states && (from >= num_states || to >= num_states)) {
        throw ParseError("state index out of range", line.number, line.tokens[1].column);
      }
      transitions.push_back(
          {static_cast<StateId>(from), std::string(act.text), static_cast<StateId>(to)});
    } else {
      throw ParseError("unknown keyword '" + std::string(head.text) + "'", line.number,
                       head.column);
    }
  }
  if (!have_name) throw ParseError("missing 'lts <Name>' header", 1, 1);
  if (!have_states) throw ParseError("missing 'states <n>' line", 1, 1);
  if (!have_initial) throw ParseError("missing 'initial <k>' line", 1, 1);
  try {
    return Lts(name, num_states, static_cast<StateId>(initial), transitions);
  } catch (const ModelError& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

std::string render_lts(const Lts& lts) {
  std::ostringstream os;
  os << "lts " << lts.name() << "\n";
  os << "states " << lts.num_states() << "\n";
  os << "initial " << lts.initial() << "\n";
  for (const auto& e : lts.edges()) {
    os << "trans " << e.from << " " << lts.action_name(e.action) << " " << e.to << "\n";
  }
  return os.str();
}

}  // namespace modrev
