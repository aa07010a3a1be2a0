#include "modrev/mlts.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace modrev {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::forward: return "forward";
    case Direction::backward: return "backward";
    case Direction::state_targeted: return "state";
    case Direction::module_targeted: return "module";
  }
  return "?";
}

const DirectedAction& Module::forward() const {
  const DirectedAction* found = nullptr;
  for (const auto& a : actions) {
    if (a.direction != Direction::forward) continue;
    if (found) throw ModelError("module '" + id + "' has more than one forward action");
    found = &a;
  }
  if (!found) throw ModelError("module '" + id + "' has no forward action");
  return *found;
}

std::vector<DirectedAction> Module::content_key() const {
  auto key = actions;
  std::sort(key.begin(), key.end());
  return key;
}

Mlts::Mlts(std::string name, std::vector<Module> modules, Agents agents)
    : name_(std::move(name)), modules_(std::move(modules)), agents_(std::move(agents)) {
  if (modules_.empty()) throw ModelError("system '" + name_ + "' has no modules");
  if (!is_valid_action_name(agents_.user) || !is_valid_action_name(agents_.attacker) ||
      agents_.user.find('.') != std::string::npos ||
      agents_.attacker.find('.') != std::string::npos || agents_.user == agents_.attacker) {
    throw ModelError("invalid agent names '" + agents_.user + "', '" + agents_.attacker + "'");
  }
  std::set<std::string> forward_names;
  std::set<std::string> module_ids;
  for (const auto& m : modules_) {
    if (m.actions.empty()) throw ModelError("module '" + m.id + "' is empty");
    if (!module_ids.insert(m.id).second) {
      throw ModelError("duplicate module id '" + m.id + "'");
    }
    std::set<std::string> names;
    for (const auto& a : m.actions) {
      if (!is_valid_action_name(a.name) || a.name.find('.') != std::string::npos) {
        throw ModelError("module '" + m.id + "': invalid action name '" + a.name + "'");
      }
      if (!names.insert(a.name).second) {
        throw ModelError("module '" + m.id + "': duplicate action '" + a.name + "'");
      }
    }
    const auto& fwd = m.forward();
    if (!forward_names.insert(fwd.name).second) {
      throw ModelError("forward action '" + fwd.name + "' appears in more than one module");
    }
  }
  for (const auto& m : modules_) {
    for (const auto& a : m.actions) {
      if (a.direction == Direction::state_targeted && a.target_state > modules_.size()) {
        throw ModelError("module '" + m.id + "': state target " +
                         std::to_string(a.target_state) + " of '" + a.name +
                         "' is out of range");
      }
      if (a.direction == Direction::module_targeted && !forward_names.contains(a.target_action)) {
        throw ModelError("module '" + m.id + "': target '" + a.target_action + "' of '" +
                         a.name + "' is not a forward action");
      }
    }
  }
}

std::size_t Mlts::module_of_forward(std::string_view action) const {
  for (std::size_t i = 0; i < modules_.size(); ++i) {
    if (modules_[i].forward().name == action) return i;
  }
  return modules_.size();
}

bool Mlts::has_backward_self_loop() const {
  const auto& first = modules_.front().actions;
  return std::any_of(first.begin(), first.end(),
                     [](const DirectedAction& a) { return a.direction == Direction::backward; });
}

Mlts parse_mlts(std::string_view source) {
  auto lines = detail::split_lines(source);
  if (lines.empty()) throw ParseError("empty source, expected 'system <Name>'", 1, 1);

  auto fail = [](const std::string& what, const detail::Line& line, std::size_t col) {
    throw ParseError(what, line.number, col);
  };
  auto require_identifier = [&](const detail::Line& line, const detail::Token& tok) {
    if (!is_valid_action_name(tok.text) || tok.text.find('.') != std::string_view::npos) {
      fail("invalid name '" + std::string(tok.text) + "'", line, tok.column);
    }
    return std::string(tok.text);
  };

  std::size_t i = 0;
  const auto& header = lines[i];
  if (header.indented || header.tokens[0].text != "system" || header.tokens.size() != 2) {
    fail("expected 'system <Name>'", header, header.tokens[0].column);
  }
  std::string name = require_identifier(header, header.tokens[1]);
  ++i;

  Agents agents;
  if (i < lines.size() && !lines[i].indented && lines[i].tokens[0].text == "agents") {
    const auto& line = lines[i];
    if (line.tokens.size() != 3) fail("expected 'agents <user> <attacker>'", line, 1);
    agents.user = require_identifier(line, line.tokens[1]);
    agents.attacker = require_identifier(line, line.tokens[2]);
    ++i;
  }

  struct Located {
    std::size_t line;
    std::size_t column;
  };
  std::vector<Module> modules;
  std::vector<Located> module_lines;
  for (; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto& toks = line.tokens;
    if (!line.indented) {
      if (toks[0].text != "module") {
        fail("expected 'module <id>:', got '" + std::string(toks[0].text) + "'", line,
             toks[0].column);
      }
      std::string_view id;
      if (toks.size() == 2 && toks[1].text.size() > 1 && toks[1].text.back() == ':') {
        id = toks[1].text.substr(0, toks[1].text.size() - 1);
      } else if (toks.size() == 3 && toks[2].text == ":") {
        id = toks[1].text;
      } else {
        fail("expected 'module <id>:'", line, toks[0].column);
      }
      detail::Token id_tok{id, toks[1].column};
      modules.push_back(Module{require_identifier(line, id_tok), {}});
      module_lines.push_back({line.number, toks[0].column});
      continue;
    }
    if (modules.empty()) fail("action line outside a module block", line, toks[0].column);
    DirectedAction action;
    const auto& kw = toks[0].text;
    if (kw == "forward" || kw == "backward") {
      if (toks.size() != 2) fail("expected '" + std::string(kw) + " <action>'", line, toks[0].column);
      action.name = require_identifier(line, toks[1]);
      action.direction = kw == "forward" ? Direction::forward : Direction::backward;
    } else if (kw == "state" || kw == "module") {
      if (toks.size() != 4 || toks[2].text != "->") {
        fail("expected '" + std::string(kw) + " <action> -> <target>'", line, toks[0].column);
      }
      action.name = require_identifier(line, toks[1]);
      if (kw == "state") {
        action.direction = Direction::state_targeted;
        if (!detail::parse_size(toks[3].text, action.target_state)) {
          fail("expected a state index, got '" + std::string(toks[3].text) + "'", line,
               toks[3].column);
        }
      } else {
        action.direction = Direction::module_targeted;
        action.target_action = require_identifier(line, toks[3]);
      }
    } else {
      fail("unknown action kind '" + std::string(kw) + "'", line, toks[0].column);
    }
    modules.back().actions.push_back(std::move(action));
  }
  if (modules.empty()) throw ParseError("no modules declared", lines.back().number, 1);

  // Per-module invariants get a location; cross-module ones are reported on the header.
  for (std::size_t m = 0; m < modules.size(); ++m) {
    try {
      modules[m].forward();
    } catch (const ModelError& e) {
      throw ParseError(e.what(), module_lines[m].line, module_lines[m].column);
    }
  }
  try {
    return Mlts(std::move(name), std::move(modules), std::move(agents));
  } catch (const ModelError& e) {
    throw ParseError(e.what(), header.number, 1);
  }
}

std::string render_mlts(const Mlts& m) {
  std::ostringstream os;
  os << "system " << m.name() << "\n";
  if (m.agents() != Agents{}) os << "agents " << m.agents().user << " " << m.agents().attacker << "\n";
  for (const auto& mod : m.modules()) {
    os << "module " << mod.id << ":\n";
    for (const auto& a : mod.actions) {
      os << "  " << to_string(a.direction) << " " << a.name;
      if (a.direction == Direction::state_targeted) os << " -> " << a.target_state;
      if (a.direction == Direction::module_targeted) os << " -> " << a.target_action;
      os << "\n";
    }
  }
  return os.str();
}

Lts to_lts(const Mlts& m) {
  std::vector<Transition> transitions;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto from = static_cast<StateId>(i);
    for (const auto& a : m.modules()[i].actions) {
      StateId to = 0;
      switch (a.direction) {
        case Direction::forward: to = from + 1; break;
        case Direction::backward: to = i == 0 ? from : from - 1; break;
        case Direction::state_targeted: to = static_cast<StateId>(a.target_state); break;
        case Direction::module_targeted:
          to = static_cast<StateId>(m.module_of_forward(a.target_action));
          break;
      }
      transitions.push_back({from, a.name, to});
    }
  }
  return Lts(m.name(), n + 1, 0, transitions);
}

bool module_consistent(const Mlts& a, const Mlts& b) {
  if (a.size() != b.size()) return false;
  std::map<std::vector<DirectedAction>, long> counts;
  for (const auto& m : a.modules()) ++counts[m.content_key()];
  for (const auto& m : b.modules()) {
    auto it = counts.find(m.content_key());
    if (it == counts.end() || it->second == 0) return false;
    --it->second;
  }
  return true;
}

}  // namespace modrev
