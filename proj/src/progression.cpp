#include "modrev/progression.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <stdexcept>

#include "modrev/lts.hpp"

namespace modrev::ltl {

Progressor::Progressor(std::vector<std::string> agents) : agents_(std::move(agents)) {
  make(Node{Kind::top, 0, false, {}});
  make(Node{Kind::bottom, 0, false, {}});
}

Progressor::Id Progressor::make(Node node) {
  auto key = std::make_tuple(node.kind, node.atom, node.negated, node.args);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  Id id = static_cast<Id>(nodes_.size());
  nodes_.push_back(std::move(node));
  index_.emplace(std::move(key), id);
  return id;
}

std::vector<std::vector<Progressor::Id>> Progressor::clauses(Id f) const {
  if (f == kTrue) return {{}};
  if (f == kFalse) return {};
  const auto& n = nodes_[f];
  if (n.kind == Kind::conj) return {n.args};
  if (n.kind != Kind::disj) return {{f}};
  std::vector<std::vector<Id>> out;
  for (Id a : n.args) out.push_back(nodes_[a].kind == Kind::conj ? nodes_[a].args : std::vector<Id>{a});
  return out;
}

Progressor::Id Progressor::make_junction(Kind kind, std::vector<Id> args) {
  std::vector<std::vector<Id>> dnf;
  if (kind == Kind::disj) {
    for (Id a : args) {
      auto c = clauses(a);
      dnf.insert(dnf.end(), c.begin(), c.end());
    }
  } else {
    dnf = {{}};
    for (Id a : args) {
      std::vector<std::vector<Id>> next;
      for (const auto& left : dnf) {
        for (const auto& right : clauses(a)) {
          std::vector<Id> merged;
          std::set_union(left.begin(), left.end(), right.begin(), right.end(),
                         std::back_inserter(merged));
          next.push_back(std::move(merged));
        }
      }
      dnf = std::move(next);
      if (dnf.empty()) return kFalse;
    }
  }
  // Absorption: a clause implied by a smaller one is dropped.
  std::sort(dnf.begin(), dnf.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<std::vector<Id>> kept;
  for (auto& c : dnf) {
    bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const auto& k) {
      return std::includes(c.begin(), c.end(), k.begin(), k.end());
    });
    if (!absorbed) kept.push_back(std::move(c));
  }
  if (kept.empty()) return kFalse;
  std::vector<Id> terms;
  for (auto& c : kept) {
    if (c.empty()) return kTrue;
    terms.push_back(c.size() == 1 ? c.front() : make(Node{Kind::conj, 0, false, std::move(c)}));
  }
  std::sort(terms.begin(), terms.end());
  if (terms.size() == 1) return terms.front();
  return make(Node{Kind::disj, 0, false, std::move(terms)});
}

Progressor::Id Progressor::build(const Formula& f) {
  auto child = [&](std::size_t i) { return build(*f.args[i]); };
  auto literal = [&](const std::string& name, bool negated) {
    auto it = std::find(atom_names_.begin(), atom_names_.end(), name);
    auto idx = static_cast<std::uint32_t>(it - atom_names_.begin());
    if (it == atom_names_.end()) {
      atom_names_.push_back(name);
      for (std::size_t a = 0; a < holds_.size(); ++a) holds_[a].push_back(false);
      // Existing actions need the new atom's valuation.
      for (const auto& [act, ai] : actions_) holds_[ai][idx] = atom_holds(name, act);
    }
    return make(Node{Kind::literal, idx, negated, {}});
  };
  switch (f.op) {
    case Op::constant_true: return kTrue;
    case Op::constant_false: return kFalse;
    case Op::atom: return literal(f.atom, false);
    case Op::negation:
      if (f.args[0]->op != Op::atom) throw std::logic_error("formula is not in NNF");
      return literal(f.args[0]->atom, true);
    case Op::conjunction: return make_junction(Kind::conj, {child(0), child(1)});
    case Op::disjunction: return make_junction(Kind::disj, {child(0), child(1)});
    case Op::next: return make(Node{Kind::next, 0, false, {child(0)}});
    case Op::globally: return make(Node{Kind::globally, 0, false, {child(0)}});
    case Op::finally: return make(Node{Kind::finally, 0, false, {child(0)}});
    case Op::until: return make(Node{Kind::until, 0, false, {child(0), child(1)}});
    case Op::weak_until: return make(Node{Kind::weak_until, 0, false, {child(0), child(1)}});
    case Op::release: return make(Node{Kind::release, 0, false, {child(0), child(1)}});
    case Op::strong_release:
      return make(Node{Kind::strong_release, 0, false, {child(0), child(1)}});
    default: throw std::logic_error("formula is not in NNF");
  }
}

Progressor::Id Progressor::intern(const FormulaPtr& f) { return build(*nnf(f)); }

bool Progressor::atom_holds(std::string_view atom, std::string_view action) const {
  if (action == kEndAction) return false;
  if (atom == action) return true;
  if (atom.find('.') != std::string_view::npos) return false;
  auto [agent, base] = split_agent(action);
  if (agent.empty() || base != atom) return false;
  return std::find(agents_.begin(), agents_.end(), agent) != agents_.end();
}

std::uint32_t Progressor::action_index(std::string_view action) {
  auto it = actions_.find(std::string(action));
  if (it != actions_.end()) return it->second;
  auto idx = static_cast<std::uint32_t>(holds_.size());
  std::vector<bool> row(atom_names_.size());
  for (std::size_t a = 0; a < atom_names_.size(); ++a) row[a] = atom_holds(atom_names_[a], action);
  holds_.push_back(std::move(row));
  actions_.emplace(std::string(action), idx);
  return idx;
}

Progressor::Id Progressor::progress(Id f, std::string_view action) {
  const std::uint32_t act = action_index(action);
  std::function<Id(Id)> step = [&](Id g) -> Id {
    if (g == kTrue || g == kFalse) return g;
    const std::uint64_t key = (std::uint64_t{g} << 32) | act;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    // Copy: nodes_ may reallocate while recursing.
    const Node node = nodes_[g];
    Id result = kFalse;
    switch (node.kind) {
      case Kind::top: result = kTrue; break;
      case Kind::bottom: result = kFalse; break;
      case Kind::literal:
        result = holds_[act][node.atom] != node.negated ? kTrue : kFalse;
        break;
      case Kind::conj:
      case Kind::disj: {
        std::vector<Id> parts;
        parts.reserve(node.args.size());
        for (Id a : node.args) parts.push_back(step(a));
        result = make_junction(node.kind, std::move(parts));
        break;
      }
      case Kind::next: result = node.args[0]; break;
      case Kind::globally:
        result = make_junction(Kind::conj, {step(node.args[0]), g});
        break;
      case Kind::finally:
        result = make_junction(Kind::disj, {step(node.args[0]), g});
        break;
      case Kind::until:
      case Kind::weak_until:
        // a U b / a W b  ->  b' || (a' && self)
        result = make_junction(
            Kind::disj,
            {step(node.args[1]), make_junction(Kind::conj, {step(node.args[0]), g})});
        break;
      case Kind::release:
      case Kind::strong_release:
        // a R b / a M b  ->  b' && (a' || self)
        result = make_junction(
            Kind::conj,
            {step(node.args[1]), make_junction(Kind::disj, {step(node.args[0]), g})});
        break;
    }
    memo_.emplace(key, result);
    return result;
  };
  return step(f);
}

Progressor::Id Progressor::progress(Id f, const std::vector<std::string>& trace) {
  for (const auto& a : trace) f = progress(f, a);
  return f;
}

std::vector<Progressor::Id> Progressor::leaves(Id f) const {
  std::vector<Id> out;
  std::function<void(Id)> walk = [&](Id g) {
    const auto& n = nodes_[g];
    if (n.kind == Kind::conj || n.kind == Kind::disj) {
      for (Id a : n.args) walk(a);
    } else {
      out.push_back(g);
    }
  };
  walk(f);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Progressor::Id> Progressor::subformulas(Id f) const {
  std::vector<Id> out;
  std::vector<Id> stack{f};
  while (!stack.empty()) {
    Id g = stack.back();
    stack.pop_back();
    if (std::find(out.begin(), out.end(), g) != out.end()) continue;
    out.push_back(g);
    for (Id a : nodes_[g].args) stack.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Progressor::describe(Id f) const {
  const auto& n = nodes_[f];
  auto sub = [&](std::size_t i) { return describe(n.args[i]); };
  auto join = [&](const char* sep) {
    std::string s = "(";
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) s += sep;
      s += sub(i);
    }
    return s + ")";
  };
  switch (n.kind) {
    case Kind::top: return "true";
    case Kind::bottom: return "false";
    case Kind::literal: return (n.negated ? "!" : "") + atom_names_[n.atom];
    case Kind::conj: return join(" && ");
    case Kind::disj: return join(" || ");
    case Kind::next: return "X " + sub(0);
    case Kind::globally: return "G " + sub(0);
    case Kind::finally: return "F " + sub(0);
    case Kind::until: return "(" + sub(0) + " U " + sub(1) + ")";
    case Kind::weak_until: return "(" + sub(0) + " W " + sub(1) + ")";
    case Kind::release: return "(" + sub(0) + " R " + sub(1) + ")";
    case Kind::strong_release: return "(" + sub(0) + " M " + sub(1) + ")";
  }
  return "?";
}

}  // namespace modrev::ltl
