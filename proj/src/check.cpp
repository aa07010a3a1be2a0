#include "modrev/check.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace modrev {

SafetyChecker::SafetyChecker(ltl::FormulaPtr formula, CheckOptions options)
    : formula_(std::move(formula)), options_(std::move(options)), progressor_(options_.agents) {
  if (!ltl::is_safety(formula_)) {
    throw NonSafetyFormula("non-safety formula: " + ltl::to_string(*formula_));
  }
  root_ = progressor_.intern(formula_);
}

Verdict SafetyChecker::run(const Lts& input) {
  using Id = ltl::Progressor::Id;
  Verdict verdict;

  const Lts* model = &input;
  Lts completed;
  for (StateId s = 0; s < input.num_states(); ++s) {
    if (input.outgoing(s).empty()) {
      completed = complete_deadlocks(input);
      model = &completed;
      verdict.warnings.push_back("model has deadlock states; completed with _end");
      break;
    }
  }

  for (const auto& atom : ltl::atoms(*formula_)) {
    bool seen = std::any_of(model->actions().begin(), model->actions().end(),
                            [&](const std::string& a) { return progressor_.atom_holds(atom, a); });
    if (!seen) verdict.warnings.push_back("atom '" + atom + "' matches no action of the model");
  }

  // Progression is memoized per action name; resolve names once per model.
  const auto actions = model->actions();

  struct Node {
    StateId state;
    Id obligation;
    std::size_t parent;
    ActionId via;
  };
  constexpr std::size_t kRoot = ~std::size_t{0};
  std::vector<Node> nodes;
  std::unordered_set<std::uint64_t> seen;
  std::unordered_set<Id> obligations;
  std::size_t head = 0;

  auto trace_to = [&](std::size_t idx, ActionId last) {
    std::vector<std::string> out{actions[last]};
    for (std::size_t i = idx; i != kRoot; i = nodes[i].parent) {
      if (nodes[i].parent != kRoot) out.push_back(actions[nodes[i].via]);
    }
    std::reverse(out.begin(), out.end());
    return out;
  };

  if (root_ == ltl::Progressor::kFalse) {
    verdict.satisfied = false;
    return verdict;
  }
  if (root_ == ltl::Progressor::kTrue) return verdict;

  nodes.push_back({model->initial(), root_, kRoot, 0});
  seen.insert((std::uint64_t{model->initial()} << 32) | root_);
  obligations.insert(root_);
  while (head < nodes.size()) {
    const Node cur = nodes[head];
    for (const auto& e : model->outgoing(cur.state)) {
      Id next = progressor_.progress(cur.obligation, actions[e.action]);
      if (next == ltl::Progressor::kFalse) {
        verdict.satisfied = false;
        verdict.counterexample = trace_to(head, e.action);
        verdict.explored_pairs = nodes.size();
        verdict.distinct_obligations = obligations.size();
        return verdict;
      }
      if (next == ltl::Progressor::kTrue) continue;
      if (seen.insert((std::uint64_t{e.to} << 32) | next).second) {
        obligations.insert(next);
        nodes.push_back({e.to, next, head, e.action});
        if (nodes.size() > options_.max_pairs) {
          throw std::runtime_error("check: exploration exceeded max_pairs");
        }
      }
    }
    ++head;
  }
  verdict.explored_pairs = nodes.size();
  verdict.distinct_obligations = obligations.size();
  return verdict;
}

Verdict check(const Lts& model, const ltl::FormulaPtr& formula, const CheckOptions& options) {
  return SafetyChecker(formula, options).run(model);
}

}  // namespace modrev
