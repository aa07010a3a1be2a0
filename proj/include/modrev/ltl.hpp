#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace modrev::ltl {

enum class Op {
  constant_true,
  constant_false,
  atom,
  negation,
  conjunction,
  disjunction,
  implication,
  equivalence,
  next,
  until,
  weak_until,
  release,
  strong_release,
  finally,
  globally,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable LTL syntax tree over action atoms.
struct Formula {
  Op op;
  std::string atom;               // Op::atom only
  std::vector<FormulaPtr> args;   // 0, 1 or 2 children
};

FormulaPtr make_true();
FormulaPtr make_false();
FormulaPtr make_atom(std::string name);
FormulaPtr make_unary(Op op, FormulaPtr a);
FormulaPtr make_binary(Op op, FormulaPtr a, FormulaPtr b);

bool structurally_equal(const Formula& a, const Formula& b);

/// Concrete grammar, loosest to tightest:
///   `<->` (left), `->` (right), `||`, `&&`, `U W R M` (right), prefix `! X F G`.
/// Accepts the aliases □ ◯ ○ ¬ ∧ ∨ → ↔ on input. Throws ParseError with a
/// 1-based column on line 1.
FormulaPtr parse(std::string_view source);

/// Round-trips through parse().
std::string to_string(const Formula& f);

/// Negation normal form: only literals, true/false, && || X U W R M F G.
FormulaPtr nnf(const FormulaPtr& f);

/// True iff the NNF uses only literals, constants, && || X W R G.
bool is_safety(const FormulaPtr& f);

/// Atom names occurring in f, sorted and deduplicated.
std::vector<std::string> atoms(const Formula& f);

/// Nesting depth of operators (atoms and constants have depth 0).
std::size_t depth(const Formula& f);

}  // namespace modrev::ltl
