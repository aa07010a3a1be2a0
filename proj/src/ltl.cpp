#include "modrev/ltl.hpp"

#include <algorithm>
#include <set>

#include "modrev/lts.hpp"

namespace modrev::ltl {

FormulaPtr make_true() {
  static const FormulaPtr t = std::make_shared<const Formula>(Formula{Op::constant_true, {}, {}});
  return t;
}

FormulaPtr make_false() {
  static const FormulaPtr f = std::make_shared<const Formula>(Formula{Op::constant_false, {}, {}});
  return f;
}

FormulaPtr make_atom(std::string name) {
  return std::make_shared<const Formula>(Formula{Op::atom, std::move(name), {}});
}

FormulaPtr make_unary(Op op, FormulaPtr a) {
  return std::make_shared<const Formula>(Formula{op, {}, {std::move(a)}});
}

FormulaPtr make_binary(Op op, FormulaPtr a, FormulaPtr b) {
  return std::make_shared<const Formula>(Formula{op, {}, {std::move(a), std::move(b)}});
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.op != b.op || a.atom != b.atom || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

namespace {

enum class Tok {
  lparen, rparen, bang, conj, disj, implies, iff,
  next, finally, globally, until, weak_until, release, strong_release,
  kw_true, kw_false, ident, end,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;
};

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                    src_[pos_] == '\n' || src_[pos_] == '\r')) {
        ++pos_;
      }
      std::size_t col = pos_ + 1;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::end, "", col});
        return out;
      }
      out.push_back(next_token(col));
    }
  }

 private:
  bool consume(std::string_view s) {
    if (src_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }

  Token next_token(std::size_t col) {
    struct Symbol {
      std::string_view text;
      Tok kind;
    };
    // Longest spellings first.
    static constexpr Symbol symbols[] = {
        {"<->", Tok::iff},          {"->", Tok::implies},       {"&&", Tok::conj},
        {"||", Tok::disj},          {"(", Tok::lparen},          {")", Tok::rparen},
        {"!", Tok::bang},           {"□", Tok::globally},   {"◯", Tok::next},
        {"○", Tok::next},      {"¬", Tok::bang},       {"∧", Tok::conj},
        {"∨", Tok::disj},      {"→", Tok::implies},    {"↔", Tok::iff},
    };
    for (const auto& s : symbols) {
      if (consume(s.text)) return {s.kind, std::string(s.text), col};
    }
    char c = src_[pos_];
    if (!ident_start(c)) {
      std::size_t len = 1;
      while (pos_ + len < src_.size() && !ident_char(src_[pos_ + len]) &&
             src_[pos_ + len] != ' ' && src_[pos_ + len] != '(' && src_[pos_ + len] != ')') {
        ++len;
      }
      throw ParseError("unknown operator '" + std::string(src_.substr(pos_, len)) + "'", 1, col);
    }
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      if (pos_ >= src_.size() || !ident_start(src_[pos_])) {
        throw ParseError("malformed agent-prefixed atom", 1, col);
      }
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    }
    std::string word(src_.substr(start, pos_ - start));
    static const std::pair<std::string_view, Tok> keywords[] = {
        {"X", Tok::next},       {"F", Tok::finally},       {"G", Tok::globally},
        {"U", Tok::until},      {"W", Tok::weak_until},    {"R", Tok::release},
        {"M", Tok::strong_release}, {"true", Tok::kw_true}, {"false", Tok::kw_false},
    };
    for (const auto& [kw, kind] : keywords) {
      if (word == kw) return {kind, word, col};
    }
    return {Tok::ident, word, col};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  FormulaPtr run() {
    auto f = parse_iff();
    if (peek().kind != Tok::end) error("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  [[noreturn]] void error(const std::string& what) const {
    throw ParseError(what, 1, peek().column);
  }

  FormulaPtr parse_iff() {
    auto lhs = parse_implies();
    while (peek().kind == Tok::iff) {
      take();
      lhs = make_binary(Op::equivalence, lhs, parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_implies() {
    auto lhs = parse_or();
    if (peek().kind == Tok::implies) {
      take();
      return make_binary(Op::implication, lhs, parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    auto lhs = parse_and();
    while (peek().kind == Tok::disj) {
      take();
      lhs = make_binary(Op::disjunction, lhs, parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    auto lhs = parse_temporal();
    while (peek().kind == Tok::conj) {
      take();
      lhs = make_binary(Op::conjunction, lhs, parse_temporal());
    }
    return lhs;
  }

  FormulaPtr parse_temporal() {
    auto lhs = parse_unary();
    Op op;
    switch (peek().kind) {
      case Tok::until: op = Op::until; break;
      case Tok::weak_until: op = Op::weak_until; break;
      case Tok::release: op = Op::release; break;
      case Tok::strong_release: op = Op::strong_release; break;
      default: return lhs;
    }
    take();
    return make_binary(op, lhs, parse_temporal());
  }

  FormulaPtr parse_unary() {
    switch (peek().kind) {
      case Tok::bang: take(); return make_unary(Op::negation, parse_unary());
      case Tok::next: take(); return make_unary(Op::next, parse_unary());
      case Tok::finally: take(); return make_unary(Op::finally, parse_unary());
      case Tok::globally: take(); return make_unary(Op::globally, parse_unary());
      default: return parse_primary();
    }
  }

  FormulaPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kw_true: take(); return make_true();
      case Tok::kw_false: take(); return make_false();
      case Tok::ident: return make_atom(take().text);
      case Tok::lparen: {
        take();
        auto f = parse_iff();
        if (peek().kind != Tok::rparen) error("expected ')'");
        take();
        return f;
      }
      case Tok::end: error("unexpected end of formula");
      default: error("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string_view symbol(Op op) {
  switch (op) {
    case Op::negation: return "!";
    case Op::conjunction: return "&&";
    case Op::disjunction: return "||";
    case Op::implication: return "->";
    case Op::equivalence: return "<->";
    case Op::next: return "X";
    case Op::until: return "U";
    case Op::weak_until: return "W";
    case Op::release: return "R";
    case Op::strong_release: return "M";
    case Op::finally: return "F";
    case Op::globally: return "G";
    default: return "";
  }
}

bool is_binary(const Formula& f) { return f.args.size() == 2; }

void print(const Formula& f, std::string& out) {
  switch (f.op) {
    case Op::constant_true: out += "true"; return;
    case Op::constant_false: out += "false"; return;
    case Op::atom: out += f.atom; return;
    default: break;
  }
  auto child = [&](const Formula& c) {
    if (is_binary(c)) {
      out += '(';
      print(c, out);
      out += ')';
    } else {
      print(c, out);
    }
  };
  if (f.args.size() == 1) {
    out += symbol(f.op);
    if (f.op != Op::negation && !is_binary(*f.args[0])) out += ' ';
    child(*f.args[0]);
    return;
  }
  child(*f.args[0]);
  out += ' ';
  out += symbol(f.op);
  out += ' ';
  child(*f.args[1]);
}

FormulaPtr nnf_of(const FormulaPtr& f, bool negate) {
  const auto& a = f->args;
  switch (f->op) {
    case Op::constant_true: return negate ? make_false() : make_true();
    case Op::constant_false: return negate ? make_true() : make_false();
    case Op::atom: return negate ? make_unary(Op::negation, f) : f;
    case Op::negation: return nnf_of(a[0], !negate);
    case Op::conjunction:
      return make_binary(negate ? Op::disjunction : Op::conjunction, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
    case Op::disjunction:
      return make_binary(negate ? Op::conjunction : Op::disjunction, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
    case Op::implication:
      // a -> b  ==  !a || b
      return make_binary(negate ? Op::conjunction : Op::disjunction, nnf_of(a[0], !negate),
                         nnf_of(a[1], negate));
    case Op::equivalence: {
      // a <-> b == (a && b) || (!a && !b);  !(a <-> b) == (a && !b) || (!a && b)
      auto both = make_binary(Op::conjunction, nnf_of(a[0], false), nnf_of(a[1], negate));
      auto neither = make_binary(Op::conjunction, nnf_of(a[0], true), nnf_of(a[1], !negate));
      return make_binary(Op::disjunction, both, neither);
    }
    case Op::next: return make_unary(Op::next, nnf_of(a[0], negate));
    case Op::finally:
      return make_unary(negate ? Op::globally : Op::finally, nnf_of(a[0], negate));
    case Op::globally:
      return make_unary(negate ? Op::finally : Op::globally, nnf_of(a[0], negate));
    case Op::until:
      return make_binary(negate ? Op::release : Op::until, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
    case Op::release:
      return make_binary(negate ? Op::until : Op::release, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
    case Op::weak_until:
      return make_binary(negate ? Op::strong_release : Op::weak_until, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
    case Op::strong_release:
      return make_binary(negate ? Op::weak_until : Op::strong_release, nnf_of(a[0], negate),
                         nnf_of(a[1], negate));
  }
  return f;
}

bool safe_nnf(const Formula& f) {
  switch (f.op) {
    case Op::constant_true:
    case Op::constant_false:
    case Op::atom:
      return true;
    case Op::negation:
      return f.args[0]->op == Op::atom;
    case Op::conjunction:
    case Op::disjunction:
    case Op::next:
    case Op::weak_until:
    case Op::release:
    case Op::globally:
      return std::all_of(f.args.begin(), f.args.end(),
                         [](const FormulaPtr& c) { return safe_nnf(*c); });
    default:
      return false;
  }
}

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op == Op::atom) out.insert(f.atom);
  for (const auto& c : f.args) collect_atoms(*c, out);
}

}  // namespace

FormulaPtr parse(std::string_view source) { return Parser(Lexer(source).run()).run(); }

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

FormulaPtr nnf(const FormulaPtr& f) { return nnf_of(f, false); }

bool is_safety(const FormulaPtr& f) { return safe_nnf(*nnf(f)); }

std::vector<std::string> atoms(const Formula& f) {
  std::set<std::string> s;
  collect_atoms(f, s);
  return {s.begin(), s.end()};
}

std::size_t depth(const Formula& f) {
  std::size_t d = 0;
  for (const auto& c : f.args) d = std::max(d, depth(*c));
  return f.args.empty() ? 0 : d + 1;
}

}  // namespace modrev::ltl
