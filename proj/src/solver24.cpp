#include "gtr/solver24.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace gtr::solver {

int effective_value(int rank) {
  if (rank < 1 || rank > 13) throw Error("card rank out of range: " + std::to_string(rank));
  return rank > 10 ? 10 : rank;
}

std::vector<int> effective_values(std::span<const CardValue> cards) {
  std::vector<int> out;
  out.reserve(cards.size());
  for (const auto& c : cards) out.push_back(effective_value(c.rank));
  return out;
}

bool is_number_token(const std::string& tok) {
  if (tok.empty() || tok.size() > 2) return false;
  if (!std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return false;
  if (tok[0] == '0') return false;
  const int v = std::stoi(tok);
  return v >= 1 && v <= 10;
}

bool is_operator_token(const std::string& tok) {
  return tok == "+" || tok == "-" || tok == "*" || tok == "/";
}

int number_value(const std::string& tok) { return std::stoi(tok); }

std::string join_formula(const FormulaTokens& f) {
  std::string out;
  for (const auto& t : f) out += t;
  return out;
}

FormulaTokens split_formula(const std::string& text) {
  FormulaTokens out;
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (c == ' ') {
      ++i;
    } else if (c >= '0' && c <= '9') {
      std::size_t j = i;
      while (j < text.size() && text[j] >= '0' && text[j] <= '9') ++j;
      out.push_back(text.substr(i, j - i));
      i = j;
    } else if (std::string("+-*/()=").find(c) != std::string::npos) {
      out.emplace_back(1, c);
      ++i;
    } else {
      throw MalformedExpression(std::string("unexpected character '") + c + "' in formula");
    }
  }
  return out;
}

namespace {

// Recursive-descent evaluator.
class Evaluator {
 public:
  explicit Evaluator(const FormulaTokens& f) : toks_(f) {}

  Rational run() {
    if (toks_.empty()) throw MalformedExpression("empty formula");
    Rational v = expr();
    if (pos_ != toks_.size())
      throw MalformedExpression("unexpected token '" + toks_[pos_] + "'");
    return v;
  }

 private:
  const std::string* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }

  Rational expr() {
    Rational acc = term();
    while (const auto* t = peek()) {
      if (*t != "+" && *t != "-") break;
      const bool add = *t == "+";
      ++pos_;
      const Rational rhs = term();
      acc = add ? acc + rhs : acc - rhs;
    }
    return acc;
  }

  Rational term() {
    Rational acc = factor();
    while (const auto* t = peek()) {
      if (*t != "*" && *t != "/") break;
      const bool mul = *t == "*";
      ++pos_;
      const Rational rhs = factor();
      acc = mul ? acc * rhs : acc / rhs;
    }
    return acc;
  }

  Rational factor() {
    const auto* t = peek();
    if (!t) throw MalformedExpression("formula ends where an operand is expected");
    if (*t == "(") {
      ++pos_;
      Rational v = expr();
      const auto* close = peek();
      if (!close || *close != ")") throw MalformedExpression("unbalanced parentheses");
      ++pos_;
      return v;
    }
    if (is_number_token(*t)) {
      ++pos_;
      return Rational(number_value(*t));
    }
    throw MalformedExpression("unexpected token '" + *t + "' where an operand is expected");
  }

  const FormulaTokens& toks_;
  std::size_t pos_ = 0;
};

int precedence(char op) { return (op == '+' || op == '-') ? 1 : 2; }

Rational apply(char op, const Rational& a, const Rational& b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: return a / b;
  }
}

// One enumerated subtree: its exact value (nullopt after a division by zero),
// its rendering and its top operator (0 for a leaf).
struct Subtree {
  std::optional<Rational> value;
  FormulaTokens tokens;
  char op = 0;
};

void append_child(FormulaTokens& out, const Subtree& child, char parent, bool right) {
  bool wrap = false;
  if (child.op != 0) {
    const int pc = precedence(child.op), pp = precedence(parent);
    wrap = pc < pp || (right && pc == pp && (parent == '-' || parent == '/'));
  }
  if (wrap) out.emplace_back("(");
  out.insert(out.end(), child.tokens.begin(), child.tokens.end());
  if (wrap) out.emplace_back(")");
}

// All binary trees over leaves[lo, hi) in the given order, every operator
// assignment drawn from `ops`.
std::vector<Subtree> trees(const std::vector<int>& leaves, std::size_t lo, std::size_t hi,
                           const std::string& ops) {
  if (hi - lo == 1) return {Subtree{Rational(leaves[lo]), {std::to_string(leaves[lo])}, 0}};
  std::vector<Subtree> out;
  for (std::size_t k = lo + 1; k < hi; ++k) {
    const auto left = trees(leaves, lo, k, ops);
    const auto right = trees(leaves, k, hi, ops);
    for (const auto& l : left) {
      for (const auto& r : right) {
        for (char op : ops) {
          Subtree s;
          s.op = op;
          if (l.value && r.value && !(op == '/' && r.value->is_zero()))
            s.value = apply(op, *l.value, *r.value);
          append_child(s.tokens, l, op, false);
          s.tokens.emplace_back(1, op);
          append_child(s.tokens, r, op, true);
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

std::vector<FormulaTokens> enumerate(std::vector<int> values, const Puzzle& puzzle) {
  std::sort(values.begin(), values.end());
  std::set<FormulaTokens> found;
  const Rational target(puzzle.target);
  do {
    for (auto& t : trees(values, 0, values.size(), puzzle.ops)) {
      if (t.value && *t.value == target) found.insert(std::move(t.tokens));
    }
  } while (std::next_permutation(values.begin(), values.end()));
  return {found.begin(), found.end()};
}

class FormulaCache {
 public:
  const std::vector<FormulaTokens>& get(std::vector<int> key, const Puzzle& puzzle) {
    std::sort(key.begin(), key.end());
    const auto full_key = std::make_pair(puzzle.target, key);
    {
      std::shared_lock lock(mu_);
      if (auto it = memo_.find(full_key); it != memo_.end()) return it->second;
    }
    auto formulas = enumerate(key, puzzle);
    std::unique_lock lock(mu_);
    return memo_.try_emplace(full_key, std::move(formulas)).first->second;
  }

 private:
  std::shared_mutex mu_;
  std::map<std::pair<int, std::vector<int>>, std::vector<FormulaTokens>> memo_;
};

FormulaCache& cache() {
  static FormulaCache c;
  return c;
}

void check_values(std::span<const int> values, std::size_t expected) {
  if (values.size() != expected)
    throw Error("expected " + std::to_string(expected) + " cards, got " +
                std::to_string(values.size()));
  for (int v : values)
    if (v < 1 || v > 10) throw Error("effective card value out of range: " + std::to_string(v));
}

}  // namespace

Rational evaluate_formula(const FormulaTokens& f) {
  for (const auto& t : f)
    if (t == "=") throw MalformedExpression("'=' must be stripped before evaluation");
  return Evaluator(f).run();
}

std::optional<Rational> try_evaluate(const FormulaTokens& f) {
  try {
    return evaluate_formula(f);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<FormulaTokens> find_all_correct_formulas(std::span<const int> values) {
  check_values(values, 4);
  return cache().get({values.begin(), values.end()}, Puzzle::points24());
}

std::vector<FormulaTokens> find_all_correct_formulas(const std::array<CardValue, 4>& cards) {
  const auto v = effective_values(cards);
  return find_all_correct_formulas(v);
}

std::vector<FormulaTokens> find_all_correct_formulas_12(std::span<const int> values) {
  check_values(values, 2);
  return cache().get({values.begin(), values.end()}, Puzzle::points12());
}

bool is_solvable(std::span<const int> values) {
  return !find_all_correct_formulas(values).empty();
}

bool is_solvable_12(std::span<const int> values) {
  return !find_all_correct_formulas_12(values).empty();
}

// ---------------------------------------------------------------------------
// Reachable values (used for parenthesized groups in completable()).

namespace {

using Multiset = std::vector<int>;

// Distinct ways to split a sorted multiset into (A, B), both nonempty.
std::vector<std::pair<Multiset, Multiset>> splits(const Multiset& m) {
  std::set<std::pair<Multiset, Multiset>> out;
  const std::size_t n = m.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    Multiset a, b;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b).push_back(m[i]);
    out.emplace(std::move(a), std::move(b));
  }
  return {out.begin(), out.end()};
}

std::vector<Rational> reachable_sorted(const Multiset& m, const Puzzle& puzzle,
                                       std::map<Multiset, std::vector<Rational>>& memo) {
  if (auto it = memo.find(m); it != memo.end()) return it->second;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<Rational> out;
  auto add = [&](const Rational& r) {
    if (seen.emplace(r.numerator(), r.denominator()).second) out.push_back(r);
  };
  if (m.size() == 1) {
    add(Rational(m[0]));
  } else {
    for (const auto& [a, b] : splits(m)) {
      const auto va = reachable_sorted(a, puzzle, memo);
      const auto vb = reachable_sorted(b, puzzle, memo);
      for (const auto& x : va) {
        for (const auto& y : vb) {
          for (char op : puzzle.ops) {
            if (op == '/' && y.is_zero()) continue;
            add(apply(op, x, y));
          }
        }
      }
    }
  }
  memo.emplace(m, out);
  return out;
}

// Incremental infix parser state for one parenthesis level.
struct Level {
  std::optional<Rational> sum;   // additive part already closed off
  char add_op = '+';             // pending between sum and term
  std::optional<Rational> term;  // multiplicative part in progress
  char mul_op = '*';             // pending between term and next operand
  bool expect_operand = true;
  bool dead = false;             // a division by zero has been committed

  Rational value() const { return sum ? apply(add_op, *sum, *term) : *term; }
};

struct ParseState {
  std::vector<Level> levels{Level{}};

  bool dead() const {
    return std::any_of(levels.begin(), levels.end(), [](const Level& l) { return l.dead; });
  }

  void feed_operand(const Rational& v) {
    Level& l = levels.back();
    if (!l.term) {
      l.term = v;
    } else if (l.mul_op == '/' && v.is_zero()) {
      l.dead = true;
      l.term = Rational(0);
    } else {
      l.term = apply(l.mul_op, *l.term, v);
    }
    l.expect_operand = false;
  }

  void feed_operator(char op) {
    Level& l = levels.back();
    if (op == '*' || op == '/') {
      l.mul_op = op;
    } else {
      l.sum = l.value();
      l.add_op = op;
      l.term.reset();
    }
    l.expect_operand = true;
  }

  void open() { levels.emplace_back(); }

  void close() {
    const Level inner = levels.back();
    levels.pop_back();
    feed_operand(inner.value());
    if (inner.dead) levels.back().dead = true;
  }

  std::string key() const {
    std::ostringstream os;
    for (const auto& l : levels) {
      os << (l.sum ? l.sum->to_string() : "_") << l.add_op
         << (l.term ? l.term->to_string() : "_") << l.mul_op << l.expect_operand << l.dead
         << '|';
    }
    return os.str();
  }
};

class Completer {
 public:
  Completer(const Puzzle& puzzle) : puzzle_(puzzle), target_(puzzle.target) {}

  bool search(const ParseState& st, const Multiset& remaining) {
    if (st.dead()) return false;
    std::string key = st.key() + "#";
    for (int v : remaining) key += std::to_string(v) + ",";
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool ok = expand(st, remaining);
    memo_.emplace(std::move(key), ok);
    return ok;
  }

 private:
  bool expand(const ParseState& st, const Multiset& remaining) {
    const Level& top = st.levels.back();
    if (top.expect_operand) {
      if (remaining.empty()) return false;
      // A single number, or a parenthesized group over any sub-multiset.
      std::set<Multiset> subsets;
      const std::size_t n = remaining.size();
      for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        Multiset a;
        for (std::size_t i = 0; i < n; ++i)
          if ((mask >> i) & 1) a.push_back(remaining[i]);
        if (a.size() > 1 && !puzzle_.parens) continue;
        subsets.insert(a);
      }
      for (const auto& sub : subsets) {
        Multiset rest = remaining;
        for (int v : sub) rest.erase(std::find(rest.begin(), rest.end(), v));
        const auto values = sub.size() == 1 ? std::vector<Rational>{Rational(sub[0])}
                                            : reachable_sorted(sub, puzzle_, values_memo_);
        for (const auto& v : values) {
          ParseState next = st;
          next.feed_operand(v);
          if (search(next, rest)) return true;
        }
      }
      return false;
    }
    if (remaining.empty() && st.levels.size() == 1) {
      try {
        return top.value() == target_;
      } catch (const DivisionByZero&) {
        return false;
      }
    }
    if (!remaining.empty()) {
      for (char op : puzzle_.ops) {
        ParseState next = st;
        next.feed_operator(op);
        if (search(next, remaining)) return true;
      }
    }
    if (st.levels.size() > 1) {
      ParseState next = st;
      next.close();
      if (search(next, remaining)) return true;
    }
    return false;
  }

  const Puzzle& puzzle_;
  Rational target_;
  std::unordered_map<std::string, bool> memo_;
  std::map<Multiset, std::vector<Rational>> values_memo_;
};

}  // namespace

std::vector<Rational> reachable_values(std::span<const int> values, const Puzzle& puzzle) {
  Multiset m(values.begin(), values.end());
  std::sort(m.begin(), m.end());
  std::map<Multiset, std::vector<Rational>> memo;
  auto out = reachable_sorted(m, puzzle, memo);
  std::sort(out.begin(), out.end());
  return out;
}

bool completable(std::span<const int> values, const FormulaTokens& partial,
                 const Puzzle& puzzle) {
  Multiset remaining(values.begin(), values.end());
  std::sort(remaining.begin(), remaining.end());
  ParseState st;
  bool card_missing = false;
  for (const auto& tok : partial) {
    Level& top = st.levels.back();
    if (is_number_token(tok)) {
      if (!top.expect_operand) throw MalformedExpression("number follows an operand: " + tok);
      const int v = number_value(tok);
      auto it = std::find(remaining.begin(), remaining.end(), v);
      if (it == remaining.end()) {
        card_missing = true;
      } else {
        remaining.erase(it);
      }
      st.feed_operand(Rational(v));
    } else if (tok.size() == 1 && puzzle.ops.find(tok[0]) != std::string::npos) {
      if (top.expect_operand) throw MalformedExpression("operator where an operand is expected");
      st.feed_operator(tok[0]);
    } else if (tok == "(" && puzzle.parens) {
      if (!top.expect_operand) throw MalformedExpression("'(' follows an operand");
      st.open();
    } else if (tok == ")" && puzzle.parens) {
      if (top.expect_operand || st.levels.size() == 1)
        throw MalformedExpression("unmatched or premature ')'");
      st.close();
    } else {
      throw MalformedExpression("token not allowed in a partial formula: '" + tok + "'");
    }
  }
  if (card_missing) return false;
  Completer c(puzzle);
  return c.search(st, remaining);
}

}  // namespace gtr::solver
