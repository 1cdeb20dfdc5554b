#pragma once

// Exact arithmetic-expression solver for the card tasks.
//
// Formulas are token sequences over {"1".."10", "+", "-", "*", "/", "(", ")"}
// with an optional trailing "=". Evaluation is exact (Rational), so the solver
// can serve as an oracle: 8/(3-8/3) is 24, not 23.999999.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gtr/rational.hpp"

namespace gtr::solver {

using FormulaTokens = std::vector<std::string>;

// A dealt card. Ranks J, Q, K (11..13) count as 10.
struct CardValue {
  int rank = 1;

  int effective() const { return rank > 10 ? 10 : rank; }
  friend bool operator==(const CardValue&, const CardValue&) = default;
};

int effective_value(int rank);
std::vector<int> effective_values(std::span<const CardValue> cards);

bool is_number_token(const std::string& tok);
bool is_operator_token(const std::string& tok);  // + - * /
int number_value(const std::string& tok);        // requires is_number_token

// Renders tokens with no separators, e.g. {"2","*","(","3","+","1",")"} -> "2*(3+1)".
std::string join_formula(const FormulaTokens& f);
// Inverse of join_formula. Throws MalformedExpression on characters outside
// the formula alphabet.
FormulaTokens split_formula(const std::string& text);

// Exact value of an infix expression with the usual precedence. The formula
// must not contain "=". Throws MalformedExpression or DivisionByZero.
Rational evaluate_formula(const FormulaTokens& f);
// Same, returning nullopt instead of throwing.
std::optional<Rational> try_evaluate(const FormulaTokens& f);

// Operator sets and target for a puzzle variant.
struct Puzzle {
  int target = 24;
  std::string ops = "+-*/";
  bool parens = true;

  static Puzzle points24() { return {}; }
  static Puzzle points12() { return {12, "+-", false}; }
};

// Every distinct token string that uses each value once, evaluates to 24 and
// is rendered with minimal parentheses. Sorted lexicographically by token
// sequence. Thread-safe; results are memoized per sorted multiset.
std::vector<FormulaTokens> find_all_correct_formulas(std::span<const int> values);
std::vector<FormulaTokens> find_all_correct_formulas(const std::array<CardValue, 4>& cards);

// All a(+|-)b expressions over two cards that evaluate to 12.
std::vector<FormulaTokens> find_all_correct_formulas_12(std::span<const int> values);

bool is_solvable(std::span<const int> values);
bool is_solvable_12(std::span<const int> values);

// Whether some continuation of `partial` (appending the unused values, the
// puzzle's operators and, if allowed, parentheses) yields a complete formula
// that uses every value exactly once and hits the target. Throws
// MalformedExpression when the prefix can never be made well-formed.
bool completable(std::span<const int> values, const FormulaTokens& partial,
                 const Puzzle& puzzle = Puzzle::points24());

// Every value reachable by some expression using exactly the given multiset.
std::vector<Rational> reachable_values(std::span<const int> values, const Puzzle& puzzle);

}  // namespace gtr::solver
