#include <doctest.h>

#include <algorithm>

#include "gtr/errors.hpp"
#include "gtr/solver24.hpp"
#include "oracles.hpp"

using namespace gtr;
using namespace gtr::solver;

TEST_CASE("exact evaluation") {
  CHECK(evaluate_formula(split_formula("8/(3-8/3)")) == Rational(24));
  CHECK(evaluate_formula(split_formula("2+3*4")) == Rational(14));
  CHECK(evaluate_formula(split_formula("(2+3)*4")) == Rational(20));
  CHECK(evaluate_formula(split_formula("10-2-3")) == Rational(5));
  CHECK(evaluate_formula(split_formula("1/3")) == Rational(1, 3));
  CHECK_THROWS_AS(evaluate_formula(split_formula("4/(2-2)")), DivisionByZero);
  CHECK_THROWS_AS(evaluate_formula(split_formula("4+")), MalformedExpression);
  CHECK_THROWS_AS(evaluate_formula(split_formula("(4")), MalformedExpression);
  CHECK_THROWS_AS(split_formula("4^2"), MalformedExpression);
  CHECK_FALSE(try_evaluate(split_formula("4*")).has_value());
}

TEST_CASE("join and split round trip") {
  const FormulaTokens f = {"(", "10", "-", "4", ")", "*", "4"};
  CHECK(join_formula(f) == "(10-4)*4");
  CHECK(split_formula("(10-4)*4") == f);
}

TEST_CASE("face cards count as ten") {
  CHECK(effective_value(11) == 10);
  CHECK(effective_value(13) == 10);
  CHECK(effective_value(7) == 7);
}

TEST_CASE("known hands") {
  const std::vector<int> a = {2, 3, 4, 1};
  const auto sols = find_all_correct_formulas(a);
  const bool has = std::any_of(sols.begin(), sols.end(),
                               [](const FormulaTokens& f) { return join_formula(f) == "2*3*4*1"; });
  CHECK(has);
  CHECK(std::is_sorted(sols.begin(), sols.end()));
  const std::vector<int> ones = {1, 1, 1, 1};
  CHECK(find_all_correct_formulas(ones).empty());
  const std::vector<int> hard = {3, 3, 8, 8};
  CHECK(is_solvable(hard));
}

TEST_CASE("every returned formula re-evaluates to 24 under an independent evaluator") {
  for (const std::vector<int>& v : std::vector<std::vector<int>>{{1, 5, 5, 5}, {4, 4, 10, 10}, {6, 9, 9, 10}}) {
    const auto sols = find_all_correct_formulas(v);
    CHECK_FALSE(sols.empty());
    for (const auto& f : sols) CHECK(oracle::evaluates_to(f, 24));
  }
}

TEST_CASE("solvability matches the pairwise oracle on a sample") {
  for (int a = 1; a <= 10; a += 3)
    for (int b = a; b <= 10; b += 2)
      for (int c = b; c <= 10; c += 3)
        for (int d = c; d <= 10; ++d) {
          const std::vector<int> v = {a, b, c, d};
          CHECK(is_solvable(v) == oracle::solvable24(v));
        }
}

TEST_CASE("12-point variant") {
  const std::vector<int> v = {5, 7};
  const auto sols = find_all_correct_formulas_12(v);
  REQUIRE(sols.size() == 2);
  for (const auto& f : sols) CHECK(evaluate_formula(f) == Rational(12));
  const std::vector<int> w = {1, 1};
  CHECK_FALSE(is_solvable_12(w));
  const std::vector<int> x = {2, 10};
  CHECK(is_solvable_12(x));
}

TEST_CASE("completable prefixes") {
  const std::vector<int> v = {2, 3, 4, 1};
  CHECK(completable(v, {}));
  CHECK(completable(v, {"2", "*"}));
  CHECK(completable(v, {"(", "2"}));
  CHECK_FALSE(completable(v, {"2", "+", "3", "+", "4", "+", "1"}));
  const std::vector<int> ones = {1, 1, 1, 1};
  CHECK_FALSE(completable(ones, {}));
  const std::vector<int> ez = {5, 7};
  CHECK(completable(ez, {"5", "+"}, Puzzle::points12()));
  CHECK_FALSE(completable(ez, {"5", "-"}, Puzzle::points12()));
}

TEST_CASE("reachable values contain the target exactly when solvable") {
  const std::vector<int> v = {3, 3, 8, 8};
  const auto r = reachable_values(v, Puzzle::points24());
  CHECK(std::find(r.begin(), r.end(), Rational(24)) != r.end());
}
