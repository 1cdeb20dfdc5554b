#pragma once

// Reference implementations used only by tests. They share no code with the
// library: fractions are plain int64 pairs, search is naive.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Frac {
  std::int64_t n = 0, d = 1;
};

inline Frac norm(std::int64_t n, std::int64_t d) {
  if (d < 0) n = -n, d = -d;
  const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  return {n / (g ? g : 1), d / (g ? g : 1)};
}

// Pairwise reduction: pick two numbers, replace with a op b, recurse.
inline bool reaches(std::vector<Frac> xs, std::int64_t target, bool only_add_sub = false) {
  if (xs.size() == 1) return xs[0].d == 1 && xs[0].n == target;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      std::vector<Frac> rest;
      for (std::size_t k = 0; k < xs.size(); ++k)
        if (k != i && k != j) rest.push_back(xs[k]);
      const Frac a = xs[i], b = xs[j];
      std::vector<Frac> cand = {norm(a.n * b.d + b.n * a.d, a.d * b.d),
                                norm(a.n * b.d - b.n * a.d, a.d * b.d)};
      if (!only_add_sub) {
        cand.push_back(norm(a.n * b.n, a.d * b.d));
        if (b.n != 0) cand.push_back(norm(a.n * b.d, a.d * b.n));
      }
      for (const Frac& c : cand) {
        auto next = rest;
        next.push_back(c);
        if (reaches(next, target, only_add_sub)) return true;
      }
    }
  return false;
}

inline bool solvable24(const std::vector<int>& v) {
  std::vector<Frac> xs;
  for (int x : v) xs.push_back({x, 1});
  return reaches(xs, 24);
}

// Recursive-descent evaluator over a token list, independent of the library.
struct Eval {
  const std::vector<std::string>& t;
  std::size_t i = 0;
  bool ok = true;
  Frac expr() {
    Frac a = term();
    while (ok && i < t.size() && (t[i] == "+" || t[i] == "-")) {
      const bool add = t[i++] == "+";
      const Frac b = term();
      a = norm(add ? a.n * b.d + b.n * a.d : a.n * b.d - b.n * a.d, a.d * b.d);
    }
    return a;
  }
  Frac term() {
    Frac a = atom();
    while (ok && i < t.size() && (t[i] == "*" || t[i] == "/")) {
      const bool mul = t[i++] == "*";
      const Frac b = atom();
      if (!mul && b.n == 0) {
        ok = false;
        return a;
      }
      a = mul ? norm(a.n * b.n, a.d * b.d) : norm(a.n * b.d, a.d * b.n);
    }
    return a;
  }
  Frac atom() {
    if (i >= t.size()) {
      ok = false;
      return {};
    }
    if (t[i] == "(") {
      ++i;
      const Frac v = expr();
      if (i >= t.size() || t[i] != ")") ok = false;
      ++i;
      return v;
    }
    try {
      return {std::stoll(t[i++]), 1};
    } catch (...) {
      ok = false;
      return {};
    }
  }
};

inline bool evaluates_to(const std::vector<std::string>& tokens, std::int64_t target) {
  Eval e{tokens};
  const Frac v = e.expr();
  return e.ok && e.i == tokens.size() && v.d == 1 && v.n == target;
}

// A_t = sum_l (gamma lambda)^l delta_{t+l}, with the product of (1 - done)
// factors cutting the sum at episode ends.
inline std::vector<double> gae_nested(const std::vector<double>& r, const std::vector<double>& v,
                                      const std::vector<bool>& done, double gamma, double lam) {
  const std::size_t n = r.size();
  std::vector<double> delta(n), adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = (t + 1 < n && !done[t]) ? v[t + 1] : 0.0;
    delta[t] = r[t] + gamma * next - v[t];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double coef = 1.0;
    for (std::size_t l = t; l < n; ++l) {
      adv[t] += coef * delta[l];
      if (done[l]) break;
      coef *= gamma * lam;
    }
  }
  return adv;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

}  // namespace oracle
