#pragma once

// Shared setup for policy and loss tests.

#include <algorithm>
#include <cmath>

#include "gtr/card_envs.hpp"
#include "gtr/policy.hpp"
#include "gtr/thought.hpp"

namespace fixture {

using namespace gtr;

inline envs::Observation points24_obs(std::uint64_t seed = 3) {
  auto env = envs::make_points24();
  return env->reset(seed);
}

inline std::vector<TokenId> tokens_of(const std::string& text) {
  return Vocab::global().encode(text);
}

// Policy whose W rows touched by `obs` and `seq` hold random values, so every
// parameter block contributes to the objective.
inline policy::Policy random_policy(const envs::Observation& obs, const std::vector<TokenId>& seq,
                                    std::uint64_t seed = 11) {
  policy::PolicyConfig cfg;
  cfg.hash_bits = 16;
  cfg.embed_dim = 4;
  cfg.init_scale = 0.3;
  policy::Policy pol(cfg, Vocab::global(), seed);
  const auto feats = policy::encode_observation(obs);
  Rng rng(seed + 1);
  std::vector<TokenId> prefix;
  for (std::size_t t = 0; t <= seq.size(); ++t) {
    for (auto k : policy::context_features(Vocab::global(), feats, prefix)) {
      auto& row = pol.params().W[pol.bucket(k)];
      if (row.empty()) {
        row.resize(Vocab::global().size());
        for (double& x : row) x = rng.normal(0.0, 0.5);
      }
    }
    if (t < seq.size()) prefix.push_back(seq[t]);
  }
  pol.params().value_b = 0.3;
  for (auto k : feats) pol.params().value_w[pol.bucket(k)] = rng.normal(0.0, 0.5);
  return pol;
}

// Visits a deterministic sample of scalar parameters: a few entries of every
// W row, a stride of E and every value weight.
template <class F>
void for_sample_params(policy::Params& p, F&& f) {
  for (auto& [b, row] : p.W)
    for (std::size_t v = 0; v < row.size(); v += 37) f(row[v], [&, b = b, v](const policy::Params& g) {
        auto it = g.W.find(b);
        return it == g.W.end() ? 0.0 : it->second[v];
      });
  for (std::size_t i = 0; i < p.E.size(); i += 29)
    f(p.E[i], [i](const policy::Params& g) { return g.E[i]; });
  for (auto& [b, w] : p.value_w) f(w, [b = b](const policy::Params& g) {
      auto it = g.value_w.find(b);
      return it == g.value_w.end() ? 0.0 : it->second;
    });
  f(p.value_b, [](const policy::Params& g) { return g.value_b; });
}

// Central difference over the sampled parameters (every `stride`-th one);
// returns the worst relative error against `grad`.
template <class Obj>
double finite_difference_error(policy::Policy& pol, const policy::Params& grad, Obj&& objective,
                               std::size_t stride = 1, double h = 1e-6) {
  double worst = 0.0;
  std::size_t n = 0;
  for_sample_params(pol.params(), [&](double& x, auto&& read) {
    if (n++ % stride != 0) return;
    const double x0 = x;
    x = x0 + h;
    const double up = objective();
    x = x0 - h;
    const double down = objective();
    x = x0;
    const double fd = (up - down) / (2 * h);
    const double an = read(grad);
    const double scale = std::max({std::abs(fd), std::abs(an), 1e-3});
    worst = std::max(worst, std::abs(fd - an) / scale);
  });
  return worst;
}

inline std::size_t sampled_param_count(policy::Params& p) {
  std::size_t n = 0;
  for_sample_params(p, [&](double&, auto&&) { ++n; });
  return n;
}

}  // namespace fixture
