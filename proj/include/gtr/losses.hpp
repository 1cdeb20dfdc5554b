#pragma once

// GAE, the clipped PPO objective on Eq. 2 log-likelihoods and the thought
// cloning loss. Losses return their value and add their gradient into `grad`.

#include <vector>

#include "gtr/config.hpp"
#include "gtr/features.hpp"
#include "gtr/policy.hpp"

namespace gtr::train {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// V_{t+1} is values[t+1], or 0 past the end.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma, double gae_lambda);

// Variant with an explicit successor value per step and episode cuts:
// cut_t ends the recursion at t without zeroing next_values[t] (truncation
// bootstraps with V(s_T)).
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<double>& next_values, const std::vector<bool>& dones,
                      const std::vector<bool>& cuts, double gamma, double gae_lambda);

// min(r A, clip(r, 1-c, 1+c) A) and its derivative with respect to r.
struct Surrogate {
  double value;
  double d_ratio;
};
Surrogate clipped_surrogate(double ratio, double advantage, double clip_c);

// One sample for the PPO loss.
struct PpoSample {
  const std::vector<policy::FeatureKey>* features;
  const std::vector<TokenId>* thought;
  const std::vector<TokenId>* action;
  double logprob_old;
  double advantage;
  double return_target;
};

struct LossParts {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double max_ratio = 1.0;
};

// Mean over the batch of
//   -min(r A, clip(r) A) + value_coef (V - R)^2 - entropy_coef H
// with r = exp(logp_new - logp_old), logp per Eq. 2, H the mean per-token
// entropy over the full sequence (or the action tokens only).
LossParts ppo_loss(const policy::Policy& pol, const std::vector<PpoSample>& batch,
                   const TrainerConfig& cfg, policy::Params* grad);

struct SftSample {
  const std::vector<policy::FeatureKey>* features;
  const std::vector<TokenId>* tokens;  // corrected thought followed by "action:"
};

// Mean per-token negative log-likelihood over all tokens in the batch.
double sft_loss(const policy::Policy& pol, const std::vector<SftSample>& batch, policy::Params* grad);

// Eq. 5 by mode: gtr = ppo + sft, rl4vlm = ppo, sft_only = sft.
double combined_loss(Mode mode, const policy::Policy& pol, const std::vector<PpoSample>& b,
                     const std::vector<SftSample>& d, const TrainerConfig& cfg, policy::Params* grad);

}  // namespace gtr::train
