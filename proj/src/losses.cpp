#include "gtr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "gtr/errors.hpp"

namespace gtr::train {

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<bool>& dones, double gamma, double gae_lambda) {
  std::vector<double> next(values.size(), 0.0);
  for (std::size_t t = 0; t + 1 < values.size(); ++t) next[t] = values[t + 1];
  return compute_gae(rewards, values, next, dones, std::vector<bool>(values.size(), false), gamma,
                     gae_lambda);
}

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      const std::vector<double>& next_values, const std::vector<bool>& dones,
                      const std::vector<bool>& cuts, double gamma, double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n || cuts.size() != n)
    throw LengthMismatch("compute_gae: input arrays differ in length");
  GaeResult r;
  r.advantages.assign(n, 0.0);
  r.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_values[i] * live - values[i];
    const double carry = (dones[i] || cuts[i]) ? 0.0 : next_adv;
    next_adv = delta + gamma * gae_lambda * carry;
    r.advantages[i] = next_adv;
    r.returns[i] = next_adv + values[i];
  }
  return r;
}

Surrogate clipped_surrogate(double ratio, double advantage, double clip_c) {
  const double lo = 1.0 - clip_c, hi = 1.0 + clip_c;
  const double unclipped = ratio * advantage;
  const double clipped = std::clamp(ratio, lo, hi) * advantage;
  if (unclipped <= clipped) return {unclipped, advantage};
  // The clipped branch is active: constant in r.
  return {clipped, 0.0};
}

LossParts ppo_loss(const policy::Policy& pol, const std::vector<PpoSample>& batch,
                   const TrainerConfig& cfg, policy::Params* grad) {
  LossParts out;
  if (batch.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<TokenId> seq;
  std::vector<double> lp, ent;
  for (const auto& s : batch) {
    seq = *s.thought;
    seq.insert(seq.end(), s.action->begin(), s.action->end());
    const std::size_t nt = s.thought->size();

    policy::SequenceObjective probe;
    pol.evaluate(*s.features, seq, probe, nullptr, 1.0, &lp, &ent);
    const double logp_new = policy::combine_logprobs(lp, nt, cfg.thought_coef);
    const double ratio = std::exp(logp_new - s.logprob_old);
    if (!std::isfinite(ratio)) throw NonFiniteLoss("PPO ratio overflow");
    out.max_ratio = std::max(out.max_ratio, ratio);
    const Surrogate sur = clipped_surrogate(ratio, s.advantage, cfg.clip_c);

    const std::size_t ent_begin = cfg.entropy_full_sequence ? 0 : nt;
    const std::size_t ent_count = seq.size() - std::min(ent_begin, seq.size());
    double H = 0.0;
    for (std::size_t i = ent_begin; i < seq.size(); ++i) H += ent[i];
    if (ent_count > 0) H /= static_cast<double>(ent_count);

    const double v = pol.value(*s.features);
    const double verr = v - s.return_target;

    out.policy += -sur.value * inv_n;
    out.value += cfg.value_coef * verr * verr * inv_n;
    out.entropy += H * inv_n;

    if (grad) {
      // d(-sur)/dlogp = -d_ratio * ratio
      const double g = -sur.d_ratio * ratio * inv_n;
      policy::SequenceObjective obj;
      obj.logp_coef.assign(seq.size(), g);
      for (std::size_t i = 0; i < nt; ++i) obj.logp_coef[i] = g * cfg.thought_coef;
      obj.ent_coef.assign(seq.size(), 0.0);
      if (ent_count > 0)
        for (std::size_t i = ent_begin; i < seq.size(); ++i)
          obj.ent_coef[i] = -cfg.entropy_coef * inv_n / static_cast<double>(ent_count);
      pol.evaluate(*s.features, seq, obj, grad);
      pol.add_value_grad(*s.features, 2.0 * cfg.value_coef * verr * inv_n, *grad);
    }
  }
  out.total = out.policy + out.value - cfg.entropy_coef * out.entropy;
  if (!std::isfinite(out.total)) throw NonFiniteLoss("PPO loss is not finite");
  return out;
}

double sft_loss(const policy::Policy& pol, const std::vector<SftSample>& batch, policy::Params* grad) {
  std::size_t n_tok = 0;
  for (const auto& s : batch) n_tok += s.tokens->size();
  if (n_tok == 0) return 0.0;
  const double w = -1.0 / static_cast<double>(n_tok);
  double J = 0.0;
  for (const auto& s : batch) {
    policy::SequenceObjective obj;
    obj.logp_coef.assign(s.tokens->size(), w);
    J += pol.evaluate(*s.features, *s.tokens, obj, grad);
  }
  if (!std::isfinite(J)) throw NonFiniteLoss("SFT loss is not finite");
  return J;
}

double combined_loss(Mode mode, const policy::Policy& pol, const std::vector<PpoSample>& b,
                     const std::vector<SftSample>& d, const TrainerConfig& cfg, policy::Params* grad) {
  double total = 0.0;
  if (mode != Mode::sft_only) total += ppo_loss(pol, b, cfg, grad).total;
  if (mode != Mode::rl4vlm) total += sft_loss(pol, d, grad);
  return total;
}

}  // namespace gtr::train
