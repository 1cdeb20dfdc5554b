#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gtr/errors.hpp"
#include "gtr/losses.hpp"
#include "oracles.hpp"

using namespace gtr;
using namespace gtr::train;
using gtr::policy::Params;

namespace {

struct Trajectory {
  std::vector<double> r, v;
  std::vector<bool> done;
};

Trajectory random_trajectory(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    t.r.push_back(rng.normal(0.0, 1.0));
    t.v.push_back(rng.normal(0.0, 1.0));
    t.done.push_back(rng.uniform01() < 0.2);
  }
  return t;
}

// Two samples over one observation; the policy is random on every touched row.
struct Batch {
  envs::Observation obs = fixture::points24_obs();
  std::vector<policy::FeatureKey> feats = policy::encode_observation(obs);
  std::vector<TokenId> thought = fixture::tokens_of("thought: cards 2 3 4 1 ; formula none ; next 2");
  std::vector<TokenId> action = fixture::tokens_of("action: 2");
  std::vector<TokenId> thought2 = fixture::tokens_of("thought: next 3");
  std::vector<TokenId> action2 = fixture::tokens_of("action: 3");
  std::vector<TokenId> sft = fixture::tokens_of("thought: cards 2 3 4 1 ; formula 2 * 3 * 4 * 1 ; next 2 action:");
};

}  // namespace

TEST_CASE("GAE matches the nested sum") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = random_trajectory(s, 40);
    for (double lam : {0.0, 0.5, 0.95, 1.0}) {
      const auto got = compute_gae(t.r, t.v, t.done, 0.9, lam);
      const auto want = oracle::gae_nested(t.r, t.v, t.done, 0.9, lam);
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(std::abs(got.advantages[i] - want[i]) < 1e-9);
        CHECK(got.returns[i] == doctest::Approx(want[i] + t.v[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("GAE limits") {
  const auto t = random_trajectory(5, 30);
  const double g = 0.9;
  const auto td = compute_gae(t.r, t.v, t.done, g, 0.0);
  const auto mc = compute_gae(t.r, t.v, t.done, g, 1.0);
  for (std::size_t i = 0; i < t.r.size(); ++i) {
    const double next = (i + 1 < t.r.size() && !t.done[i]) ? t.v[i + 1] : 0.0;
    CHECK(std::abs(td.advantages[i] - (t.r[i] + g * next - t.v[i])) < 1e-12);
    double ret = 0.0, disc = 1.0;
    for (std::size_t l = i; l < t.r.size(); ++l) {
      ret += disc * t.r[l];
      disc *= g;
      if (t.done[l]) break;
    }
    CHECK(std::abs(mc.returns[i] - ret) < 1e-9);
  }
}

TEST_CASE("GAE cuts bootstrap from the successor value") {
  const std::vector<double> r{1.0, 2.0, 3.0}, v{0.5, 0.25, 0.125}, next{0.25, 7.0, 0.0};
  const auto out = compute_gae(r, v, next, {false, false, true}, {false, true, false}, 0.9, 0.95);
  CHECK(out.advantages[2] == doctest::Approx(3.0 - 0.125));
  CHECK(out.advantages[1] == doctest::Approx(2.0 + 0.9 * 7.0 - 0.25));
  CHECK(out.advantages[0] == doctest::Approx(1.0 + 0.9 * 0.25 - 0.5 + 0.9 * 0.95 * out.advantages[1]));
  CHECK_THROWS_AS(compute_gae(r, v, {0.0}, {false}, {false}, 0.9, 0.9), LengthMismatch);
}

TEST_CASE("clipped surrogate") {
  CHECK(clipped_surrogate(1.05, 2.0, 0.1).value == doctest::Approx(2.1));
  CHECK(clipped_surrogate(1.05, 2.0, 0.1).d_ratio == 2.0);
  const auto hi = clipped_surrogate(1.5, 2.0, 0.1);
  CHECK(hi.value == doctest::Approx(2.2));
  CHECK(hi.d_ratio == 0.0);
  const auto lo = clipped_surrogate(0.5, -1.0, 0.1);
  CHECK(lo.value == doctest::Approx(-0.9));
  CHECK(lo.d_ratio == 0.0);
  // Pessimistic side stays unclipped.
  CHECK(clipped_surrogate(0.5, 1.0, 0.1).d_ratio == 1.0);
  CHECK(clipped_surrogate(1.5, -1.0, 0.1).d_ratio == -1.0);
}

TEST_CASE("PPO and SFT gradients match finite differences") {
  Batch b;
  auto all = b.thought;
  all.insert(all.end(), b.action.begin(), b.action.end());
  all.insert(all.end(), b.sft.begin(), b.sft.end());
  auto pol = fixture::random_policy(b.obs, all);
  TrainerConfig cfg;
  cfg.entropy_coef = 0.05;
  cfg.thought_coef = 0.5;
  const double lp1 = pol.sequence_logprob(b.obs, b.thought, b.action, cfg.thought_coef);
  const double lp2 = pol.sequence_logprob(b.obs, b.thought2, b.action2, cfg.thought_coef);
  // Ratios stay inside the clip range so the gradient is nonzero.
  const std::vector<PpoSample> batch{{&b.feats, &b.thought, &b.action, lp1 - 0.03, 1.3, 0.4},
                                     {&b.feats, &b.thought2, &b.action2, lp2 + 0.02, -0.7, -0.2}};
  const std::vector<SftSample> demo{{&b.feats, &b.sft}};
  for (Mode m : {Mode::gtr, Mode::rl4vlm, Mode::sft_only}) {
    for (bool full : {true, false}) {
      cfg.entropy_full_sequence = full;
      Params g = Params::zeros_like(pol.params());
      combined_loss(m, pol, batch, demo, cfg, &g);
      const double err = fixture::finite_difference_error(
          pol, g, [&] { return combined_loss(m, pol, batch, demo, cfg, nullptr); });
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("saturated ratio contributes no policy gradient") {
  Batch b;
  auto pol = fixture::random_policy(b.obs, b.thought);
  TrainerConfig cfg;
  cfg.entropy_coef = 0.0;
  cfg.value_coef = 0.0;
  const double lp = pol.sequence_logprob(b.obs, b.thought, b.action, cfg.thought_coef);
  const std::vector<PpoSample> batch{{&b.feats, &b.thought, &b.action, lp - 1.0, 1.0, 0.0}};
  Params g = Params::zeros_like(pol.params());
  const auto parts = ppo_loss(pol, batch, cfg, &g);
  CHECK(parts.max_ratio > 1.1);
  CHECK(g.dot(g) == 0.0);
}

TEST_CASE("combined loss decomposes by mode") {
  Batch b;
  auto pol = fixture::random_policy(b.obs, b.sft);
  TrainerConfig cfg;
  const double lp = pol.sequence_logprob(b.obs, b.thought, b.action, cfg.thought_coef);
  const std::vector<PpoSample> batch{{&b.feats, &b.thought, &b.action, lp, 0.8, 0.1}};
  const std::vector<SftSample> demo{{&b.feats, &b.sft}};
  const double ppo = ppo_loss(pol, batch, cfg, nullptr).total;
  const double sft = sft_loss(pol, demo, nullptr);
  CHECK(std::abs(combined_loss(Mode::gtr, pol, batch, demo, cfg, nullptr) - (ppo + sft)) < 1e-12);
  CHECK(combined_loss(Mode::rl4vlm, pol, batch, demo, cfg, nullptr) == ppo);
  CHECK(combined_loss(Mode::sft_only, pol, batch, demo, cfg, nullptr) == sft);

  Params g_gtr = Params::zeros_like(pol.params()), g_ppo = g_gtr, g_sft = g_gtr;
  combined_loss(Mode::gtr, pol, batch, demo, cfg, &g_gtr);
  ppo_loss(pol, batch, cfg, &g_ppo);
  sft_loss(pol, demo, &g_sft);
  g_ppo.add_scaled(g_sft, 1.0);
  g_ppo.add_scaled(g_gtr, -1.0);
  CHECK(std::sqrt(g_ppo.dot(g_ppo)) < 1e-12);
}

TEST_CASE("gradient accumulation is linear") {
  Batch b;
  auto pol = fixture::random_policy(b.obs, b.sft);
  const std::vector<SftSample> one{{&b.feats, &b.sft}};
  Params once = Params::zeros_like(pol.params()), twice = once;
  sft_loss(pol, one, &once);
  sft_loss(pol, one, &twice);
  sft_loss(pol, one, &twice);
  once.scale(2.0);
  once.add_scaled(twice, -1.0);
  CHECK(std::sqrt(once.dot(once)) < 1e-12);
}

TEST_CASE("SFT loss of a uniform policy is log |V|") {
  policy::PolicyConfig cfg;
  cfg.init_scale = 0.0;
  const policy::Policy pol(cfg, Vocab::global(), 0);
  Batch b;
  const std::vector<SftSample> demo{{&b.feats, &b.sft}, {&b.feats, &b.thought}};
  CHECK(sft_loss(pol, demo, nullptr) ==
        doctest::Approx(std::log(static_cast<double>(Vocab::global().size()))).epsilon(1e-12));
}

TEST_CASE("PPO ratio overflow is reported") {
  Batch b;
  auto pol = fixture::random_policy(b.obs, b.thought);
  TrainerConfig cfg;
  const std::vector<PpoSample> batch{{&b.feats, &b.thought, &b.action, -1e6, 1.0, 0.0}};
  CHECK_THROWS_AS(ppo_loss(pol, batch, cfg, nullptr), NonFiniteLoss);
}

TEST_CASE("cosine schedule") {
  LrSchedule lr{1.0, 0.1, 10};
  CHECK(lr.at(0) == doctest::Approx(1.0));
  CHECK(lr.at(5) == doctest::Approx(0.55));
  CHECK(lr.at(10) == doctest::Approx(0.1));
  CHECK(lr.at(50) == doctest::Approx(0.1));
}
