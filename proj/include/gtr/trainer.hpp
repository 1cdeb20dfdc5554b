#pragma once

// Outer training loop: collect on-policy rollouts, label thoughts with the
// corrector, aggregate the thought dataset and update with PPO + thought
// cloning.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtr/config.hpp"
#include "gtr/corrector.hpp"
#include "gtr/envs.hpp"
#include "gtr/losses.hpp"
#include "gtr/policy.hpp"

namespace gtr::train {

struct Transition {
  std::uint64_t episode_id = 0;
  int step = 0;
  int snapshot = 0;  // iteration whose parameters generated it
  envs::Observation obs;
  std::vector<policy::FeatureKey> features;
  std::vector<TokenId> thought;
  std::vector<TokenId> action;
  std::string extracted_action;
  double logprob_old = 0.0;
  double value_old = 0.0;
  double next_value = 0.0;  // V(s_T) when truncated, else unused
  double reward = 0.0;      // environment + format reward
  bool done = false;
  bool truncated = false;
  bool format_valid = false;
  double advantage = 0.0;
  double return_target = 0.0;
  double thought_entropy = 0.0;  // summed over thought tokens
};

struct ThoughtRecord {
  envs::Observation obs;
  std::vector<policy::FeatureKey> features;
  std::vector<TokenId> tokens;  // corrected thought + "action:"
  int iteration = 0;

  json to_json(const Vocab& vocab) const;
  static ThoughtRecord from_json(const json& j, const Vocab& vocab);
};

struct EpisodeSummary {
  std::uint64_t episode_id = 0;
  double ret = 0.0;
  double disc_ret = 0.0;
  int length = 0;
  bool success = false;
  bool truncated = false;
  int format_valid_steps = 0;
  std::vector<std::string> thoughts;  // decoded, one per step
  double thought_entropy = 0.0;
  int thought_tokens = 0;
};

struct MetricsRow {
  long env_step = 0;
  long episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double disc_return = 0.0;
  double ep_len = 0.0;
  double format_rate = 0.0;
  double thought_diversity = 0.0;
  double token_entropy = 0.0;
  double lr = 0.0;
  std::string mode;
  std::uint64_t seed = 0;

  static std::string csv_header();
  std::string csv() const;
};

// Thought diversity: distinct thoughts / thoughts emitted in the window.
MetricsRow summarize(const std::vector<EpisodeSummary>& window, double gamma_unused = 0.9);

struct CorrectionLog {
  std::uint64_t episode_id = 0;
  int step = 0;
  corrector::CorrectionResponse response;
  double latency_ms = 0.0;
  json to_json(envs::Task task) const;
};

std::unique_ptr<envs::Env> make_env(envs::Task task);

// A synthetic "thought ... action ..." sequence with true state slots and a
// random legal next step; used for the format warm start.
std::vector<TokenId> format_demonstration(const envs::Env& env, const envs::Observation& obs,
                                          const Vocab& vocab, Rng& rng);

// The corrector's canonical thought for the state (what it would emit for an
// empty thought with no episode target).
std::vector<TokenId> canonical_thought(const envs::Env& env, const envs::Observation& obs,
                                       const Vocab& vocab);

// Fraction of `n` seeded states where the greedy thought equals the canonical one.
double sft_agreement(const policy::Policy& pol, envs::Task task, int n, std::uint64_t seed);

struct EvalReport {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_disc_return = 0.0;
  double format_rate = 0.0;
  double thought_diversity = 0.0;
  json to_json() const;
};

// Greedy episodes without learning or correction.
EvalReport evaluate_policy(const policy::Policy& pol, envs::Task task, int episodes,
                           std::uint64_t seed, const policy::GenerationConfig& gen,
                           double gamma = 0.9, bool truncation = false);

class Trainer {
 public:
  explicit Trainer(RunConfig cfg, std::unique_ptr<corrector::Corrector> corr = nullptr);

  const RunConfig& config() const { return cfg_; }
  policy::Policy& policy() { return *policy_; }
  const policy::Policy& policy() const { return *policy_; }
  const std::vector<Transition>& buffer() const { return buffer_; }
  const std::vector<ThoughtRecord>& dataset() const { return dataset_; }
  const std::vector<EpisodeSummary>& episodes() const { return episodes_; }
  const std::vector<CorrectionLog>& last_corrections() const { return corrections_; }
  long env_steps() const { return env_steps_; }
  int iteration() const { return iteration_; }
  bool finished() const { return env_steps_ >= cfg_.trainer.total_env_steps; }

  // Supervised format warm start (before the first iteration).
  void warmup();

  // Algorithm 1, lines 6-16. Returns the number of new thought records.
  std::size_t collect_rollouts();
  // Lines 17-20 with the learning rate of the current iteration.
  void update();
  // collect + update + advance the iteration counter.
  void iterate();

  MetricsRow metrics() const;
  double current_lr() const { return cfg_.trainer.lr.at(iteration_); }

  // Resume support.
  void restore(policy::Params params, long env_steps, int iteration, long episodes_started,
               std::vector<ThoughtRecord> dataset);
  long episodes_started() const { return next_episode_; }

 private:
  void apply_gradient(const policy::Params& g, double lr);
  void compute_advantages();

  RunConfig cfg_;
  std::unique_ptr<policy::Policy> policy_;
  std::unique_ptr<corrector::Corrector> corrector_;
  std::unique_ptr<envs::Env> env_;
  std::vector<Transition> buffer_;
  std::vector<ThoughtRecord> dataset_;
  std::vector<EpisodeSummary> episodes_;
  std::vector<CorrectionLog> corrections_;
  long env_steps_ = 0;
  int iteration_ = 0;
  long next_episode_ = 0;
  long adam_t_ = 0;
  policy::Params adam_m_, adam_v_;
};

}  // namespace gtr::train
