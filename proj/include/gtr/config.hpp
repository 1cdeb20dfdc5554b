#pragma once

// Run configuration. Every section rejects unknown keys.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "gtr/envs.hpp"
#include "gtr/policy.hpp"
#include "gtr/remote_corrector.hpp"

namespace gtr::train {

using json = nlohmann::json;

enum class Mode { gtr, rl4vlm, sft_only };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

enum class OptimizerKind { sgd, adam };

// Cosine decay from `initial` to `final` over `max_step` outer iterations,
// constant afterwards.
struct LrSchedule {
  double initial = 1e-5;
  double final = 1e-9;
  int max_step = 25;
  double at(int step) const;
};

struct TrainerConfig {
  double gamma = 0.9;
  double gae_lambda = 0.95;
  double clip_c = 0.1;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int ppo_epochs = 4;
  int grad_accum_steps = 128;
  int buffer_size = 512;
  int minibatch_size = 1;   // transitions per micro-batch
  int dagger_batch = 1;     // thought records per micro-batch
  double thought_coef = 0.5;
  LrSchedule lr;
  long total_env_steps = 15000;
  Mode mode = Mode::gtr;
  std::optional<bool> truncation;    // unset: on except in rl4vlm mode
  bool truncation_bootstrap = true;  // false: every truncated step is terminal
  double format_reward_value = 0.1;
  bool normalize_advantages = true;
  bool entropy_full_sequence = true;  // false: action tokens only
  bool dagger_aggregate = true;       // false: keep only the latest iteration's records
  OptimizerKind optimizer = OptimizerKind::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
  int metrics_window = 100;    // episodes
  int checkpoint_every = 0;    // outer iterations; 0: only at the end

  bool truncation_enabled() const { return truncation.value_or(mode != Mode::rl4vlm); }

  void validate() const;
  json to_json() const;
  static TrainerConfig from_json(const json& j) { return from_json(j, TrainerConfig{}); }
  static TrainerConfig from_json(const json& j, TrainerConfig base);
};

// Supervised format warm start on synthetic demonstrations, standing in for
// an instruction-tuned starting model.
struct WarmupConfig {
  int steps = 0;
  int batch = 16;
  double lr = 0.5;

  json to_json() const;
  static WarmupConfig from_json(const json& j);
};

struct CorrectorConfig {
  bool remote = false;
  corrector::CorrectorEndpoint endpoint;

  json to_json() const;
  static CorrectorConfig from_json(const json& j);
};

struct RunConfig {
  envs::Task task = envs::Task::points24;
  TrainerConfig trainer;
  policy::GenerationConfig generation;
  policy::PolicyConfig policy;
  WarmupConfig warmup;
  CorrectorConfig corrector;
  std::string output_dir = "runs/default";
  std::uint64_t seed = 0;

  void validate() const;
  json to_json() const;
  static RunConfig from_json(const json& j);
  static RunConfig load(const std::string& path);
};

// Task defaults from the hyperparameter table (thought coefficient, steps).
TrainerConfig task_defaults(envs::Task task);

}  // namespace gtr::train
