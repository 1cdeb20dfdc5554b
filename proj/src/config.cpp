#include "gtr/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "gtr/errors.hpp"

namespace gtr::train {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::gtr: return "gtr";
    case Mode::rl4vlm: return "rl4vlm";
    case Mode::sft_only: return "sft_only";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "gtr") return Mode::gtr;
  if (s == "rl4vlm") return Mode::rl4vlm;
  if (s == "sft_only") return Mode::sft_only;
  throw ConfigError("unknown mode '" + s + "' (expected gtr, rl4vlm or sft_only)");
}

double LrSchedule::at(int step) const {
  if (max_step <= 0) return final;
  const double t = static_cast<double>(std::min(std::max(step, 0), max_step)) / max_step;
  return final + 0.5 * (initial - final) * (1.0 + std::cos(std::numbers::pi * t));
}

void TrainerConfig::validate() const {
  if (!(gamma > 0 && gamma <= 1)) throw ConfigError("trainer.gamma must be in (0, 1]");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw ConfigError("trainer.gae_lambda must be in [0, 1]");
  if (!(clip_c > 0 && clip_c < 1)) throw ConfigError("trainer.clip_c must be in (0, 1)");
  if (ppo_epochs < 1) throw ConfigError("trainer.ppo_epochs must be >= 1");
  if (grad_accum_steps < 1) throw ConfigError("trainer.grad_accum_steps must be >= 1");
  if (buffer_size < 1) throw ConfigError("trainer.buffer_size must be >= 1");
  if (minibatch_size < 1) throw ConfigError("trainer.minibatch_size must be >= 1");
  if (dagger_batch < 1) throw ConfigError("trainer.dagger_batch must be >= 1");
  if (thought_coef < 0) throw ConfigError("trainer.thought_coef must be >= 0");
  if (total_env_steps < 1) throw ConfigError("trainer.total_env_steps must be >= 1");
  if (metrics_window < 1) throw ConfigError("trainer.metrics_window must be >= 1");
  if (!(lr.initial > 0) || !(lr.final > 0)) throw ConfigError("trainer.lr values must be > 0");
  if (entropy_coef < 0 || value_coef < 0) throw ConfigError("trainer loss coefficients must be >= 0");
}

json TrainerConfig::to_json() const {
  return {{"gamma", gamma},
          {"gae_lambda", gae_lambda},
          {"clip_c", clip_c},
          {"entropy_coef", entropy_coef},
          {"value_coef", value_coef},
          {"ppo_epochs", ppo_epochs},
          {"grad_accum_steps", grad_accum_steps},
          {"buffer_size", buffer_size},
          {"minibatch_size", minibatch_size},
          {"dagger_batch", dagger_batch},
          {"thought_coef", thought_coef},
          {"lr", {{"initial", lr.initial}, {"final", lr.final}, {"max_step", lr.max_step}}},
          {"total_env_steps", total_env_steps},
          {"mode", to_string(mode)},
          {"truncation", truncation ? json(*truncation) : json(nullptr)},
          {"truncation_bootstrap", truncation_bootstrap},
          {"format_reward_value", format_reward_value},
          {"normalize_advantages", normalize_advantages},
          {"entropy_full_sequence", entropy_full_sequence},
          {"dagger_aggregate", dagger_aggregate},
          {"optimizer", optimizer == OptimizerKind::sgd ? "sgd" : "adam"},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_eps", adam_eps},
          {"max_grad_norm", max_grad_norm},
          {"metrics_window", metrics_window},
          {"checkpoint_every", checkpoint_every}};
}

TrainerConfig TrainerConfig::from_json(const json& j, TrainerConfig c) {
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "gamma") c.gamma = v.get<double>();
      else if (k == "gae_lambda") c.gae_lambda = v.get<double>();
      else if (k == "clip_c") c.clip_c = v.get<double>();
      else if (k == "entropy_coef") c.entropy_coef = v.get<double>();
      else if (k == "value_coef") c.value_coef = v.get<double>();
      else if (k == "ppo_epochs") c.ppo_epochs = v.get<int>();
      else if (k == "grad_accum_steps") c.grad_accum_steps = v.get<int>();
      else if (k == "buffer_size") c.buffer_size = v.get<int>();
      else if (k == "minibatch_size") c.minibatch_size = v.get<int>();
      else if (k == "dagger_batch") c.dagger_batch = v.get<int>();
      else if (k == "thought_coef") c.thought_coef = v.get<double>();
      else if (k == "lr") {
        for (const auto& [lk, lv] : v.items()) {
          if (lk == "initial") c.lr.initial = lv.get<double>();
          else if (lk == "final") c.lr.final = lv.get<double>();
          else if (lk == "max_step") c.lr.max_step = lv.get<int>();
          else throw ConfigError("trainer.lr: unknown key '" + lk + "'");
        }
      } else if (k == "total_env_steps") c.total_env_steps = v.get<long>();
      else if (k == "mode") c.mode = mode_from_string(v.get<std::string>());
      else if (k == "truncation") {
        if (v.is_null()) c.truncation.reset();
        else c.truncation = v.get<bool>();
      }
      else if (k == "truncation_bootstrap") c.truncation_bootstrap = v.get<bool>();
      else if (k == "format_reward_value") c.format_reward_value = v.get<double>();
      else if (k == "normalize_advantages") c.normalize_advantages = v.get<bool>();
      else if (k == "entropy_full_sequence") c.entropy_full_sequence = v.get<bool>();
      else if (k == "dagger_aggregate") c.dagger_aggregate = v.get<bool>();
      else if (k == "optimizer") {
        const auto s = v.get<std::string>();
        if (s == "sgd") c.optimizer = OptimizerKind::sgd;
        else if (s == "adam") c.optimizer = OptimizerKind::adam;
        else throw ConfigError("trainer.optimizer must be sgd or adam");
      } else if (k == "adam_beta1") c.adam_beta1 = v.get<double>();
      else if (k == "adam_beta2") c.adam_beta2 = v.get<double>();
      else if (k == "adam_eps") c.adam_eps = v.get<double>();
      else if (k == "max_grad_norm") c.max_grad_norm = v.get<double>();
      else if (k == "metrics_window") c.metrics_window = v.get<int>();
      else if (k == "checkpoint_every") c.checkpoint_every = v.get<int>();
      else throw ConfigError("trainer: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("trainer: ") + e.what());
  }
  c.validate();
  return c;
}

json WarmupConfig::to_json() const { return {{"steps", steps}, {"batch", batch}, {"lr", lr}}; }

WarmupConfig WarmupConfig::from_json(const json& j) {
  WarmupConfig w;
  for (const auto& [k, v] : j.items()) {
    if (k == "steps") w.steps = v.get<int>();
    else if (k == "batch") w.batch = v.get<int>();
    else if (k == "lr") w.lr = v.get<double>();
    else throw ConfigError("warmup: unknown key '" + k + "'");
  }
  if (w.steps < 0 || w.batch < 1 || !(w.lr > 0)) throw ConfigError("warmup: invalid values");
  return w;
}

json CorrectorConfig::to_json() const {
  json j = {{"kind", remote ? "remote" : "oracle"}};
  if (remote) j["endpoint"] = endpoint.to_json();
  return j;
}

CorrectorConfig CorrectorConfig::from_json(const json& j) {
  CorrectorConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "kind") {
      const auto s = v.get<std::string>();
      if (s != "oracle" && s != "remote") throw ConfigError("corrector.kind must be oracle or remote");
      c.remote = s == "remote";
    } else if (k == "endpoint") {
      c.endpoint = corrector::CorrectorEndpoint::from_json(v);
    } else {
      throw ConfigError("corrector: unknown key '" + k + "'");
    }
  }
  return c;
}

TrainerConfig task_defaults(envs::Task task) {
  TrainerConfig c;
  if (task == envs::Task::miniworld) {
    c.thought_coef = 0.2;
    c.total_env_steps = 5000;
  }
  return c;
}

void RunConfig::validate() const {
  trainer.validate();
  generation.validate();
  if (corrector.remote) corrector.endpoint.validate();
}

json RunConfig::to_json() const {
  return {{"task", envs::to_string(task)},   {"mode", to_string(trainer.mode)},
          {"seed", seed},                    {"output_dir", output_dir},
          {"trainer", trainer.to_json()},    {"generation", generation.to_json()},
          {"policy", policy.to_json()},      {"warmup", warmup.to_json()},
          {"corrector", corrector.to_json()}};
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("task")) c.task = envs::task_from_string(j.at("task").get<std::string>());
    c.trainer = task_defaults(c.task);
    for (const auto& [k, v] : j.items()) {
      if (k == "task") continue;
      if (k == "mode") c.trainer.mode = mode_from_string(v.get<std::string>());
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "output_dir") c.output_dir = v.get<std::string>();
      else if (k == "trainer") {
        const Mode keep = c.trainer.mode;
        c.trainer = TrainerConfig::from_json(v, c.trainer);
        if (j.contains("mode") && !v.contains("mode")) c.trainer.mode = keep;
      } else if (k == "generation") c.generation = policy::GenerationConfig::from_json(v);
      else if (k == "policy") c.policy = policy::PolicyConfig::from_json(v);
      else if (k == "warmup") c.warmup = WarmupConfig::from_json(v);
      else if (k == "corrector") c.corrector = CorrectorConfig::from_json(v);
      else throw ConfigError("unknown config key '" + k + "'");
    }
    if (j.contains("mode") && j.contains("trainer") && j.at("trainer").contains("mode") &&
        j.at("mode") != j.at("trainer").at("mode"))
      throw ConfigError("config: 'mode' and 'trainer.mode' disagree");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace gtr::train
