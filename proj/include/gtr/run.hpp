#pragma once

// Run directory driver.
//
//   <out>/config.json         resolved RunConfig
//   <out>/metrics.csv         one row per outer iteration
//   <out>/trajectories.jsonl  one line per transition
//   <out>/corrections.jsonl   one line per corrector call (not in rl4vlm mode)
//   <out>/dataset.jsonl       thought dataset at the latest checkpoint
//   <out>/checkpoints/ckpt_<env_step>.json

#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "gtr/config.hpp"
#include "gtr/trainer.hpp"

namespace gtr::train {

struct RunHooks {
  // Called after every outer iteration; returning false stops the run early
  // (after a checkpoint is written).
  std::function<bool(const Trainer&)> after_iteration;
};

struct RunResult {
  long env_steps = 0;
  int iterations = 0;
  MetricsRow last;
  std::string checkpoint;  // path of the final checkpoint
};

// Trains into cfg.output_dir. With `resume`, continues from the newest
// checkpoint there (a fresh run if none exists).
RunResult train_run(const RunConfig& cfg, bool resume, std::ostream* log = nullptr,
                    const RunHooks& hooks = {});

// Path of the checkpoint with the largest env_step in <dir>/checkpoints.
std::optional<std::string> latest_checkpoint(const std::string& run_dir);

}  // namespace gtr::train
