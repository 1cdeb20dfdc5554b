#include "gtr/run.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtr/checkpoint.hpp"
#include "gtr/errors.hpp"

namespace gtr::train {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << text;
  }
  fs::rename(tmp, path);
}

std::vector<ThoughtRecord> read_dataset(const fs::path& path, const Vocab& vocab) {
  std::vector<ThoughtRecord> out;
  std::ifstream f(path);
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(ThoughtRecord::from_json(json::parse(line), vocab));
  return out;
}

// Keeps the header and the rows up to `env_step`, dropping rows written after
// the checkpoint being resumed.
void trim_metrics(const fs::path& path, long env_step) {
  std::ifstream f(path);
  if (!f) return;
  std::string line, kept;
  bool header = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (header || std::stol(line.substr(0, line.find(','))) <= env_step) kept += line + "\n";
    header = false;
  }
  f.close();
  write_atomic(path, kept);
}

json transition_json(const Transition& t, const Vocab& vocab, int iteration) {
  return {{"iteration", iteration},
          {"episode_id", t.episode_id},
          {"step", t.step},
          {"task", envs::to_string(t.obs.task)},
          {"obs_symbols", t.obs.symbols},
          {"prompt", t.obs.prompt_text},
          {"thought", vocab.decode(t.thought)},
          {"action_tokens", vocab.decode(t.action)},
          {"extracted_action", t.extracted_action},
          {"reward", t.reward},
          {"done", t.done},
          {"truncated", t.truncated},
          {"format_valid", t.format_valid},
          {"logprob_old", t.logprob_old},
          {"value_old", t.value_old},
          {"advantage", t.advantage},
          {"return_target", t.return_target}};
}

std::string checkpoint_path(const fs::path& dir, long env_step) {
  return (dir / "checkpoints" / ("ckpt_" + std::to_string(env_step) + ".json")).string();
}

}  // namespace

std::optional<std::string> latest_checkpoint(const std::string& run_dir) {
  const fs::path dir = fs::path(run_dir) / "checkpoints";
  if (!fs::exists(dir)) return std::nullopt;
  std::optional<std::string> best;
  long best_step = -1;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("ckpt_", 0) != 0 || e.path().extension() != ".json") continue;
    const long step = std::stol(name.substr(5, name.size() - 10));
    if (step > best_step) {
      best_step = step;
      best = e.path().string();
    }
  }
  return best;
}

RunResult train_run(const RunConfig& cfg, bool resume, std::ostream* log, const RunHooks& hooks) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "checkpoints");
  const bool write_corrections = cfg.trainer.mode != Mode::rl4vlm;

  Trainer trainer(cfg);
  const Vocab& vocab = trainer.policy().vocab();
  std::optional<std::string> ckpt = resume ? latest_checkpoint(cfg.output_dir) : std::nullopt;

  std::ios::openmode mode = std::ios::binary | std::ios::trunc;
  if (ckpt) {
    auto c = policy::load_checkpoint(*ckpt, vocab);
    const long env_step = c.meta.at("env_step").get<long>();
    trainer.restore(std::move(c.params), env_step, c.meta.at("iteration").get<int>(),
                    c.meta.at("episodes").get<long>(), read_dataset(dir / "dataset.jsonl", vocab));
    trim_metrics(dir / "metrics.csv", env_step);
    mode = std::ios::binary | std::ios::app;
    if (log) *log << "resuming from " << *ckpt << " at env_step " << env_step << "\n";
  } else {
    trainer.warmup();
    fs::remove(dir / "corrections.jsonl");
    fs::remove(dir / "dataset.jsonl");
  }
  write_atomic(dir / "config.json", cfg.to_json().dump(2) + "\n");

  std::ofstream metrics(dir / "metrics.csv", mode);
  if (!ckpt) metrics << MetricsRow::csv_header() << "\n";
  std::ofstream traj(dir / "trajectories.jsonl", mode);
  std::ofstream corr;
  if (write_corrections) corr.open(dir / "corrections.jsonl", mode);

  RunResult result;
  auto save = [&] {
    std::string text;
    for (const auto& r : trainer.dataset()) text += r.to_json(vocab).dump() + "\n";
    write_atomic(dir / "dataset.jsonl", text);
    const json meta = {{"env_step", trainer.env_steps()},
                       {"iteration", trainer.iteration()},
                       {"episodes", trainer.episodes_started()},
                       {"task", envs::to_string(cfg.task)},
                       {"mode", to_string(cfg.trainer.mode)},
                       {"seed", cfg.seed}};
    result.checkpoint = checkpoint_path(dir, trainer.env_steps());
    policy::save_checkpoint(result.checkpoint, trainer.policy(), meta);
  };

  bool stopped = false;
  while (!trainer.finished() && !stopped) {
    const int it = trainer.iteration();
    trainer.iterate();
    for (const auto& t : trainer.buffer()) traj << transition_json(t, vocab, it).dump() << "\n";
    if (write_corrections)
      for (const auto& c : trainer.last_corrections()) corr << c.to_json(cfg.task).dump() << "\n";
    result.last = trainer.metrics();
    metrics << result.last.csv() << "\n";
    metrics.flush();
    traj.flush();
    if (log)
      *log << "iter " << it << " env_step " << result.last.env_step << " success "
           << result.last.success_rate << " diversity " << result.last.thought_diversity << "\n";
    if (hooks.after_iteration && !hooks.after_iteration(trainer)) stopped = true;
    const int every = cfg.trainer.checkpoint_every;
    if (stopped || trainer.finished() || (every > 0 && trainer.iteration() % every == 0)) save();
  }
  if (result.checkpoint.empty()) save();
  result.env_steps = trainer.env_steps();
  result.iterations = trainer.iteration();
  return result;
}

}  // namespace gtr::train
