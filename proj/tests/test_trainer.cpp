#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtr/checkpoint.hpp"
#include "gtr/errors.hpp"
#include "gtr/run.hpp"
#include "gtr/trainer.hpp"

using namespace gtr;
using namespace gtr::train;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(Mode mode, std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.task = envs::Task::ezpoints;
  cfg.seed = seed;
  cfg.trainer = task_defaults(cfg.task);
  cfg.trainer.mode = mode;
  cfg.trainer.total_env_steps = 192;
  cfg.trainer.buffer_size = 64;
  cfg.trainer.grad_accum_steps = 16;
  cfg.trainer.ppo_epochs = 1;
  cfg.trainer.lr = {0.5, 0.05, 10};
  cfg.trainer.max_grad_norm = 1.0;
  cfg.generation.max_len = 32;
  cfg.warmup.steps = 20;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("gtr_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("rl4vlm collects no thought records") {
  Trainer t(small_config(Mode::rl4vlm));
  t.warmup();
  CHECK(t.collect_rollouts() == 0);
  CHECK(t.dataset().empty());
  CHECK(t.last_corrections().empty());
  CHECK(t.buffer().size() >= 64);
}

TEST_CASE("aggregated dataset only grows") {
  Trainer t(small_config(Mode::gtr));
  t.warmup();
  std::size_t last = 0;
  int iter = 0;
  while (!t.finished()) {
    t.iterate();
    CHECK(t.dataset().size() >= last);
    last = t.dataset().size();
    ++iter;
  }
  CHECK(iter == 3);
  CHECK(last > 0);
  bool seen_first = false, seen_last = false;
  for (const auto& r : t.dataset()) {
    seen_first |= r.iteration == 0;
    seen_last |= r.iteration == 2;
  }
  CHECK(seen_first);
  CHECK(seen_last);
}

TEST_CASE("without aggregation only the latest records are kept") {
  auto cfg = small_config(Mode::gtr);
  cfg.trainer.dagger_aggregate = false;
  Trainer t(cfg);
  t.warmup();
  t.iterate();
  t.iterate();
  for (const auto& r : t.dataset()) CHECK(r.iteration == 1);
}

TEST_CASE("stored log-probs replay under the sampling parameters") {
  Trainer t(small_config(Mode::gtr));
  t.warmup();
  t.collect_rollouts();
  const double lambda = t.config().trainer.thought_coef;
  for (const auto& tr : t.buffer()) {
    const double lp = t.policy().sequence_logprob(tr.obs, tr.thought, tr.action, lambda);
    CHECK(std::abs(lp - tr.logprob_old) < 1e-9);
  }
}

TEST_CASE("advantages follow episode boundaries") {
  Trainer t(small_config(Mode::gtr));
  t.collect_rollouts();
  const auto& b = t.buffer();
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(std::isfinite(b[i].advantage));
    CHECK(b[i].return_target == doctest::Approx(b[i].advantage + b[i].value_old));
    if (i + 1 < b.size() && !b[i].done) CHECK(b[i + 1].episode_id == b[i].episode_id);
  }
}

TEST_CASE("training is deterministic in the seed") {
  auto run = [](std::uint64_t seed) {
    Trainer t(small_config(Mode::gtr, seed));
    t.warmup();
    std::string rows;
    while (!t.finished()) {
      t.iterate();
      rows += t.metrics().csv() + "\n";
    }
    return rows;
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}

TEST_CASE("resume continues to the same parameters") {
  const auto a = scratch("resume_a"), b = scratch("resume_b");
  auto cfg = small_config(Mode::gtr);
  cfg.output_dir = a.string();
  const auto full = train_run(cfg, false);
  CHECK(full.env_steps >= 192);
  CHECK(fs::exists(a / "metrics.csv"));
  CHECK(fs::exists(a / "trajectories.jsonl"));
  CHECK(fs::exists(a / "corrections.jsonl"));
  CHECK(fs::exists(a / "dataset.jsonl"));

  cfg.output_dir = b.string();
  RunHooks stop_after_one;
  stop_after_one.after_iteration = [](const Trainer& t) { return t.iteration() < 1; };
  const auto part = train_run(cfg, false, nullptr, stop_after_one);
  CHECK(part.iterations == 1);
  REQUIRE(latest_checkpoint(b.string()));
  const auto rest = train_run(cfg, true);
  CHECK(rest.env_steps == full.env_steps);

  const auto ca = policy::load_checkpoint(full.checkpoint, Vocab::global());
  const auto cb = policy::load_checkpoint(rest.checkpoint, Vocab::global());
  CHECK(ca.params.E == cb.params.E);
  CHECK(ca.params.W == cb.params.W);
  CHECK(ca.params.value_w == cb.params.value_w);
  CHECK(slurp(a / "dataset.jsonl") == slurp(b / "dataset.jsonl"));

  std::size_t rows = 0;
  std::istringstream csv(slurp(b / "metrics.csv"));
  for (std::string line; std::getline(csv, line);) rows += !line.empty();
  CHECK(rows == 1 + 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("thought records round trip through json") {
  Trainer t(small_config(Mode::gtr));
  t.collect_rollouts();
  REQUIRE_FALSE(t.dataset().empty());
  for (const auto& r : t.dataset()) {
    const auto back = ThoughtRecord::from_json(r.to_json(Vocab::global()), Vocab::global());
    CHECK(back.tokens == r.tokens);
    CHECK(back.features == r.features);
    CHECK(back.iteration == r.iteration);
  }
}

TEST_CASE("config rejects unknown keys and bad values") {
  auto j = small_config(Mode::gtr).to_json();
  CHECK_NOTHROW(RunConfig::from_json(j));
  CHECK(RunConfig::from_json(j).to_json() == j);
  auto bad = j;
  bad["trainer"]["learning_rate"] = 0.1;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  bad = j;
  bad["surprise"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  bad = j;
  bad["trainer"]["mode"] = "ppo";
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  bad = j;
  bad["trainer"]["buffer_size"] = 0;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
}

TEST_CASE("truncation default depends on the mode") {
  CHECK(small_config(Mode::gtr).trainer.truncation_enabled());
  CHECK(small_config(Mode::sft_only).trainer.truncation_enabled());
  CHECK_FALSE(small_config(Mode::rl4vlm).trainer.truncation_enabled());
}

TEST_CASE("metrics summary") {
  std::vector<EpisodeSummary> w(4);
  w[0].success = true;
  w[0].thoughts = {"a", "b"};
  w[1].thoughts = {"a"};
  w[2].thoughts = {"c"};
  w[3].success = true;
  w[3].thoughts = {"a"};
  const auto m = summarize(w);
  CHECK(m.success_rate == doctest::Approx(0.5));
  CHECK(m.thought_diversity == doctest::Approx(3.0 / 5.0));
  CHECK(MetricsRow::csv_header().find("thought_diversity") != std::string::npos);
}

TEST_CASE("evaluation") {
  Trainer t(small_config(Mode::gtr));
  t.warmup();
  const auto rep = evaluate_policy(t.policy(), envs::Task::ezpoints, 5, 7, t.config().generation);
  CHECK(rep.episodes == 5);
  CHECK(rep.success_rate >= 0.0);
  CHECK_THROWS_AS(evaluate_policy(t.policy(), envs::Task::ezpoints, 0, 7, t.config().generation),
                  ConfigError);
}
