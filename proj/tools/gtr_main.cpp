// gtr: train, evaluate and inspect agents.

#include <iostream>

#include <CLI11.hpp>

#include "gtr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gtr - thought-guided RL for card games and a household world"};
  app.require_subcommand(1);

  gtr::cli::Overrides ov;
  std::optional<std::string> config;
  std::uint64_t seed = 0;
  std::string task, checkpoint;
  int episodes = 100;
  bool resume = false;

  auto* train = app.add_subcommand("train", "run the training loop");
  train->add_option("--config", config, "run config JSON");
  train->add_option("--seed", ov.seed, "root seed");
  train->add_option("--mode", ov.mode, "gtr | rl4vlm | sft_only");
  train->add_option("--task", ov.task, "points24 | ezpoints | numberline | blackjack | miniworld");
  train->add_option("--out", ov.out, "run directory");
  train->add_flag("--resume", resume, "continue from the newest checkpoint in the run directory");

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--task", task, "task")->required();
  eval->add_option("--episodes", episodes, "number of episodes");
  eval->add_option("--seed", seed, "seed");
  std::optional<std::string> eval_out;
  eval->add_option("--out", eval_out, "directory for eval.json");

  auto* solve = app.add_subcommand("solve", "list all 24-point formulas for 4 cards");
  std::vector<std::string> cards;
  solve->add_option("cards", cards, "4 card values in 1..13")->required();

  auto* play = app.add_subcommand("play", "step an environment from stdin");
  play->add_option("--task", task, "task")->required();
  play->add_option("--seed", seed, "seed");

  auto* correct = app.add_subcommand("correct", "run the corrector on a fixture");
  correct->add_option("--task", task, "task")->required();
  std::string fixture;
  correct->add_option("fixture", fixture, "fixture JSON")->required();
  correct->add_option("--config", config, "run config with a corrector section");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*train) return gtr::cli::cmd_train(config, ov, resume, std::cout, std::cerr);
  if (*eval) return gtr::cli::cmd_eval(checkpoint, task, episodes, seed, eval_out, std::cout, std::cerr);
  if (*solve) return gtr::cli::cmd_solve(cards, std::cout, std::cerr);
  if (*play) return gtr::cli::cmd_play(task, seed, std::cin, std::cout);
  if (*correct) return gtr::cli::cmd_correct(task, fixture, config, std::cout, std::cerr);
  return 1;
}
