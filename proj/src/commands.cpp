#include "gtr/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gtr/card_envs.hpp"
#include "gtr/checkpoint.hpp"
#include "gtr/errors.hpp"
#include "gtr/miniworld.hpp"
#include "gtr/remote_corrector.hpp"
#include "gtr/run.hpp"
#include "gtr/solver24.hpp"
#include "gtr/thought.hpp"
#include "gtr/trainer.hpp"

namespace gtr::cli {

namespace fs = std::filesystem;
using train::RunConfig;
using json = nlohmann::json;

namespace {

template <class F>
int guarded(std::ostream& err, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

RunConfig resolve_config(const std::optional<std::string>& path, const Overrides& o) {
  RunConfig cfg;
  if (path) {
    cfg = RunConfig::from_json(read_json_file(*path));
  } else {
    if (o.task) cfg.task = envs::task_from_string(*o.task);
    cfg.trainer = train::task_defaults(cfg.task);
  }
  if (o.task && path) {
    const auto t = envs::task_from_string(*o.task);
    if (t != cfg.task) throw ConfigError("--task conflicts with the config file");
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) cfg.trainer.mode = train::mode_from_string(*o.mode);
  if (o.out) cfg.output_dir = *o.out;
  cfg.validate();
  return cfg;
}

int cmd_train(const std::optional<std::string>& config_path, const Overrides& o, bool resume,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(config_path, o);
    const auto r = train::train_run(cfg, resume, &out);
    out << "finished: env_step " << r.env_steps << ", iterations " << r.iterations
        << ", checkpoint " << r.checkpoint << "\n";
    return 0;
  });
}

int cmd_eval(const std::string& checkpoint, const std::string& task, int episodes,
             std::uint64_t seed, const std::optional<std::string>& out_dir, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    if (episodes <= 0) throw ConfigError("--episodes must be positive");
    const auto t = envs::task_from_string(task);
    auto ck = policy::load_checkpoint(checkpoint, Vocab::global());
    const policy::Policy pol(ck.config, Vocab::global(), std::move(ck.params));
    const auto rep = train::evaluate_policy(pol, t, episodes, seed, policy::GenerationConfig{});
    const std::string text = rep.to_json().dump(2);
    out << text << "\n";
    if (out_dir) {
      fs::create_directories(*out_dir);
      std::ofstream(fs::path(*out_dir) / "eval.json") << text << "\n";
    }
    return 0;
  });
}

int cmd_solve(const std::vector<std::string>& cards, std::ostream& out, std::ostream& err) {
  if (cards.size() != 4) {
    err << "solve needs exactly 4 card values\n";
    return 1;
  }
  std::vector<int> values;
  for (const auto& c : cards) {
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(c, &used);
      if (used != c.size()) throw std::invalid_argument(c);
    } catch (const std::exception&) {
      err << "not a card value: '" << c << "'\n";
      return 1;
    }
    if (v < 1 || v > 13) {
      err << "card value out of range 1..13: " << v << "\n";
      return 1;
    }
    values.push_back(solver::effective_value(v));
  }
  std::vector<std::string> lines;
  for (const auto& f : solver::find_all_correct_formulas(values)) lines.push_back(solver::join_formula(f));
  std::sort(lines.begin(), lines.end());
  if (lines.empty()) out << "UNSOLVABLE\n";
  for (const auto& l : lines) out << l << "\n";
  return 0;
}

int cmd_play(const std::string& task, std::uint64_t seed, std::istream& in, std::ostream& out) {
  std::unique_ptr<envs::Env> env;
  try {
    env = train::make_env(envs::task_from_string(task));
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << "\n";
    return 1;
  }
  auto obs = env->reset(seed);
  double total = 0.0;
  out << obs.prompt_text << "\n";
  if (task == "miniworld") {
    out << "admissible:";
    for (const auto& a : env->legal_actions()) out << " [" << a << "]";
    out << "\n";
  }
  std::string line;
  while (out << "> " && std::getline(in, line)) {
    const auto words = split_words(line);
    const std::string action = join_words(words);
    if (action.empty()) continue;
    if (action == "quit") return 0;
    envs::StepOutcome res;
    try {
      res = env->step(action);
    } catch (const UnknownToken& e) {
      out << "rejected: " << e.what() << "\n";
      continue;
    }
    total += res.reward;
    out << "reward " << res.reward << " done " << (res.done ? "true" : "false") << " truncated "
        << (res.truncated ? "true" : "false") << " total " << total << "\n";
    out << res.observation.prompt_text << "\n";
    if (res.done) {
      out << "episode over: success " << (res.info.value("success", false) ? "true" : "false")
          << " total " << total << "\n";
      return 0;
    }
    if (task == "miniworld") {
      out << "admissible:";
      for (const auto& a : env->legal_actions()) out << " [" << a << "]";
      out << "\n";
    }
  }
  return 0;
}

int cmd_correct(const std::string& task, const std::string& fixture_path,
                const std::optional<std::string>& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t = envs::task_from_string(task);
    const json fx = read_json_file(fixture_path);
    train::CorrectorConfig cc;
    if (config_path) cc = RunConfig::from_json(read_json_file(*config_path)).corrector;

    std::shared_ptr<envs::Env> env = train::make_env(t);
    env->reset(fx.value("seed", std::uint64_t{0}));
    if (fx.contains("cards")) {
      auto* fe = dynamic_cast<envs::FormulaGameEnv*>(env.get());
      if (!fe) throw ConfigError("\"cards\" is only valid for card tasks");
      fe->set_state(envs::FormulaGameEnv::make_state(fx.at("cards").get<std::vector<int>>()));
    }
    for (const auto& a : fx.value("actions", std::vector<std::string>{})) env->step_text(a);
    if (env->done()) throw ConfigError("fixture episode is already finished");

    corrector::CorrectionRequest req;
    req.env = env;
    req.obs = env->observe();
    req.thought = corrector::parse_thought(t, split_words(fx.at("thought").get<std::string>()));

    std::unique_ptr<corrector::Corrector> c;
    if (cc.remote) c = std::make_unique<corrector::RemoteCorrector>(cc.endpoint);
    else c = std::make_unique<corrector::OracleCorrector>();
    const auto r = c->correct(req);
    out << r.to_json(t).dump(2) << "\n";
    return 0;
  });
}

}  // namespace gtr::cli
