#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gtr/card_envs.hpp"
#include "gtr/corrector.hpp"
#include "gtr/errors.hpp"
#include "gtr/rng.hpp"
#include "gtr/run.hpp"
#include "gtr/solver24.hpp"
#include "gtr/trainer.hpp"

namespace py = pybind11;
using namespace gtr;
using json = nlohmann::json;

namespace {

py::dict outcome_dict(const envs::StepOutcome& r) {
  py::dict d;
  d["prompt"] = r.observation.prompt_text;
  d["reward"] = r.reward;
  d["done"] = r.done;
  d["truncated"] = r.truncated;
  d["info"] = r.info.dump();
  return d;
}

class PyEnv {
 public:
  explicit PyEnv(const std::string& task, bool truncation)
      : env_(train::make_env(envs::task_from_string(task))) {
    env_->set_truncation(truncation);
  }
  std::string reset(std::uint64_t seed) { return env_->reset(seed).prompt_text; }
  py::dict step(const std::string& action) { return outcome_dict(env_->step_text(action)); }
  std::vector<std::string> legal_actions() const { return env_->legal_actions(); }
  std::string symbols() const { return env_->observe().symbols.dump(); }
  bool done() const { return env_->done(); }
  int step_count() const { return env_->step_count(); }

 private:
  std::unique_ptr<envs::Env> env_;
};

std::vector<std::string> solve(const std::vector<int>& ranks) {
  std::vector<int> values;
  for (int r : ranks) values.push_back(solver::effective_value(r));
  std::vector<std::string> out;
  for (const auto& f : solver::find_all_correct_formulas(values)) out.push_back(solver::join_formula(f));
  std::sort(out.begin(), out.end());
  return out;
}

// Oracle verdict for a card-game thought; returns the response as JSON text.
std::string correct_cards(const std::string& task, const std::vector<int>& ranks,
                          const std::vector<std::string>& actions, const std::string& thought) {
  auto env = train::make_env(envs::task_from_string(task));
  auto* fe = dynamic_cast<envs::FormulaGameEnv*>(env.get());
  if (!fe) throw ConfigError("correct_cards needs a card task");
  env->reset(0);
  fe->set_state(envs::FormulaGameEnv::make_state(ranks));
  for (const auto& a : actions) env->step_text(a);
  const auto t = envs::task_from_string(task);
  const auto fields = corrector::parse_thought(t, split_words(thought));
  return corrector::oracle_correct_cards(env->observe(), fields, std::nullopt).to_json(t).dump();
}

// Trains from a JSON config; returns the last metrics row as a dict.
py::dict train_from_json(const std::string& config_json, bool resume) {
  const auto cfg = train::RunConfig::from_json(json::parse(config_json));
  train::RunResult res;
  {
    py::gil_scoped_release release;
    res = train::train_run(cfg, resume);
  }
  py::dict d;
  d["env_steps"] = res.env_steps;
  d["iterations"] = res.iterations;
  d["checkpoint"] = res.checkpoint;
  d["success_rate"] = res.last.success_rate;
  d["thought_diversity"] = res.last.thought_diversity;
  d["format_rate"] = res.last.format_rate;
  return d;
}

std::string default_config(const std::string& task) {
  train::RunConfig cfg;
  cfg.task = envs::task_from_string(task);
  cfg.trainer = train::task_defaults(cfg.task);
  return cfg.to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_gtr, m) {
  m.doc() = "Thought-guided RL toolkit: solver, environments, oracle corrector and trainer.";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnknownToken>(m, "UnknownToken", PyExc_ValueError);
  py::register_exception<EpisodeDone>(m, "EpisodeDone", PyExc_RuntimeError);

  m.def("solve", &solve, py::arg("ranks"), "Sorted formulas reaching 24 for card ranks 1..13.");
  m.def("is_solvable", [](const std::vector<int>& v) { return solver::is_solvable(v); },
        py::arg("values"));
  m.def("derive_seed",
        [](std::uint64_t root, const std::string& name) { return derive_seed(root, name); },
        py::arg("root"), py::arg("name"));
  m.def("correct_cards", &correct_cards, py::arg("task"), py::arg("ranks"), py::arg("actions"),
        py::arg("thought"));
  m.def("default_config", &default_config, py::arg("task"));
  m.def("train", &train_from_json, py::arg("config_json"), py::arg("resume") = false);

  py::class_<PyEnv>(m, "Env")
      .def(py::init<const std::string&, bool>(), py::arg("task"), py::arg("truncation") = false)
      .def("reset", &PyEnv::reset, py::arg("seed"))
      .def("step", &PyEnv::step, py::arg("action"))
      .def("legal_actions", &PyEnv::legal_actions)
      .def("symbols", &PyEnv::symbols)
      .def_property_readonly("done", &PyEnv::done)
      .def_property_readonly("step_count", &PyEnv::step_count);
}
