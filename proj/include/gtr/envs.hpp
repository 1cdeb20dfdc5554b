#pragma once

// Environment interface shared by the card tasks and the household world.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace gtr::envs {

using json = nlohmann::json;

enum class Task { points24, ezpoints, numberline, blackjack, miniworld };

std::string to_string(Task t);
Task task_from_string(const std::string& s);  // throws ConfigError

struct Observation {
  Task task = Task::points24;
  json symbols = json::object();     // task-specific structured view
  std::vector<std::string> history;  // miniworld only
  std::string prompt_text;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
  json info = json::object();  // "legal", "success", "formula_value", "subgoals_hit", ...
};

class Env {
 public:
  virtual ~Env() = default;

  virtual Task task() const = 0;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual Observation observe() const = 0;
  virtual std::vector<std::string> legal_actions() const = 0;
  virtual bool done() const = 0;
  virtual int step_count() const = 0;
  virtual int horizon() const = 0;
  virtual bool in_alphabet(const std::string& action) const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;

  // Rejects actions outside the task alphabet with UnknownToken.
  StepOutcome step(const std::string& action);
  // Treats any string outside the alphabet as an illegal action. This is the
  // path used for actions extracted from free-form policy output.
  StepOutcome step_text(const std::string& action);

  // Whether the current state should end the episode early when truncation
  // is enabled (unsolvable formula prefix, runaway or repetitive history).
  virtual bool truncation_triggered() const { return false; }

  virtual void set_truncation(bool enabled) { truncation_ = enabled; }
  bool truncation() const { return truncation_; }

 protected:
  // `action` may be outside the alphabet; implementations penalize it.
  virtual StepOutcome act(const std::string& action) = 0;

  bool truncation_ = false;
};

// Deterministic prompt for an observation: task instruction, symbolic state
// and the "thought: ... action: ..." output skeleton.
std::string render_prompt(const Observation& obs);

}  // namespace gtr::envs
