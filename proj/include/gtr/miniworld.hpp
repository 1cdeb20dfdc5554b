#pragma once

// A small deterministic household world with the ALFWorld action templates:
//
//   go to {recep}            take {obj} from {recep}    put {obj} in/on {recep}
//   open {recep}             close {recep}              toggle {lamp} {recep}
//   clean {obj} with {recep} heat {obj} with {recep}    cool {obj} with {recep}
//
// Per-step reward: 50 * [final goal newly met] + [next sub-goal newly met]
//                  - [action not admissible].
//
// Sub-goal ladders (each pays once, in order):
//   pick_place               take target
//   clean/heat/cool_place    take target, apply capability
//   look_light               take target, toggle lamp      (toggle also meets the goal)
//   pick_two                 take first, place first, take second

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtr/envs.hpp"

namespace gtr::miniworld {

using json = nlohmann::json;
using envs::Observation;
using envs::StepOutcome;

enum class TaskKind { pick_place, clean_place, heat_place, cool_place, look_light, pick_two };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct Receptacle {
  std::string name;  // "<type> <index>", e.g. "fridge 1"
  bool openable = false;
  std::set<std::string> capabilities;  // subset of {heat, cool, clean, light}
  std::string lamp;                    // lamp name, present iff "light" capability
};

struct ObjectSpec {
  std::string name;        // "<type> <index>", e.g. "apple 1"
  std::string receptacle;  // initial location
};

struct TaskSpec {
  TaskKind kind = TaskKind::pick_place;
  std::string target_object;      // object type, e.g. "apple"
  std::string target_receptacle;  // for look_light: the receptacle with the lamp
};

struct SceneConfig {
  std::vector<Receptacle> receptacles;
  std::vector<ObjectSpec> objects;
  TaskSpec task;
  std::string start;  // initial agent location

  // Throws ConfigError when a structural invariant does not hold.
  void validate() const;
  const Receptacle& receptacle(const std::string& name) const;
  std::string task_text() const;

  json to_json() const;
  static SceneConfig from_json(const json& j);  // validates
};

// Seeded scene: 4-8 receptacles, 3-6 objects, uniformly chosen task kind.
SceneConfig generate_scene(std::uint64_t seed);

std::string object_type(const std::string& name);  // "apple 1" -> "apple"

struct ObjectFlags {
  bool clean = false;
  bool hot = false;
  bool cold = false;
  bool examined = false;
  friend bool operator==(const ObjectFlags&, const ObjectFlags&) = default;
};

struct WorldState {
  std::string agent_at;
  std::optional<std::string> holding;
  std::map<std::string, std::string> object_at;  // object -> receptacle, or "held"
  std::map<std::string, ObjectFlags> flags;
  std::map<std::string, bool> receptacle_open;
  int subgoals_hit = 0;  // progress along the ladder
  bool goal_hit = false;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct TruncationRule {
  int history_cap = 30;    // truncate once more than this many actions were taken
  int repeat_cap = 3;      // ... or the same no-effect action repeats this many times
};

class MiniWorldEnv : public envs::Env {
 public:
  struct Options {
    int horizon = 50;
    bool include_scene_text = false;
    TruncationRule truncation;
  };

  // Scenes are regenerated from the reset seed unless a fixed scene is given.
  MiniWorldEnv() : MiniWorldEnv(Options{}) {}
  explicit MiniWorldEnv(Options opts) : opts_(opts) {}
  MiniWorldEnv(SceneConfig scene, Options opts);

  envs::Task task() const override { return envs::Task::miniworld; }
  Observation reset(std::uint64_t seed) override;
  Observation observe() const override;
  std::vector<std::string> legal_actions() const override { return admissible_actions(); }
  bool done() const override { return done_; }
  int step_count() const override { return static_cast<int>(history_.size()); }
  int horizon() const override { return opts_.horizon; }
  bool in_alphabet(const std::string&) const override { return true; }
  std::unique_ptr<envs::Env> clone() const override {
    return std::make_unique<MiniWorldEnv>(*this);
  }

  std::vector<std::string> admissible_actions() const;
  bool truncation_triggered() const override;

  const SceneConfig& scene() const { return scene_; }
  const WorldState& state() const { return state_; }
  const std::vector<std::string>& history() const { return history_; }
  const std::vector<bool>& no_effect() const { return no_effect_; }
  std::vector<std::string> visible_objects() const;
  std::vector<std::string> subgoal_ladder() const;  // e.g. {"take", "heat"}
  std::string next_subgoal_text() const;             // e.g. "heat apple 1"
  bool goal_satisfied() const;

  // Puts the world in an explicit state (fixtures, tests).
  void set_state(WorldState s) { state_ = std::move(s); }

 protected:
  StepOutcome act(const std::string& action) override;

 private:
  void load(SceneConfig scene);
  bool apply(const std::string& action);  // false if inadmissible
  bool subgoal_met(int index) const;
  std::vector<std::string> instances_of(const std::string& type) const;
  std::optional<std::string> held_target() const;
  bool visible_at(const std::string& recep) const;

  Options opts_;
  std::optional<SceneConfig> fixed_scene_;
  SceneConfig scene_;
  WorldState state_;
  std::vector<std::string> history_;
  std::vector<bool> no_effect_;
  bool done_ = false;
};

// Next action of a shortest plan to the next unmet sub-goal (navigate, open,
// take, interact, place). Never returns an inadmissible action. Throws
// UnsolvableScene when the scene lacks the required object or capability.
std::string scripted_expert(const MiniWorldEnv& env);

// Number of expert steps from the current state to the final goal, or -1 if
// the expert cannot finish within `limit` steps.
int expert_plan_length(const MiniWorldEnv& env, int limit = 100);

}  // namespace gtr::miniworld
