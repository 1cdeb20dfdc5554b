#include <doctest.h>

#include <fstream>
#include <set>

#include "gtr/errors.hpp"
#include "gtr/miniworld.hpp"

using namespace gtr::miniworld;

TEST_CASE("scripted expert solves seeded scenes") {
  int successes = 0;
  const std::set<double> allowed{-1.0, 0.0, 1.0, 50.0, 51.0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    MiniWorldEnv env;
    env.reset(seed);
    double reward = 0.0;
    bool success = false;
    while (!env.done()) {
      const auto r = env.step_text(scripted_expert(env));
      CHECK(allowed.count(r.reward) == 1);
      CHECK(r.info["legal"] == true);
      reward += r.reward;
      if (r.done) success = r.info["success"].get<bool>();
    }
    successes += success;
    CHECK(reward >= 50.0);
  }
  CHECK(successes == 1000);
}

TEST_CASE("scene json round trip and validation") {
  const auto scene = generate_scene(3);
  CHECK(SceneConfig::from_json(scene.to_json()).to_json() == scene.to_json());
  auto broken = scene.to_json();
  broken["start"] = "nowhere 9";
  CHECK_THROWS_AS(SceneConfig::from_json(broken), gtr::ConfigError);
}

TEST_CASE("inadmissible action costs -1 and changes nothing") {
  MiniWorldEnv env;
  env.reset(5);
  const auto before = env.state();
  const auto r = env.step_text("fly to the moon");
  CHECK(r.reward == -1.0);
  CHECK(env.state() == before);
}

TEST_CASE("repeated no-effect action truncates the episode") {
  MiniWorldEnv env;
  env.reset(5);
  env.set_truncation(true);
  const std::string here = "go to " + env.state().agent_at;
  gtr::envs::StepOutcome r;
  int steps = 0;
  while (!env.done()) {
    r = env.step_text(here);
    ++steps;
  }
  CHECK(r.truncated);
  CHECK(steps == 3);

  MiniWorldEnv free_env;
  free_env.reset(5);
  steps = 0;
  while (!free_env.done()) {
    free_env.step_text(here);
    ++steps;
  }
  CHECK(steps == 50);
}

TEST_CASE("expert plan length is finite and consistent") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    MiniWorldEnv env;
    env.reset(seed);
    const int n = expert_plan_length(env);
    CHECK(n > 0);
    CHECK(n <= 50);
  }
}

namespace {

SceneConfig corpus_scene(const std::string& name) {
  std::ifstream is(std::string(GTR_TEST_DIR) + "/../data/scenes/" + name + ".json");
  REQUIRE(is);
  return SceneConfig::from_json(nlohmann::json::parse(is));
}

// Steps `actions` and checks the reward of each; the expert must agree.
void trace(const std::string& scene, const std::vector<std::pair<std::string, double>>& steps) {
  MiniWorldEnv env(corpus_scene(scene), {});
  env.reset(0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    CAPTURE(i);
    CHECK(scripted_expert(env) == steps[i].first);
    const auto r = env.step_text(steps[i].first);
    CHECK(r.reward == steps[i].second);
    CHECK(r.done == (i + 1 == steps.size()));
  }
  CHECK(env.goal_satisfied());
}

}  // namespace

TEST_CASE("hand-traced heat_place episode") {
  trace("heat_place", {{"go to countertop 1", 0},
                       {"take potato 1 from countertop 1", 1},
                       {"go to microwave 1", 0},
                       {"heat potato 1 with microwave 1", 1},
                       {"go to diningtable 1", 0},
                       {"put potato 1 in/on diningtable 1", 50}});
}

TEST_CASE("hand-traced look_light episode pays 51 on the last step") {
  trace("look_light", {{"take book 1 from sofa 1", 1},
                       {"go to desk 1", 0},
                       {"toggle desklamp 1 desk 1", 51}});
}

TEST_CASE("hand-traced pick_two episode") {
  trace("pick_two", {{"go to countertop 1", 0},
                     {"take apple 1 from countertop 1", 1},
                     {"go to shelf 1", 0},
                     {"put apple 1 in/on shelf 1", 1},
                     {"go to drawer 1", 0},
                     {"open drawer 1", 0},
                     {"take apple 2 from drawer 1", 1},
                     {"go to shelf 1", 0},
                     {"put apple 2 in/on shelf 1", 50}});
}

TEST_CASE("sub-goals pay once") {
  MiniWorldEnv env(corpus_scene("heat_place"), {});
  env.reset(0);
  env.step_text("go to countertop 1");
  CHECK(env.step_text("take potato 1 from countertop 1").reward == 1);
  CHECK(env.step_text("put potato 1 in/on countertop 1").reward == 0);
  CHECK(env.step_text("take potato 1 from countertop 1").reward == 0);
}

TEST_CASE("scene corpus is solvable by the expert") {
  for (const char* name :
       {"pick_place", "clean_place", "heat_place", "cool_place", "look_light", "pick_two"}) {
    CAPTURE(name);
    const auto scene = corpus_scene(name);
    CHECK(to_string(scene.task.kind) == name);
    MiniWorldEnv env(scene, {});
    env.reset(0);
    const int n = expert_plan_length(env);
    CHECK(n > 0);
    while (!env.done()) env.step_text(scripted_expert(env));
    CHECK(env.goal_satisfied());
  }
}
