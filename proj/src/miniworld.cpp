#include "gtr/miniworld.hpp"

#include <algorithm>
#include <sstream>

#include "gtr/errors.hpp"
#include "gtr/rng.hpp"

namespace gtr::miniworld {

namespace {

constexpr const char* kHeld = "held";

const std::vector<std::string>& plain_receptacle_types() {
  static const std::vector<std::string> v = {"countertop", "cabinet",   "drawer",
                                             "shelf",      "diningtable", "sidetable",
                                             "dresser",    "garbagecan", "coffeetable"};
  return v;
}

const std::vector<std::string>& object_types() {
  static const std::vector<std::string> v = {"apple", "mug",    "potato", "bread",
                                             "plate", "book",   "cd",     "pencil",
                                             "tomato", "egg",   "lettuce", "cup"};
  return v;
}

bool openable_type(const std::string& type) {
  return type == "cabinet" || type == "drawer" || type == "fridge" || type == "microwave";
}

std::string capability_for(TaskKind k) {
  switch (k) {
    case TaskKind::clean_place: return "clean";
    case TaskKind::heat_place: return "heat";
    case TaskKind::cool_place: return "cool";
    case TaskKind::look_light: return "light";
    default: return "";
  }
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::pick_place: return "pick_place";
    case TaskKind::clean_place: return "clean_place";
    case TaskKind::heat_place: return "heat_place";
    case TaskKind::cool_place: return "cool_place";
    case TaskKind::look_light: return "look_light";
    case TaskKind::pick_two: return "pick_two";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& s) {
  for (auto k : {TaskKind::pick_place, TaskKind::clean_place, TaskKind::heat_place,
                 TaskKind::cool_place, TaskKind::look_light, TaskKind::pick_two})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown task kind '" + s + "'");
}

std::string object_type(const std::string& name) { return name.substr(0, name.find(' ')); }

// ---------------------------------------------------------------------------
// SceneConfig

const Receptacle& SceneConfig::receptacle(const std::string& name) const {
  for (const auto& r : receptacles)
    if (r.name == name) return r;
  throw ConfigError("no receptacle named '" + name + "'");
}

void SceneConfig::validate() const {
  std::set<std::string> names;
  for (const auto& r : receptacles) {
    if (!names.insert(r.name).second) throw ConfigError("duplicate name '" + r.name + "'");
    if (r.capabilities.count("light") != (r.lamp.empty() ? 0u : 1u))
      throw ConfigError("receptacle '" + r.name + "': lamp name required iff light capability");
    for (const auto& c : r.capabilities)
      if (c != "heat" && c != "cool" && c != "clean" && c != "light")
        throw ConfigError("unknown capability '" + c + "'");
  }
  std::set<std::string> recep_names = names;
  for (const auto& o : objects) {
    if (!names.insert(o.name).second) throw ConfigError("duplicate name '" + o.name + "'");
    if (!recep_names.count(o.receptacle))
      throw ConfigError("object '" + o.name + "' placed in unknown receptacle '" +
                        o.receptacle + "'");
  }
  if (!recep_names.count(start)) throw ConfigError("start location '" + start + "' unknown");
  if (!recep_names.count(task.target_receptacle))
    throw ConfigError("target receptacle '" + task.target_receptacle + "' unknown");
  const auto count = std::count_if(objects.begin(), objects.end(), [&](const ObjectSpec& o) {
    return object_type(o.name) == task.target_object;
  });
  if (count < (task.kind == TaskKind::pick_two ? 2 : 1))
    throw ConfigError("not enough '" + task.target_object + "' objects for the task");
  const std::string cap = capability_for(task.kind);
  if (!cap.empty()) {
    const bool present = std::any_of(receptacles.begin(), receptacles.end(),
                                     [&](const Receptacle& r) { return r.capabilities.count(cap); });
    if (!present) throw ConfigError("no receptacle provides '" + cap + "'");
  }
  if (task.kind == TaskKind::look_light && !receptacle(task.target_receptacle).capabilities.count("light"))
    throw ConfigError("look_light target receptacle has no lamp");
}

std::string SceneConfig::task_text() const {
  const std::string& obj = task.target_object;
  const std::string& rec = task.target_receptacle;
  switch (task.kind) {
    case TaskKind::pick_place: return "put a " + obj + " in/on " + rec;
    case TaskKind::clean_place: return "put a clean " + obj + " in/on " + rec;
    case TaskKind::heat_place: return "put a hot " + obj + " in/on " + rec;
    case TaskKind::cool_place: return "put a cool " + obj + " in/on " + rec;
    case TaskKind::look_light: return "look at " + obj + " under the " + receptacle(rec).lamp;
    case TaskKind::pick_two: return "put two " + obj + " in/on " + rec;
  }
  return "";
}

json SceneConfig::to_json() const {
  json j;
  j["receptacles"] = json::array();
  for (const auto& r : receptacles) {
    json jr = {{"name", r.name}, {"openable", r.openable},
               {"capabilities", std::vector<std::string>(r.capabilities.begin(), r.capabilities.end())}};
    if (!r.lamp.empty()) jr["lamp"] = r.lamp;
    j["receptacles"].push_back(jr);
  }
  j["objects"] = json::array();
  for (const auto& o : objects) j["objects"].push_back({{"name", o.name}, {"receptacle", o.receptacle}});
  j["task"] = {{"kind", to_string(task.kind)},
               {"target_object", task.target_object},
               {"target_receptacle", task.target_receptacle}};
  j["start"] = start;
  return j;
}

SceneConfig SceneConfig::from_json(const json& j) {
  SceneConfig s;
  try {
    for (const auto& jr : j.at("receptacles")) {
      Receptacle r;
      r.name = jr.at("name").get<std::string>();
      r.openable = jr.value("openable", false);
      for (const auto& c : jr.value("capabilities", json::array())) r.capabilities.insert(c.get<std::string>());
      r.lamp = jr.value("lamp", std::string());
      s.receptacles.push_back(std::move(r));
    }
    for (const auto& jo : j.at("objects"))
      s.objects.push_back({jo.at("name").get<std::string>(), jo.at("receptacle").get<std::string>()});
    const auto& jt = j.at("task");
    s.task.kind = task_kind_from_string(jt.at("kind").get<std::string>());
    s.task.target_object = jt.at("target_object").get<std::string>();
    s.task.target_receptacle = jt.at("target_receptacle").get<std::string>();
    s.start = j.at("start").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene json: ") + e.what());
  }
  s.validate();
  return s;
}

SceneConfig generate_scene(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "scene"));
  SceneConfig s;
  s.task.kind = static_cast<TaskKind>(rng.uniform_int(0, 5));
  std::map<std::string, int> counter;
  auto add_recep = [&](const std::string& type, std::set<std::string> caps) {
    Receptacle r;
    r.name = type + " " + std::to_string(++counter[type]);
    r.openable = openable_type(type);
    if (caps.count("light")) r.lamp = "desklamp " + std::to_string(++counter["desklamp"]);
    r.capabilities = std::move(caps);
    s.receptacles.push_back(std::move(r));
  };

  const int n_recep = static_cast<int>(rng.uniform_int(4, 8));
  switch (s.task.kind) {
    case TaskKind::clean_place: add_recep("sinkbasin", {"clean"}); break;
    case TaskKind::heat_place: add_recep("microwave", {"heat"}); break;
    case TaskKind::cool_place: add_recep("fridge", {"cool"}); break;
    case TaskKind::look_light: add_recep("desk", {"light"}); break;
    default: break;
  }
  // One distractor capability receptacle now and then.
  if (rng.uniform01() < 0.5) {
    static const std::vector<std::pair<std::string, std::string>> extras = {
        {"fridge", "cool"}, {"microwave", "heat"}, {"sinkbasin", "clean"}};
    const auto& [type, cap] = extras[rng.index(extras.size())];
    if (!counter.count(type)) add_recep(type, {cap});
  }
  while (static_cast<int>(s.receptacles.size()) < n_recep) {
    const auto& types = plain_receptacle_types();
    add_recep(types[rng.index(types.size())], {});
  }

  std::vector<std::string> plain;
  for (const auto& r : s.receptacles)
    if (r.capabilities.empty()) plain.push_back(r.name);

  const auto& types = object_types();
  const std::string target = types[rng.index(types.size())];
  s.task.target_object = target;
  if (s.task.kind == TaskKind::look_light) {
    s.task.target_receptacle = s.receptacles.front().name;
  } else {
    s.task.target_receptacle = plain[rng.index(plain.size())];
  }

  const int n_obj = static_cast<int>(rng.uniform_int(3, 6));
  const int n_target = s.task.kind == TaskKind::pick_two ? 2 : 1;
  std::map<std::string, int> obj_counter;
  std::vector<std::string> target_homes;
  for (int i = 0; i < n_obj; ++i) {
    std::string type = target;
    if (i >= n_target) {
      do {
        type = types[rng.index(types.size())];
      } while (type == target);
    }
    std::string home;
    do {
      home = s.receptacles[rng.index(s.receptacles.size())].name;
    } while (i < n_target && home == s.task.target_receptacle);
    if (i < n_target) target_homes.push_back(home);
    s.objects.push_back({type + " " + std::to_string(++obj_counter[type]), home});
  }
  do {
    s.start = s.receptacles[rng.index(s.receptacles.size())].name;
  } while (std::find(target_homes.begin(), target_homes.end(), s.start) != target_homes.end());
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// MiniWorldEnv

MiniWorldEnv::MiniWorldEnv(SceneConfig scene, Options opts) : opts_(opts) {
  scene.validate();
  fixed_scene_ = scene;
  load(std::move(scene));
}

void MiniWorldEnv::load(SceneConfig scene) {
  scene_ = std::move(scene);
  state_ = {};
  state_.agent_at = scene_.start;
  for (const auto& o : scene_.objects) {
    state_.object_at[o.name] = o.receptacle;
    state_.flags[o.name] = {};
  }
  for (const auto& r : scene_.receptacles)
    if (r.openable) state_.receptacle_open[r.name] = false;
  history_.clear();
  no_effect_.clear();
  done_ = false;
}

Observation MiniWorldEnv::reset(std::uint64_t seed) {
  load(fixed_scene_ ? *fixed_scene_ : generate_scene(seed));
  return observe();
}

bool MiniWorldEnv::visible_at(const std::string& recep) const {
  auto it = state_.receptacle_open.find(recep);
  return it == state_.receptacle_open.end() || it->second;
}

std::vector<std::string> MiniWorldEnv::visible_objects() const {
  std::vector<std::string> out;
  if (!visible_at(state_.agent_at)) return out;
  for (const auto& [obj, where] : state_.object_at)
    if (where == state_.agent_at) out.push_back(obj);
  return out;
}

Observation MiniWorldEnv::observe() const {
  Observation obs;
  obs.task = envs::Task::miniworld;
  json held_flags = json::array();
  if (state_.holding) {
    const auto& f = state_.flags.at(*state_.holding);
    if (f.clean) held_flags.push_back("clean");
    if (f.hot) held_flags.push_back("hot");
    if (f.cold) held_flags.push_back("cold");
    if (f.examined) held_flags.push_back("examined");
  }
  const Receptacle& here = scene_.receptacle(state_.agent_at);
  obs.symbols = {
      {"location", state_.agent_at},
      {"holding", state_.holding ? *state_.holding : "nothing"},
      {"held_flags", held_flags},
      {"visible", visible_objects()},
      {"capabilities", std::vector<std::string>(here.capabilities.begin(), here.capabilities.end())},
      {"task_kind", to_string(scene_.task.kind)},
      {"target_object", scene_.task.target_object},
      {"target_receptacle", scene_.task.target_receptacle},
      {"task_text", scene_.task_text()},
      {"step", step_count()},
  };
  json names = json::array();
  for (const auto& r : scene_.receptacles) names.push_back(r.name);
  obs.symbols["receptacles"] = names;
  if (here.openable) obs.symbols["open"] = state_.receptacle_open.at(here.name);
  if (opts_.include_scene_text) {
    std::ostringstream os;
    os << "You are at " << state_.agent_at << ". ";
    const auto vis = visible_objects();
    if (vis.empty()) {
      os << "You see nothing.";
    } else {
      os << "You see ";
      for (std::size_t i = 0; i < vis.size(); ++i) os << (i ? ", " : "") << vis[i];
      os << ".";
    }
    obs.symbols["scene_text"] = os.str();
  }
  obs.history = history_;
  obs.prompt_text = envs::render_prompt(obs);
  return obs;
}

std::vector<std::string> MiniWorldEnv::admissible_actions() const {
  std::vector<std::string> out;
  const std::string& here = state_.agent_at;
  const Receptacle& rec = scene_.receptacle(here);
  for (const auto& r : scene_.receptacles)
    if (r.name != here) out.push_back("go to " + r.name);
  const bool accessible = visible_at(here);
  if (!state_.holding && accessible) {
    for (const auto& obj : visible_objects()) out.push_back("take " + obj + " from " + here);
  }
  if (state_.holding && accessible) out.push_back("put " + *state_.holding + " in/on " + here);
  if (rec.openable) out.push_back((state_.receptacle_open.at(here) ? "close " : "open ") + here);
  if (!rec.lamp.empty()) out.push_back("toggle " + rec.lamp + " " + here);
  if (state_.holding) {
    const std::string& obj = *state_.holding;
    if (rec.capabilities.count("clean")) out.push_back("clean " + obj + " with " + here);
    if (rec.capabilities.count("heat")) out.push_back("heat " + obj + " with " + here);
    if (rec.capabilities.count("cool")) out.push_back("cool " + obj + " with " + here);
  }
  return out;
}

bool MiniWorldEnv::apply(const std::string& action) {
  const auto adm = admissible_actions();
  if (std::find(adm.begin(), adm.end(), action) == adm.end()) return false;
  const std::string& here = state_.agent_at;
  if (starts_with(action, "go to ")) {
    state_.agent_at = action.substr(6);
  } else if (starts_with(action, "take ")) {
    const std::string obj = action.substr(5, action.find(" from ") - 5);
    state_.holding = obj;
    state_.object_at[obj] = kHeld;
  } else if (starts_with(action, "put ")) {
    state_.object_at[*state_.holding] = here;
    state_.holding.reset();
  } else if (starts_with(action, "open ")) {
    state_.receptacle_open[here] = true;
  } else if (starts_with(action, "close ")) {
    state_.receptacle_open[here] = false;
  } else if (starts_with(action, "toggle ")) {
    if (state_.holding) state_.flags[*state_.holding].examined = true;
  } else if (starts_with(action, "clean ")) {
    state_.flags[*state_.holding].clean = true;
  } else if (starts_with(action, "heat ")) {
    auto& f = state_.flags[*state_.holding];
    f.hot = true;
    f.cold = false;
  } else if (starts_with(action, "cool ")) {
    auto& f = state_.flags[*state_.holding];
    f.cold = true;
    f.hot = false;
  }
  return true;
}

std::vector<std::string> MiniWorldEnv::instances_of(const std::string& type) const {
  std::vector<std::string> out;
  for (const auto& o : scene_.objects)
    if (object_type(o.name) == type) out.push_back(o.name);
  return out;
}

std::optional<std::string> MiniWorldEnv::held_target() const {
  if (state_.holding && object_type(*state_.holding) == scene_.task.target_object)
    return state_.holding;
  return std::nullopt;
}

std::vector<std::string> MiniWorldEnv::subgoal_ladder() const {
  switch (scene_.task.kind) {
    case TaskKind::pick_place: return {"take"};
    case TaskKind::clean_place: return {"take", "clean"};
    case TaskKind::heat_place: return {"take", "heat"};
    case TaskKind::cool_place: return {"take", "cool"};
    case TaskKind::look_light: return {"take", "toggle"};
    case TaskKind::pick_two: return {"take", "place", "take"};
  }
  return {};
}

bool MiniWorldEnv::subgoal_met(int index) const {
  const auto ladder = subgoal_ladder();
  const std::string& step = ladder.at(static_cast<std::size_t>(index));
  const auto held = held_target();
  const std::string& goal_rec = scene_.task.target_receptacle;
  auto placed = [&] {
    int n = 0;
    for (const auto& inst : instances_of(scene_.task.target_object))
      if (state_.object_at.at(inst) == goal_rec) ++n;
    return n;
  };
  if (step == "take") return held.has_value() && (index == 0 || placed() >= 1);
  if (step == "place") return placed() >= 1;
  if (!held) return false;
  const auto& f = state_.flags.at(*held);
  if (step == "clean") return f.clean;
  if (step == "heat") return f.hot;
  if (step == "cool") return f.cold;
  if (step == "toggle") return f.examined;
  return false;
}

bool MiniWorldEnv::goal_satisfied() const {
  const auto& t = scene_.task;
  int placed = 0;
  for (const auto& inst : instances_of(t.target_object)) {
    if (state_.object_at.at(inst) != t.target_receptacle) continue;
    const auto& f = state_.flags.at(inst);
    switch (t.kind) {
      case TaskKind::clean_place: placed += f.clean; break;
      case TaskKind::heat_place: placed += f.hot; break;
      case TaskKind::cool_place: placed += f.cold; break;
      default: ++placed;
    }
  }
  switch (t.kind) {
    case TaskKind::look_light: {
      const auto held = held_target();
      return held && state_.flags.at(*held).examined;
    }
    case TaskKind::pick_two: return placed >= 2;
    default: return placed >= 1;
  }
}

std::string MiniWorldEnv::next_subgoal_text() const {
  const auto ladder = subgoal_ladder();
  const std::string& type = scene_.task.target_object;
  const std::string target_rec = scene_.task.target_receptacle;
  if (state_.subgoals_hit >= static_cast<int>(ladder.size())) {
    if (scene_.task.kind == TaskKind::look_light) return "toggle " + type;
    return "put " + type + " " + target_rec;
  }
  const std::string& step = ladder[static_cast<std::size_t>(state_.subgoals_hit)];
  if (step == "place") return "put " + type + " " + target_rec;
  return step + " " + type;
}

bool MiniWorldEnv::truncation_triggered() const {
  const auto& rule = opts_.truncation;
  if (static_cast<int>(history_.size()) > rule.history_cap) return true;
  if (rule.repeat_cap <= 0 || static_cast<int>(history_.size()) < rule.repeat_cap) return false;
  const std::size_t n = history_.size();
  for (std::size_t i = n - static_cast<std::size_t>(rule.repeat_cap); i < n; ++i) {
    if (!no_effect_[i] || history_[i] != history_.back()) return false;
  }
  return true;
}

StepOutcome MiniWorldEnv::act(const std::string& action) {
  if (done_) throw EpisodeDone();
  StepOutcome out;
  const WorldState before = state_;
  const bool admissible = apply(action);
  history_.push_back(action);
  no_effect_.push_back(state_ == before);

  double reward = admissible ? 0.0 : -1.0;
  const int ladder = static_cast<int>(subgoal_ladder().size());
  if (admissible && state_.subgoals_hit < ladder && subgoal_met(state_.subgoals_hit)) {
    ++state_.subgoals_hit;
    reward += 1.0;
  }
  bool success = false;
  if (admissible && !state_.goal_hit && goal_satisfied()) {
    state_.goal_hit = true;
    reward += 50.0;
    success = true;
  }
  out.reward = reward;
  out.info["legal"] = admissible;
  out.info["subgoals_hit"] = state_.subgoals_hit;
  out.done = success || step_count() >= opts_.horizon;
  if (!out.done && truncation_ && truncation_triggered()) {
    out.done = true;
    out.truncated = true;
  }
  if (out.done) out.info["success"] = success;
  done_ = out.done;
  out.observation = observe();
  return out;
}

// ---------------------------------------------------------------------------
// Scripted expert

std::string scripted_expert(const MiniWorldEnv& env) {
  const SceneConfig& scene = env.scene();
  const WorldState& st = env.state();
  const TaskSpec& task = scene.task;
  const std::string& here = st.agent_at;
  auto is_open = [&](const std::string& r) {
    auto it = st.receptacle_open.find(r);
    return it == st.receptacle_open.end() || it->second;
  };
  auto navigate_then = [&](const std::string& where, const std::string& action) -> std::string {
    if (here != where) return "go to " + where;
    if (!is_open(where) && (starts_with(action, "take ") || starts_with(action, "put ")))
      return "open " + where;
    return action;
  };

  if (st.holding && object_type(*st.holding) != task.target_object) {
    // Set down whatever is in hand where we stand (or somewhere accessible).
    if (is_open(here)) return "put " + *st.holding + " in/on " + here;
    return "open " + here;
  }

  const std::string cap = capability_for(task.kind);
  if (!st.holding) {
    std::optional<std::string> pick;
    for (const auto& o : scene.objects) {
      if (object_type(o.name) != task.target_object) continue;
      if (st.object_at.at(o.name) == task.target_receptacle && task.kind != TaskKind::look_light)
        continue;
      pick = o.name;
      break;
    }
    if (!pick) throw UnsolvableScene("no " + task.target_object + " left to pick up");
    const std::string where = st.object_at.at(*pick);
    return navigate_then(where, "take " + *pick + " from " + where);
  }

  const std::string& obj = *st.holding;
  const ObjectFlags& f = st.flags.at(obj);
  const bool needs_cap = (cap == "clean" && !f.clean) || (cap == "heat" && !f.hot) ||
                         (cap == "cool" && !f.cold) || (cap == "light" && !f.examined);
  if (needs_cap) {
    const Receptacle* station = nullptr;
    if (cap == "light") {
      station = &scene.receptacle(task.target_receptacle);
    } else {
      for (const auto& r : scene.receptacles)
        if (r.capabilities.count(cap)) {
          station = &r;
          break;
        }
    }
    if (!station) throw UnsolvableScene("no receptacle provides '" + cap + "'");
    if (here != station->name) return "go to " + station->name;
    if (cap == "light") return "toggle " + station->lamp + " " + station->name;
    return cap + " " + obj + " with " + station->name;
  }
  return navigate_then(task.target_receptacle, "put " + obj + " in/on " + task.target_receptacle);
}

int expert_plan_length(const MiniWorldEnv& env, int limit) {
  if (env.goal_satisfied() || env.state().goal_hit) return 0;
  MiniWorldEnv sim = env;
  sim.set_truncation(false);
  for (int n = 1; n <= limit; ++n) {
    const std::string a = scripted_expert(sim);
    // Drive the world directly; the step cap of the copy must not interfere.
    const auto out = sim.step_text(a);
    if (sim.state().goal_hit) return n;
    if (out.done) return -1;
  }
  return -1;
}

}  // namespace gtr::miniworld
