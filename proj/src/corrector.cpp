#include "gtr/corrector.hpp"

#include <algorithm>

#include "gtr/card_envs.hpp"
#include "gtr/errors.hpp"
#include "gtr/policy.hpp"

namespace gtr::corrector {

namespace {

constexpr const char* kNotDetermined = "NOT DETERMINED";

bool is_card_task(envs::Task t) { return t == envs::Task::points24 || t == envs::Task::ezpoints; }

bool is_prefix(const FormulaTokens& prefix, const FormulaTokens& full) {
  return prefix.size() <= full.size() && std::equal(prefix.begin(), prefix.end(), full.begin());
}

std::string next_token(const FormulaTokens& target, const FormulaTokens& current) {
  return current.size() < target.size() ? target[current.size()] : "=";
}

std::string words(const std::vector<int>& v) {
  std::string out;
  for (int x : v) out += (out.empty() ? "" : " ") + std::to_string(x);
  return out;
}

std::string yes_no(bool b) { return b ? "YES" : "NO"; }

}  // namespace

// ---------------------------------------------------------------------------
// JSON

json CorrectionResponse::to_json(envs::Task task) const {
  json j;
  for (std::size_t i = 0; i < answers.size(); ++i) j["answer" + std::to_string(i + 1)] = answers[i];
  j["evaluation"] = yes_no(evaluation);
  j["possible_solution"] = possible_solution ? json(yes_no(*possible_solution)) : json(nullptr);
  j["target_formula"] = target_formula ? solver::join_formula(*target_formula) : kNotDetermined;
  j["correction"] = correction ? thought_to_json(task, *correction) : json(nullptr);
  j["format_valid"] = format_valid;
  j["fallback_used"] = fallback_used;
  j["retries"] = retries;
  return j;
}

CorrectionResponse CorrectionResponse::from_json(envs::Task task, const json& j) {
  if (!j.is_object()) throw SchemaViolation("response must be a JSON object");
  CorrectionResponse r;
  for (int i = 1; i <= 4; ++i) {
    const std::string k = "answer" + std::to_string(i);
    if (!j.contains(k)) continue;
    r.answers.push_back(j.at(k).is_string() ? j.at(k).get<std::string>() : j.at(k).dump());
  }
  auto yn = [&](const char* k, bool required) -> std::optional<bool> {
    if (!j.contains(k) || j.at(k).is_null()) {
      if (required) throw SchemaViolation(std::string("missing field '") + k + "'");
      return std::nullopt;
    }
    if (!j.at(k).is_string()) throw SchemaViolation(std::string("field '") + k + "' must be YES or NO");
    std::string v = j.at(k).get<std::string>();
    std::transform(v.begin(), v.end(), v.begin(), ::toupper);
    if (v == "YES") return true;
    if (v == "NO") return false;
    if (v == "NONE" && !required) return std::nullopt;
    throw SchemaViolation(std::string("field '") + k + "' must be YES or NO, got '" + v + "'");
  };
  r.evaluation = *yn("evaluation", true);
  r.possible_solution = yn("possible_solution", false);
  if (j.contains("target_formula") && j.at("target_formula").is_string()) {
    const auto f = j.at("target_formula").get<std::string>();
    if (f != kNotDetermined && f != "None" && !f.empty()) {
      try {
        r.target_formula = solver::split_formula(f);
      } catch (const Error& e) {
        throw SchemaViolation(std::string("target_formula: ") + e.what());
      }
    }
  }
  if (j.contains("correction") && !j.at("correction").is_null() &&
      !(j.at("correction").is_string() && j.at("correction").get<std::string>() == "None"))
    r.correction = thought_from_json(task, j.at("correction"));
  if (!r.evaluation && !r.correction) throw SchemaViolation("evaluation NO requires a correction");
  if (r.evaluation) r.correction.reset();
  r.format_valid = j.value("format_valid", true);
  r.fallback_used = j.value("fallback_used", false);
  r.retries = j.value("retries", 0);
  return r;
}

// ---------------------------------------------------------------------------
// Card games

std::vector<FormulaTokens> all_solutions(const envs::Observation& obs) {
  const auto cards = obs.symbols.at("cards").get<std::vector<int>>();
  return obs.task == envs::Task::ezpoints ? solver::find_all_correct_formulas_12(cards)
                                          : solver::find_all_correct_formulas(cards);
}

CorrectionResponse oracle_correct_cards(const envs::Observation& obs, const ThoughtFields& thought,
                                        const std::optional<FormulaTokens>& episode_target) {
  if (!is_card_task(obs.task)) throw Error("oracle_correct_cards: not a card observation");
  const auto cards = obs.symbols.at("cards").get<std::vector<int>>();
  const auto current = obs.symbols.at("formula").get<FormulaTokens>();
  const auto solutions = all_solutions(obs);

  std::vector<FormulaTokens> compatible;
  for (const auto& f : solutions)
    if (is_prefix(current, f)) compatible.push_back(f);
  const bool target_live = episode_target && is_prefix(current, *episode_target);

  CorrectionResponse r;
  // (1) true cards
  r.answers.push_back("The cards are " + words(cards) + "; " + std::to_string(solutions.size()) +
                      " correct formulas exist.");
  // (2) recognized cards, order-insensitive
  bool cards_ok = false;
  if (thought.recognized_cards) {
    auto a = *thought.recognized_cards, b = cards;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    cards_ok = a == b;
  }
  r.answers.push_back(std::string("The thought recognizes ") +
                      (thought.recognized_cards ? words(*thought.recognized_cards) : "no cards") +
                      (cards_ok ? ", which matches." : ", which does not match."));
  // (3) proposed formula
  bool formula_ok = false;
  if (compatible.empty()) {
    formula_ok = !thought.proposed_formula;
  } else if (thought.proposed_formula) {
    const auto& p = *thought.proposed_formula;
    formula_ok = target_live ? p == *episode_target
                             : std::find(compatible.begin(), compatible.end(), p) != compatible.end();
  }
  r.answers.push_back(std::string("The proposed formula is ") +
                      (thought.proposed_formula ? solver::join_formula(*thought.proposed_formula) : "none") +
                      (formula_ok ? ", which is a valid target." : ", which is not a valid target."));
  // (4) next token
  const std::optional<FormulaTokens> aimed =
      formula_ok ? thought.proposed_formula
                 : (target_live ? episode_target
                                : (compatible.empty() ? std::nullopt : std::optional(compatible.front())));
  const std::string expected = aimed ? next_token(*aimed, current) : "=";
  const bool action_ok = thought.chosen_action && *thought.chosen_action == expected;
  r.answers.push_back("The next token should be '" + expected + "'" +
                      (action_ok ? ", as chosen." : ", not the chosen one."));

  r.evaluation = cards_ok && formula_ok && action_ok;
  r.target_formula = aimed;
  if (r.evaluation) return r;

  r.possible_solution = !compatible.empty();
  ThoughtFields fix;
  fix.recognized_cards = cards;
  fix.proposed_formula = aimed;
  fix.chosen_action = expected;
  fix.raw = render_thought(obs.task, fix);
  r.correction = std::move(fix);
  return r;
}

// ---------------------------------------------------------------------------
// Household world

CorrectionResponse oracle_correct_miniworld(const miniworld::MiniWorldEnv& env,
                                            const ThoughtFields& thought) {
  const auto& st = env.state();
  const std::string holding = st.holding ? *st.holding : "nothing";
  const std::string subgoal = env.next_subgoal_text();
  const std::string expert = miniworld::scripted_expert(env);

  CorrectionResponse r;
  const bool scene_ok = thought.location_claim == st.agent_at && thought.holding_claim == holding;
  r.answers.push_back("You are at " + st.agent_at + " holding " + holding +
                      (scene_ok ? "; the thought agrees." : "; the thought does not agree."));
  const bool subgoal_ok = thought.subgoal_claim == subgoal;
  r.answers.push_back("The next sub-goal is " + subgoal +
                      (subgoal_ok ? "; the thought agrees." : "; the thought does not agree."));

  bool action_ok = false;
  if (thought.chosen_action) {
    const auto adm = env.admissible_actions();
    const std::string& a = *thought.chosen_action;
    if (a == expert) {
      action_ok = true;
    } else if (std::find(adm.begin(), adm.end(), a) != adm.end()) {
      const int before = miniworld::expert_plan_length(env);
      miniworld::MiniWorldEnv sim = env;
      sim.set_truncation(false);
      if (!sim.done()) {
        sim.step_text(a);
        const int after = sim.state().goal_hit ? 0 : miniworld::expert_plan_length(sim);
        action_ok = before > 0 && after >= 0 && after < before;
      }
    }
  }
  r.answers.push_back("A good admissible action is '" + expert + "'" +
                      (action_ok ? "; the chosen action makes progress." : "; the chosen action does not."));
  r.evaluation = scene_ok && subgoal_ok && action_ok;
  if (r.evaluation) return r;

  ThoughtFields fix;
  fix.location_claim = st.agent_at;
  fix.holding_claim = holding;
  fix.subgoal_claim = subgoal;
  fix.chosen_action = expert;
  fix.raw = render_thought(envs::Task::miniworld, fix);
  r.correction = std::move(fix);
  return r;
}

// ---------------------------------------------------------------------------
// Numberline, blackjack

CorrectionResponse oracle_correct_numberline(const envs::Observation& obs,
                                             const ThoughtFields& thought) {
  const int cur = obs.symbols.at("current").get<int>();
  const int tgt = obs.symbols.at("target").get<int>();
  const std::string move = tgt > cur ? "+" : "-";
  CorrectionResponse r;
  const bool state_ok = thought.current_claim == cur && thought.target_claim == tgt;
  const bool action_ok = thought.chosen_action == move;
  r.answers = {"current " + std::to_string(cur) + ", target " + std::to_string(tgt),
               "the move toward the target is " + move};
  r.evaluation = state_ok && action_ok;
  if (r.evaluation) return r;
  ThoughtFields fix;
  fix.current_claim = cur;
  fix.target_claim = tgt;
  fix.chosen_action = move;
  fix.raw = render_thought(envs::Task::numberline, fix);
  r.correction = std::move(fix);
  return r;
}

CorrectionResponse oracle_correct_blackjack(const envs::Observation& obs,
                                            const ThoughtFields& thought) {
  envs::Hand hand{obs.symbols.at("player").get<std::vector<int>>()};
  const int up = obs.symbols.at("dealer_upcard").get<int>();
  const int up_points = envs::card_points(up);
  const std::string move = envs::blackjack_basic_strategy(hand, up);
  CorrectionResponse r;
  const bool state_ok = thought.current_claim == hand.total() && thought.target_claim == up_points;
  const bool action_ok = thought.chosen_action == move;
  r.answers = {"player total " + std::to_string(hand.total()) + ", dealer shows " +
                   std::to_string(up_points),
               "basic strategy says " + move};
  r.evaluation = state_ok && action_ok;
  if (r.evaluation) return r;
  ThoughtFields fix;
  fix.current_claim = hand.total();
  fix.target_claim = up_points;
  fix.chosen_action = move;
  fix.raw = render_thought(envs::Task::blackjack, fix);
  r.correction = std::move(fix);
  return r;
}

// ---------------------------------------------------------------------------

FormatVerdict format_judge(const Vocab& vocab, const std::vector<TokenId>& tokens,
                           double format_reward_value) {
  const auto markers = std::count(tokens.begin(), tokens.end(), vocab.action_marker());
  auto first = std::find(tokens.begin(), tokens.end(), vocab.action_marker());
  const bool thought_nonempty =
      std::any_of(tokens.begin(), first, [&](TokenId t) { return t != vocab.thought_marker() && t != Vocab::kEos; });
  const bool valid = markers == 1 && thought_nonempty && policy::parse_action(vocab, tokens).has_value();
  return {valid, valid ? format_reward_value : 0.0};
}

// ---------------------------------------------------------------------------

CorrectionResponse OracleCorrector::correct(const CorrectionRequest& req) {
  switch (req.obs.task) {
    case envs::Task::points24:
    case envs::Task::ezpoints: {
      std::optional<FormulaTokens> target = episode_target(req.episode_id);
      CorrectionResponse r = oracle_correct_cards(req.obs, req.thought, target);
      std::lock_guard lock(mu_);
      if (r.target_formula) targets_[req.episode_id] = *r.target_formula;
      return r;
    }
    case envs::Task::numberline: return oracle_correct_numberline(req.obs, req.thought);
    case envs::Task::blackjack: return oracle_correct_blackjack(req.obs, req.thought);
    case envs::Task::miniworld: {
      const auto* world = dynamic_cast<const miniworld::MiniWorldEnv*>(req.env.get());
      if (!world) throw Error("miniworld correction needs the environment state");
      return oracle_correct_miniworld(*world, req.thought);
    }
  }
  throw Error("unsupported task");
}

void OracleCorrector::end_episode(std::uint64_t episode_id) {
  std::lock_guard lock(mu_);
  targets_.erase(episode_id);
}

std::optional<FormulaTokens> OracleCorrector::episode_target(std::uint64_t episode_id) const {
  std::lock_guard lock(mu_);
  auto it = targets_.find(episode_id);
  if (it == targets_.end()) return std::nullopt;
  return it->second;
}

}  // namespace gtr::corrector
