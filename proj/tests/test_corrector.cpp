#include <doctest.h>

#include "fixtures.hpp"
#include "gtr/corrector.hpp"
#include "gtr/errors.hpp"
#include "gtr/miniworld.hpp"
#include "oracles.hpp"

using namespace gtr;
using namespace gtr::corrector;

namespace {

envs::Observation deal(const std::vector<int>& ranks, const std::vector<std::string>& prefix = {}) {
  auto env = envs::make_points24();
  env->reset(0);
  env->set_state(envs::FormulaGameEnv::make_state(ranks));
  for (const auto& a : prefix) env->step(a);
  return env->observe();
}

ThoughtFields parse(envs::Task task, const std::string& text) {
  return parse_thought(task, split_words(text));
}

}  // namespace

TEST_CASE("thought parse and render round trip") {
  const std::vector<std::pair<envs::Task, std::string>> cases{
      {envs::Task::points24, "thought: cards 2 3 4 1 ; formula 2 * 3 * 4 * 1 ; next 2"},
      {envs::Task::points24, "thought: cards 2 3 4 1 ; formula none ; next ="},
      {envs::Task::numberline, "thought: current 1 ; target 4 ; next +"},
      {envs::Task::blackjack, "thought: player 15 ; dealer 10 ; next hit"},
      {envs::Task::miniworld,
       "thought: at countertop 1 ; holding nothing ; subgoal take apple ; next go to fridge 1"},
  };
  for (const auto& [task, text] : cases) {
    const auto t = parse(task, text);
    CHECK(join_words(render_thought(task, t)) == text);
    CHECK(thought_from_json(task, thought_to_json(task, t)) == t);
    const auto ids = thought_to_tokens(task, t, Vocab::global());
    CHECK(parse_thought(task, Vocab::global(), ids) == t);
  }
}

TEST_CASE("thought parsing is total") {
  const auto t = parse(envs::Task::points24, "thought: cards banana ; formula ( ( ; next");
  CHECK_FALSE(t.recognized_cards);
  CHECK_FALSE(t.chosen_action);
  CHECK(parse(envs::Task::points24, "").raw.empty());
}

TEST_CASE("correct thought is accepted") {
  const auto obs = deal({2, 3, 4, 1});
  const auto r = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 1 2 3 4 ; formula 2 * 3 * 4 * 1 ; next 2"),
      std::nullopt);
  CHECK(r.evaluation);
  CHECK_FALSE(r.correction);
  CHECK(r.answers.size() == 4);
  REQUIRE(r.target_formula);
  CHECK(solver::join_formula(*r.target_formula) == "2*3*4*1");
}

TEST_CASE("wrong cards are corrected to a solution") {
  const auto obs = deal({2, 3, 4, 1});
  const auto r = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 2 3 4 5 ; formula none ; next 5"), std::nullopt);
  CHECK_FALSE(r.evaluation);
  REQUIRE(r.correction);
  CHECK(r.possible_solution == true);
  const auto& fix = *r.correction;
  CHECK(fix.recognized_cards == std::vector<int>{2, 3, 4, 1});
  REQUIRE(fix.proposed_formula);
  CHECK(oracle::evaluates_to(*fix.proposed_formula, 24));
  CHECK(fix.chosen_action == (*fix.proposed_formula)[0]);
  // The correction itself passes review.
  CHECK(oracle_correct_cards(obs, fix, std::nullopt).evaluation);
}

TEST_CASE("episode target is kept while it stays reachable") {
  const auto obs = deal({2, 3, 4, 1}, {"2"});
  const auto target = solver::split_formula("2*3*4*1");
  auto r = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 2 3 4 1 ; formula 2 * ( 3 + 4 - 1 ) ; next *"),
      target);
  CHECK_FALSE(r.evaluation);
  REQUIRE(r.correction);
  CHECK(r.correction->proposed_formula == target);
  CHECK(r.correction->chosen_action == "*");
}

TEST_CASE("dead end asks for no formula and submission") {
  const auto obs = deal({1, 1, 1, 1});
  const auto r = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 1 1 1 1 ; formula none ; next ="), std::nullopt);
  CHECK(r.evaluation);
  const auto r2 = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 1 1 1 1 ; formula none ; next 1"), std::nullopt);
  CHECK_FALSE(r2.evaluation);
  CHECK(r2.possible_solution == false);
  CHECK(r2.correction->chosen_action == "=");
}

TEST_CASE("response json round trip and schema") {
  const auto obs = deal({2, 3, 4, 1});
  const auto r = oracle_correct_cards(
      obs, parse(envs::Task::points24, "thought: cards 2 3 4 5 ; formula none ; next 5"), std::nullopt);
  const auto j = r.to_json(envs::Task::points24);
  CHECK(j["evaluation"] == "NO");
  CHECK(j["possible_solution"] == "YES");
  const auto back = CorrectionResponse::from_json(envs::Task::points24, j);
  CHECK(back.correction == r.correction);
  CHECK(back.target_formula == r.target_formula);

  CHECK_THROWS_AS(CorrectionResponse::from_json(envs::Task::points24, json::array()), SchemaViolation);
  CHECK_THROWS_AS(CorrectionResponse::from_json(envs::Task::points24, {{"evaluation", "MAYBE"}}),
                  SchemaViolation);
  CHECK_THROWS_AS(CorrectionResponse::from_json(envs::Task::points24,
                                                {{"evaluation", "NO"}, {"correction", nullptr}}),
                  SchemaViolation);
  const auto yes = CorrectionResponse::from_json(
      envs::Task::points24, {{"evaluation", "yes"}, {"target_formula", "NOT DETERMINED"}});
  CHECK(yes.evaluation);
  CHECK_FALSE(yes.target_formula);
}

TEST_CASE("oracle corrector remembers the episode target") {
  OracleCorrector oc;
  CorrectionRequest req;
  req.episode_id = 4;
  req.obs = deal({2, 3, 4, 1});
  req.thought = parse(envs::Task::points24, "thought: cards 2 3 4 1 ; formula 2 * 3 * 4 * 1 ; next 2");
  oc.correct(req);
  CHECK(oc.episode_target(4) == solver::split_formula("2*3*4*1"));
  oc.end_episode(4);
  CHECK_FALSE(oc.episode_target(4));
}

TEST_CASE("numberline and blackjack oracles") {
  envs::NumberlineEnv nl;
  nl.reset(0);
  nl.set_state({4, 1, 0, false});
  CHECK(oracle_correct_numberline(nl.observe(), parse(envs::Task::numberline,
                                                      "thought: current 1 ; target 4 ; next +"))
            .evaluation);
  const auto bad = oracle_correct_numberline(
      nl.observe(), parse(envs::Task::numberline, "thought: current 1 ; target 4 ; next -"));
  CHECK(bad.correction->chosen_action == "+");

  envs::BlackjackEnv bj;
  bj.reset(0);
  bj.set_state({envs::Hand{{10, 5}}, envs::Hand{{10, 7}}, 0, false}, 1);
  const auto r = oracle_correct_blackjack(bj.observe(), ThoughtFields{});
  CHECK(r.correction->current_claim == 15);
  CHECK(r.correction->target_claim == 10);
  CHECK(r.correction->chosen_action == "hit");
}

TEST_CASE("miniworld oracle follows the expert") {
  miniworld::MiniWorldEnv env;
  env.reset(2);
  const auto r = oracle_correct_miniworld(env, ThoughtFields{});
  CHECK_FALSE(r.evaluation);
  CHECK(r.correction->chosen_action == miniworld::scripted_expert(env));
  CHECK(oracle_correct_miniworld(env, *r.correction).evaluation);
}

TEST_CASE("format judge") {
  const auto& v = Vocab::global();
  CHECK(format_judge(v, fixture::tokens_of("thought: next 2 action: 2"), 0.1).reward == 0.1);
  CHECK_FALSE(format_judge(v, fixture::tokens_of("thought: action: 2"), 0.1).valid);
  CHECK_FALSE(format_judge(v, fixture::tokens_of("thought: next 2 action:"), 0.1).valid);
  CHECK_FALSE(format_judge(v, fixture::tokens_of("thought: next 2 action: 2 action: 3"), 0.1).valid);
  CHECK_FALSE(format_judge(v, fixture::tokens_of("thought: next 2"), 0.1).valid);
}
