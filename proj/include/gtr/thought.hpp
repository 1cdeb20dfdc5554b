#pragma once

// Slot-structured thoughts.
//
//   cards      thought: cards 2 3 4 1 ; formula 2 * 3 * 4 * 1 ; next 2
//   numberline thought: current 1 ; target 4 ; next +
//   blackjack  thought: player 15 ; dealer 10 ; next hit
//   miniworld  thought: at countertop 1 ; holding nothing ; subgoal take apple ; next go to fridge 1
//
// "formula none" states that no target formula is being pursued.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtr/envs.hpp"
#include "gtr/solver24.hpp"
#include "gtr/vocab.hpp"

namespace gtr::corrector {

using json = nlohmann::json;
using solver::FormulaTokens;

struct ThoughtFields {
  std::optional<std::vector<int>> recognized_cards;
  std::optional<FormulaTokens> proposed_formula;
  std::optional<std::string> chosen_action;
  std::optional<std::string> subgoal_claim;
  std::optional<std::string> location_claim;
  std::optional<std::string> holding_claim;
  std::optional<int> current_claim;   // numberline current / blackjack player total
  std::optional<int> target_claim;    // numberline target / blackjack dealer upcard
  std::vector<std::string> raw;

  // Structured fields only; `raw` is ignored.
  friend bool operator==(const ThoughtFields& a, const ThoughtFields& b) {
    return a.recognized_cards == b.recognized_cards && a.proposed_formula == b.proposed_formula &&
           a.chosen_action == b.chosen_action && a.subgoal_claim == b.subgoal_claim &&
           a.location_claim == b.location_claim && a.holding_claim == b.holding_claim &&
           a.current_claim == b.current_claim && a.target_claim == b.target_claim;
  }
};

// Total: slots that cannot be read are left empty.
ThoughtFields parse_thought(envs::Task task, const std::vector<std::string>& words);
ThoughtFields parse_thought(envs::Task task, const Vocab& vocab, const std::vector<TokenId>& tokens);

// Canonical words, starting with "thought:". Missing slots render as "none".
std::vector<std::string> render_thought(envs::Task task, const ThoughtFields& t);
// Throws OutOfVocabulary if a word is missing from the vocabulary.
std::vector<TokenId> thought_to_tokens(envs::Task task, const ThoughtFields& t, const Vocab& vocab);

// JSON object used for the "correction" field of a correction response.
json thought_to_json(envs::Task task, const ThoughtFields& t);
ThoughtFields thought_from_json(envs::Task task, const json& j);  // throws SchemaViolation

}  // namespace gtr::corrector
