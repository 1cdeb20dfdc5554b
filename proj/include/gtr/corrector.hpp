#pragma once

// Thought evaluation and correction.
//
// The oracle answers the same questions as the corrector prompts shipped in
// data/prompts/ and emits the same JSON layout:
//
//   {"answer1": ..., "answer2": ..., "answer3": ..., "answer4": ...,
//    "evaluation": "YES" | "NO",
//    "possible_solution": "YES" | "NO" | null,
//    "target_formula": "2*3*4*1" | "NOT DETERMINED",
//    "correction": {thought object} | null}

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtr/envs.hpp"
#include "gtr/miniworld.hpp"
#include "gtr/thought.hpp"

namespace gtr::corrector {

struct CorrectionResponse {
  std::vector<std::string> answers;
  bool evaluation = false;                 // YES
  std::optional<bool> possible_solution;   // absent: "None"
  std::optional<FormulaTokens> target_formula;  // absent: NOT DETERMINED
  std::optional<ThoughtFields> correction;
  bool format_valid = true;
  bool fallback_used = false;
  int retries = 0;

  json to_json(envs::Task task) const;
  // Parses the protocol fields; throws SchemaViolation.
  static CorrectionResponse from_json(envs::Task task, const json& j);
};

// Points24 / EZPoints checks against the true cards in `obs`.
// `episode_target` is the formula fixed earlier in the episode, if any.
CorrectionResponse oracle_correct_cards(const envs::Observation& obs, const ThoughtFields& thought,
                                        const std::optional<FormulaTokens>& episode_target);

CorrectionResponse oracle_correct_miniworld(const miniworld::MiniWorldEnv& env,
                                            const ThoughtFields& thought);

CorrectionResponse oracle_correct_numberline(const envs::Observation& obs, const ThoughtFields& thought);
CorrectionResponse oracle_correct_blackjack(const envs::Observation& obs, const ThoughtFields& thought);

// Solutions of the hand in `obs` (all tasks with formulas), lexicographic order.
std::vector<FormulaTokens> all_solutions(const envs::Observation& obs);

struct FormatVerdict {
  bool valid = false;
  double reward = 0.0;
};

// Valid iff there is a nonempty thought, exactly one "action:" marker and a
// nonempty action after it.
FormatVerdict format_judge(const Vocab& vocab, const std::vector<TokenId>& tokens,
                           double format_reward_value);

// Request handed to a corrector for one step.
struct CorrectionRequest {
  std::uint64_t episode_id = 0;
  int step = 0;
  std::shared_ptr<const envs::Env> env;  // state before the action; needed for miniworld
  envs::Observation obs;
  ThoughtFields thought;
};

class Corrector {
 public:
  virtual ~Corrector() = default;
  virtual CorrectionResponse correct(const CorrectionRequest& req) = 0;
  virtual void end_episode(std::uint64_t episode_id) = 0;
};

// Deterministic oracle with per-episode target memory.
class OracleCorrector : public Corrector {
 public:
  CorrectionResponse correct(const CorrectionRequest& req) override;
  void end_episode(std::uint64_t episode_id) override;
  std::optional<FormulaTokens> episode_target(std::uint64_t episode_id) const;

 private:
  mutable std::mutex mu_;
  std::map<std::uint64_t, FormulaTokens> targets_;
};

}  // namespace gtr::corrector
