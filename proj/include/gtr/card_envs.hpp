#pragma once

#include <array>
#include <optional>

#include "gtr/envs.hpp"
#include "gtr/rng.hpp"
#include "gtr/solver24.hpp"

namespace gtr::envs {

using solver::CardValue;
using solver::FormulaTokens;

// ---------------------------------------------------------------------------
// Formula games: Points24 (four cards, target 24) and EZPoints (two cards,
// target 12, operators + and - only).
//
// Rewards: -1 illegal, 0 legal, +10 / -1 when "=" or the horizon ends the
// episode. With truncation on, a step that leaves the formula impossible to
// complete ends the episode as a loss (-1, truncated, info "resolved").

struct FormulaGameSpec {
  Task task = Task::points24;
  std::size_t num_cards = 4;
  solver::Puzzle puzzle = solver::Puzzle::points24();
  int horizon = 20;
  bool deal_solvable_only = false;

  static FormulaGameSpec points24();
  static FormulaGameSpec ezpoints();
};

struct FormulaState {
  std::vector<CardValue> cards;
  std::vector<int> shown;  // ranks as perceived; differs from cards only when misread
  std::vector<bool> used;
  FormulaTokens formula;
  int step_count = 0;
  bool done = false;

  friend bool operator==(const FormulaState&, const FormulaState&) = default;
};

class FormulaGameEnv : public Env {
 public:
  struct Options {
    int horizon = -1;             // -1: the game's default
    double misread_prob = 0.0;    // chance a card is shown with a wrong rank
  };

  explicit FormulaGameEnv(FormulaGameSpec spec) : FormulaGameEnv(std::move(spec), Options{}) {}
  FormulaGameEnv(FormulaGameSpec spec, Options opts);

  Task task() const override { return spec_.task; }
  Observation reset(std::uint64_t seed) override;
  Observation observe() const override;
  std::vector<std::string> legal_actions() const override;
  bool done() const override { return state_.done; }
  int step_count() const override { return state_.step_count; }
  int horizon() const override { return horizon_; }
  bool in_alphabet(const std::string& action) const override;
  std::unique_ptr<Env> clone() const override { return std::make_unique<FormulaGameEnv>(*this); }

  // Puts the environment in an explicit state (tests, fixtures, CLI).
  void set_state(FormulaState s) { state_ = std::move(s); }
  const FormulaState& state() const { return state_; }
  const FormulaGameSpec& spec() const { return spec_; }
  std::vector<int> card_values() const;
  // The formula cannot reach the target, or cannot be finished within the
  // remaining steps (redundant parentheses keep a prefix completable forever).
  bool truncation_triggered() const override;
  // Lower bound on the steps needed to finish the formula and submit it.
  int min_steps_to_finish() const;

  // Fresh state with the given ranks, nothing used, empty formula.
  static FormulaState make_state(const std::vector<int>& ranks);

 protected:
  StepOutcome act(const std::string& action) override;

 private:
  bool completable_now() const;
  StepOutcome finish(StepOutcome out, double reward, bool success);

  FormulaGameSpec spec_;
  Options opts_;
  int horizon_;
  FormulaState state_;
};

std::unique_ptr<FormulaGameEnv> make_points24(FormulaGameEnv::Options opts = {});
std::unique_ptr<FormulaGameEnv> make_ezpoints(FormulaGameEnv::Options opts = {});

// ---------------------------------------------------------------------------
// Numberline: move `current` to `target` with "+" / "-" in [0, 5].

struct NumberlineState {
  int target = 0;
  int current = 0;
  int step_count = 0;
  bool done = false;
  friend bool operator==(const NumberlineState&, const NumberlineState&) = default;
};

class NumberlineEnv : public Env {
 public:
  static constexpr int kMax = 5;
  explicit NumberlineEnv(int horizon = 10) : horizon_(horizon) {}

  Task task() const override { return Task::numberline; }
  Observation reset(std::uint64_t seed) override;
  Observation observe() const override;
  std::vector<std::string> legal_actions() const override { return {"+", "-"}; }
  bool done() const override { return state_.done; }
  int step_count() const override { return state_.step_count; }
  int horizon() const override { return horizon_; }
  bool in_alphabet(const std::string& a) const override { return a == "+" || a == "-"; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<NumberlineEnv>(*this); }

  void set_state(NumberlineState s) { state_ = s; }
  const NumberlineState& state() const { return state_; }

 protected:
  StepOutcome act(const std::string& action) override;

 private:
  int horizon_;
  NumberlineState state_;
};

// ---------------------------------------------------------------------------
// Blackjack: infinite deck, hit/stand only, dealer draws until 17 or more
// (stands on soft 17), payoffs +1 / 0 / -1.

struct Hand {
  std::vector<int> ranks;  // 1 = ace, 11..13 = J Q K

  int total() const;  // best total <= 21 when possible
  bool soft() const;  // an ace currently counts as 11
  bool bust() const { return total() > 21; }
};

int card_points(int rank);  // ace = 1

struct BlackjackState {
  Hand player;
  Hand dealer;  // dealer.ranks[0] is the upcard
  int step_count = 0;
  bool done = false;
};

class BlackjackEnv : public Env {
 public:
  BlackjackEnv() = default;

  Task task() const override { return Task::blackjack; }
  Observation reset(std::uint64_t seed) override;
  Observation observe() const override;
  std::vector<std::string> legal_actions() const override { return {"stand", "hit"}; }
  bool done() const override { return state_.done; }
  int step_count() const override { return state_.step_count; }
  int horizon() const override { return 16; }  // more hits always bust
  bool in_alphabet(const std::string& a) const override { return a == "stand" || a == "hit"; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<BlackjackEnv>(*this); }

  void set_state(BlackjackState s, std::uint64_t dealer_seed);
  const BlackjackState& state() const { return state_; }

 protected:
  StepOutcome act(const std::string& action) override;

 private:
  int draw() { return static_cast<int>(deck_.uniform_int(1, 13)); }

  BlackjackState state_;
  Rng deck_;
};

// Hit/stand basic strategy for this rule set.
std::string blackjack_basic_strategy(const Hand& player, int dealer_upcard);

// Factory by task for everything except miniworld (see miniworld.hpp).
std::unique_ptr<Env> make_card_env(Task task);

std::string rank_label(int rank);  // "A", "2", ..., "10", "J", "Q", "K"

}  // namespace gtr::envs
