#include "gtr/card_envs.hpp"

#include <algorithm>
#include <cmath>

#include "gtr/errors.hpp"

namespace gtr::envs {

std::string rank_label(int rank) {
  switch (rank) {
    case 1: return "A";
    case 11: return "J";
    case 12: return "Q";
    case 13: return "K";
    default: return std::to_string(rank);
  }
}

// ---------------------------------------------------------------------------
// Formula games

FormulaGameSpec FormulaGameSpec::points24() { return {}; }

FormulaGameSpec FormulaGameSpec::ezpoints() {
  FormulaGameSpec s;
  s.task = Task::ezpoints;
  s.num_cards = 2;
  s.puzzle = solver::Puzzle::points12();
  s.horizon = 5;
  s.deal_solvable_only = true;
  return s;
}

FormulaGameEnv::FormulaGameEnv(FormulaGameSpec spec, Options opts)
    : spec_(std::move(spec)), opts_(opts), horizon_(opts.horizon > 0 ? opts.horizon : spec_.horizon) {
  std::vector<int> ranks(spec_.num_cards, 1);
  state_ = make_state(ranks);
}

FormulaState FormulaGameEnv::make_state(const std::vector<int>& ranks) {
  FormulaState s;
  for (int r : ranks) s.cards.push_back(CardValue{r});
  s.shown = ranks;
  s.used.assign(ranks.size(), false);
  return s;
}

std::vector<int> FormulaGameEnv::card_values() const {
  return solver::effective_values(state_.cards);
}

Observation FormulaGameEnv::reset(std::uint64_t seed) {
  Rng deal(derive_seed(seed, "deal"));
  std::vector<int> ranks(spec_.num_cards);
  for (;;) {
    for (auto& r : ranks) r = static_cast<int>(deal.uniform_int(1, 13));
    if (!spec_.deal_solvable_only) break;
    std::vector<int> eff;
    for (int r : ranks) eff.push_back(solver::effective_value(r));
    if (spec_.num_cards == 2 ? solver::is_solvable_12(eff) : solver::is_solvable(eff)) break;
  }
  state_ = make_state(ranks);
  if (opts_.misread_prob > 0.0) {
    Rng eye(derive_seed(seed, "misread"));
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (eye.uniform01() >= opts_.misread_prob) continue;
      const int true_eff = solver::effective_value(ranks[i]);
      int r;
      do {
        r = static_cast<int>(eye.uniform_int(1, 13));
      } while (solver::effective_value(r) == true_eff);
      state_.shown[i] = r;
    }
  }
  return observe();
}

Observation FormulaGameEnv::observe() const {
  Observation obs;
  obs.task = spec_.task;
  json shown_eff = json::array();
  for (int r : state_.shown) shown_eff.push_back(solver::effective_value(r));
  json ranks = json::array();
  for (const auto& c : state_.cards) ranks.push_back(c.rank);
  obs.symbols = {
      {"cards", card_values()},
      {"ranks", ranks},
      {"shown", shown_eff},
      {"shown_ranks", state_.shown},
      {"used", state_.used},
      {"formula", state_.formula},
      {"target", spec_.puzzle.target},
      {"step", state_.step_count},
  };
  obs.prompt_text = render_prompt(obs);
  return obs;
}

std::vector<std::string> FormulaGameEnv::legal_actions() const {
  std::vector<int> unused;
  for (std::size_t i = 0; i < state_.cards.size(); ++i)
    if (!state_.used[i]) unused.push_back(state_.cards[i].effective());
  std::sort(unused.begin(), unused.end());
  unused.erase(std::unique(unused.begin(), unused.end()), unused.end());
  std::vector<std::string> out;
  for (int v : unused) out.push_back(std::to_string(v));
  for (char op : spec_.puzzle.ops) out.emplace_back(1, op);
  if (spec_.puzzle.parens) {
    out.emplace_back("(");
    out.emplace_back(")");
  }
  out.emplace_back("=");
  return out;
}

bool FormulaGameEnv::in_alphabet(const std::string& a) const {
  if (solver::is_number_token(a) || a == "=") return true;
  if (a.size() == 1 && spec_.puzzle.ops.find(a[0]) != std::string::npos) return true;
  return spec_.puzzle.parens && (a == "(" || a == ")");
}

bool FormulaGameEnv::completable_now() const {
  try {
    return solver::completable(card_values(), state_.formula, spec_.puzzle);
  } catch (const MalformedExpression&) {
    return false;
  }
}

int FormulaGameEnv::min_steps_to_finish() const {
  int unused = 0, ops = 0, depth = 0;
  for (bool u : state_.used) unused += !u;
  for (const auto& t : state_.formula) {
    if (solver::is_operator_token(t)) ++ops;
    else if (t == "(") ++depth;
    else if (t == ")") --depth;
  }
  const int ops_needed = std::max(0, static_cast<int>(state_.cards.size()) - 1 - ops);
  return unused + ops_needed + std::max(0, depth) + 1;
}

bool FormulaGameEnv::truncation_triggered() const {
  return !completable_now() || min_steps_to_finish() > horizon_ - state_.step_count;
}

StepOutcome FormulaGameEnv::finish(StepOutcome out, double reward, bool success) {
  state_.done = true;
  out.reward = reward;
  out.done = true;
  out.info["success"] = success;
  return out;
}

StepOutcome FormulaGameEnv::act(const std::string& action) {
  if (state_.done) throw EpisodeDone();
  StepOutcome out;
  ++state_.step_count;
  bool legal = true;

  if (action == "=") {
    const bool all_used = std::all_of(state_.used.begin(), state_.used.end(), [](bool u) { return u; });
    const auto value = solver::try_evaluate(state_.formula);
    out.info["legal"] = true;
    out.info["formula_value"] = value ? value->to_string() : "invalid";
    const bool success = all_used && value && *value == Rational(spec_.puzzle.target);
    out = finish(std::move(out), success ? 10.0 : -1.0, success);
    out.observation = observe();
    return out;
  }

  if (solver::is_number_token(action)) {
    const int v = solver::number_value(action);
    legal = false;
    for (std::size_t i = 0; i < state_.cards.size(); ++i) {
      if (!state_.used[i] && state_.cards[i].effective() == v) {
        state_.used[i] = true;
        state_.formula.push_back(action);
        legal = true;
        break;
      }
    }
  } else if (in_alphabet(action)) {
    state_.formula.push_back(action);
  } else {
    legal = false;
  }
  out.reward = legal ? 0.0 : -1.0;
  out.info["legal"] = legal;

  if (state_.step_count >= horizon_) {
    out = finish(std::move(out), -1.0, false);
  } else if (truncation_ && truncation_triggered()) {
    state_.done = true;
    out.reward = -1.0;
    out.done = true;
    out.truncated = true;
    out.info["success"] = false;
    out.info["resolved"] = true;
  }
  out.observation = observe();
  return out;
}

std::unique_ptr<FormulaGameEnv> make_points24(FormulaGameEnv::Options opts) {
  return std::make_unique<FormulaGameEnv>(FormulaGameSpec::points24(), opts);
}

std::unique_ptr<FormulaGameEnv> make_ezpoints(FormulaGameEnv::Options opts) {
  return std::make_unique<FormulaGameEnv>(FormulaGameSpec::ezpoints(), opts);
}

// ---------------------------------------------------------------------------
// Numberline

Observation NumberlineEnv::reset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, "numberline"));
  state_ = {};
  state_.target = static_cast<int>(rng.uniform_int(0, kMax));
  do {
    state_.current = static_cast<int>(rng.uniform_int(0, kMax));
  } while (state_.current == state_.target);
  return observe();
}

Observation NumberlineEnv::observe() const {
  Observation obs;
  obs.task = Task::numberline;
  obs.symbols = {{"target", state_.target}, {"current", state_.current},
                 {"step", state_.step_count}};
  obs.prompt_text = render_prompt(obs);
  return obs;
}

StepOutcome NumberlineEnv::act(const std::string& action) {
  if (state_.done) throw EpisodeDone();
  StepOutcome out;
  ++state_.step_count;
  const int before = state_.current;
  const bool legal = in_alphabet(action);
  if (action == "+") state_.current = std::min(kMax, before + 1);
  if (action == "-") state_.current = std::max(0, before - 1);
  out.info["legal"] = legal;
  if (state_.current == state_.target) {
    out.reward = 1.0;
    out.done = true;
    out.info["success"] = true;
  } else {
    const bool away = std::abs(state_.current - state_.target) > std::abs(before - state_.target);
    out.reward = (!legal || away || state_.current == before) ? -1.0 : 0.0;
    if (state_.step_count >= horizon_) {
      out.done = true;
      out.info["success"] = false;
    }
  }
  state_.done = out.done;
  out.observation = observe();
  return out;
}

// ---------------------------------------------------------------------------
// Blackjack

int card_points(int rank) { return rank >= 10 ? 10 : rank; }

int Hand::total() const {
  int sum = 0;
  bool ace = false;
  for (int r : ranks) {
    sum += card_points(r);
    ace = ace || r == 1;
  }
  return (ace && sum + 10 <= 21) ? sum + 10 : sum;
}

bool Hand::soft() const {
  int sum = 0;
  bool ace = false;
  for (int r : ranks) {
    sum += card_points(r);
    ace = ace || r == 1;
  }
  return ace && sum + 10 <= 21;
}

Observation BlackjackEnv::reset(std::uint64_t seed) {
  deck_ = Rng(derive_seed(seed, "dealer"));
  state_ = {};
  state_.player.ranks.push_back(draw());
  state_.dealer.ranks.push_back(draw());
  state_.player.ranks.push_back(draw());
  state_.dealer.ranks.push_back(draw());
  return observe();
}

void BlackjackEnv::set_state(BlackjackState s, std::uint64_t dealer_seed) {
  state_ = std::move(s);
  deck_ = Rng(dealer_seed);
}

Observation BlackjackEnv::observe() const {
  Observation obs;
  obs.task = Task::blackjack;
  obs.symbols = {{"player", state_.player.ranks},
                 {"player_total", state_.player.total()},
                 {"soft", state_.player.soft()},
                 {"dealer_upcard", state_.dealer.ranks.empty() ? 0 : state_.dealer.ranks[0]},
                 {"step", state_.step_count}};
  if (state_.done) obs.symbols["dealer"] = state_.dealer.ranks;
  obs.prompt_text = render_prompt(obs);
  return obs;
}

StepOutcome BlackjackEnv::act(const std::string& action) {
  if (state_.done) throw EpisodeDone();
  StepOutcome out;
  ++state_.step_count;
  out.info["legal"] = in_alphabet(action);
  if (action == "hit") {
    state_.player.ranks.push_back(draw());
    if (state_.player.bust()) {
      out.reward = -1.0;
      out.done = true;
      out.info["success"] = false;
    }
  } else if (action == "stand") {
    while (state_.dealer.total() < 17) state_.dealer.ranks.push_back(draw());
    const int p = state_.player.total(), d = state_.dealer.total();
    out.reward = (d > 21 || p > d) ? 1.0 : (p == d ? 0.0 : -1.0);
    out.done = true;
    out.info["success"] = out.reward > 0.0;
  } else {
    out.reward = -1.0;
  }
  if (!out.done && state_.step_count >= horizon()) {
    out.done = true;
    out.info["success"] = false;
  }
  state_.done = out.done;
  out.observation = observe();
  return out;
}

std::string blackjack_basic_strategy(const Hand& player, int dealer_upcard) {
  const int total = player.total();
  const int up = dealer_upcard == 1 ? 11 : card_points(dealer_upcard);
  if (player.soft()) {
    if (total >= 19) return "stand";
    if (total == 18) return up <= 8 ? "stand" : "hit";
    return "hit";
  }
  if (total >= 17) return "stand";
  if (total >= 13) return up <= 6 ? "stand" : "hit";
  if (total == 12) return (up >= 4 && up <= 6) ? "stand" : "hit";
  return "hit";
}

std::unique_ptr<Env> make_card_env(Task task) {
  switch (task) {
    case Task::points24: return make_points24();
    case Task::ezpoints: return make_ezpoints();
    case Task::numberline: return std::make_unique<NumberlineEnv>();
    case Task::blackjack: return std::make_unique<BlackjackEnv>();
    case Task::miniworld: break;
  }
  throw ConfigError("make_card_env: not a card task: " + to_string(task));
}

}  // namespace gtr::envs
