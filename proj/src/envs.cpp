#include "gtr/envs.hpp"

#include <sstream>

#include "gtr/errors.hpp"

namespace gtr::envs {

std::string to_string(Task t) {
  switch (t) {
    case Task::points24: return "points24";
    case Task::ezpoints: return "ezpoints";
    case Task::numberline: return "numberline";
    case Task::blackjack: return "blackjack";
    case Task::miniworld: return "miniworld";
  }
  return "unknown";
}

Task task_from_string(const std::string& s) {
  for (Task t : {Task::points24, Task::ezpoints, Task::numberline, Task::blackjack,
                 Task::miniworld})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown task '" + s + "'");
}

StepOutcome Env::step(const std::string& action) {
  if (done()) throw EpisodeDone();
  if (!in_alphabet(action)) throw UnknownToken(action);
  return act(action);
}

StepOutcome Env::step_text(const std::string& action) {
  if (done()) throw EpisodeDone();
  return act(action);
}

namespace {

constexpr const char* kReplyFormat =
    "Reply in the form \"thought: <your reasoning> action: <your action>\".";

std::string join(const json& arr, const std::string& sep,
                 std::string (*fmt)(const json&)) {
  std::string out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += sep;
    out += fmt(arr[i]);
  }
  return out;
}

std::string as_rank(const json& j) {
  const int r = j.get<int>();
  switch (r) {
    case 1: return "A";
    case 11: return "J";
    case 12: return "Q";
    case 13: return "K";
    default: return std::to_string(r);
  }
}

std::string as_text(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

}  // namespace

std::string render_prompt(const Observation& obs) {
  std::ostringstream os;
  const json& s = obs.symbols;
  switch (obs.task) {
    case Task::points24:
    case Task::ezpoints: {
      const int target = s.at("target").get<int>();
      const bool ez = obs.task == Task::ezpoints;
      os << "You are playing the " << target << " points card game. Build a formula that uses "
         << "every card exactly once and evaluates to " << target
         << "; J, Q and K count as 10. Each step appends one number or one of "
         << (ez ? "+ -" : "+ - * / ( )") << " to the formula, and '=' submits it.\n";
      os << "Cards: " << join(s.at("shown_ranks"), ", ", as_rank) << "\n";
      os << "Current formula: " << join(s.at("formula"), "", as_text) << "\n";
      break;
    }
    case Task::numberline:
      os << "Move the current number to the target number using + or -.\n";
      os << "Target: " << s.at("target").get<int>() << "\n";
      os << "Current: " << s.at("current").get<int>() << "\n";
      break;
    case Task::blackjack:
      os << "You are playing blackjack against the dealer. Choose stand or hit.\n";
      os << "Your cards: " << join(s.at("player"), ", ", as_rank) << " (total "
         << s.at("player_total").get<int>() << (s.at("soft").get<bool>() ? ", soft" : "")
         << ")\n";
      os << "Dealer shows: " << as_rank(s.at("dealer_upcard")) << "\n";
      break;
    case Task::miniworld:
      os << "You are in a household. Your task is to: " << s.at("task_text").get<std::string>()
         << ".\n";
      if (s.contains("scene_text")) os << s.at("scene_text").get<std::string>() << "\n";
      os << "Previous actions: ";
      if (obs.history.empty()) os << "none";
      for (std::size_t i = 0; i < obs.history.size(); ++i)
        os << (i ? "; " : "") << obs.history[i];
      os << "\n";
      break;
  }
  os << kReplyFormat;
  return os.str();
}

}  // namespace gtr::envs
