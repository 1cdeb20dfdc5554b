#include "gtr/thought.hpp"

#include <charconv>
#include <map>

#include "gtr/errors.hpp"

namespace gtr::corrector {

namespace {

bool is_card_task(envs::Task t) { return t == envs::Task::points24 || t == envs::Task::ezpoints; }

std::optional<int> to_int(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::string> joined(const std::vector<std::string>& w) {
  if (w.empty() || (w.size() == 1 && w[0] == "none")) return std::nullopt;
  return join_words(w);
}

const std::vector<std::string>& slot_names(envs::Task task) {
  static const std::vector<std::string> cards = {"cards", "formula", "next"};
  static const std::vector<std::string> line = {"current", "target", "next"};
  static const std::vector<std::string> bj = {"player", "dealer", "next"};
  static const std::vector<std::string> world = {"at", "holding", "subgoal", "next"};
  switch (task) {
    case envs::Task::numberline: return line;
    case envs::Task::blackjack: return bj;
    case envs::Task::miniworld: return world;
    default: return cards;
  }
}

}  // namespace

ThoughtFields parse_thought(envs::Task task, const std::vector<std::string>& words) {
  ThoughtFields t;
  t.raw = words;
  const auto& names = slot_names(task);
  std::map<std::string, std::vector<std::string>> slots;
  std::string current;
  for (const auto& w : words) {
    if (w == "action:") break;
    if (w == "thought:") continue;
    if (std::find(names.begin(), names.end(), w) != names.end() && !slots.count(w)) {
      current = w;
      slots[w];
      continue;
    }
    if (w == ";") {
      current.clear();
      continue;
    }
    if (!current.empty()) slots[current].push_back(w);
  }
  auto slot = [&](const std::string& n) -> const std::vector<std::string>* {
    auto it = slots.find(n);
    return it == slots.end() ? nullptr : &it->second;
  };
  auto single_int = [&](const std::string& n) -> std::optional<int> {
    const auto* s = slot(n);
    if (!s || s->size() != 1) return std::nullopt;
    return to_int((*s)[0]);
  };

  if (const auto* s = slot("next")) t.chosen_action = joined(*s);
  if (is_card_task(task)) {
    if (const auto* s = slot("cards"); s && !s->empty()) {
      std::vector<int> cards;
      bool ok = true;
      for (const auto& w : *s) {
        auto v = to_int(w);
        ok = ok && v.has_value();
        if (v) cards.push_back(*v);
      }
      if (ok) t.recognized_cards = cards;
    }
    if (const auto* s = slot("formula"); s && !s->empty() && !(s->size() == 1 && (*s)[0] == "none"))
      t.proposed_formula = *s;
  } else if (task == envs::Task::numberline) {
    t.current_claim = single_int("current");
    t.target_claim = single_int("target");
  } else if (task == envs::Task::blackjack) {
    t.current_claim = single_int("player");
    t.target_claim = single_int("dealer");
  } else {
    if (const auto* s = slot("at")) t.location_claim = joined(*s);
    if (const auto* s = slot("holding")) t.holding_claim = joined(*s);
    if (const auto* s = slot("subgoal")) t.subgoal_claim = joined(*s);
  }
  return t;
}

ThoughtFields parse_thought(envs::Task task, const Vocab& vocab, const std::vector<TokenId>& tokens) {
  std::vector<std::string> words;
  for (TokenId id : tokens) {
    if (id == Vocab::kEos) break;
    words.push_back(vocab.token(id));
  }
  return parse_thought(task, words);
}

std::vector<std::string> render_thought(envs::Task task, const ThoughtFields& t) {
  std::vector<std::string> w = {"thought:"};
  auto put_text = [&](const std::optional<std::string>& s) {
    if (!s) {
      w.push_back("none");
      return;
    }
    for (auto& x : split_words(*s)) w.push_back(std::move(x));
  };
  auto put_int = [&](const std::optional<int>& v) { w.push_back(v ? std::to_string(*v) : "none"); };

  if (is_card_task(task)) {
    w.push_back("cards");
    if (t.recognized_cards && !t.recognized_cards->empty()) {
      for (int c : *t.recognized_cards) w.push_back(std::to_string(c));
    } else {
      w.push_back("none");
    }
    w.insert(w.end(), {";", "formula"});
    if (t.proposed_formula && !t.proposed_formula->empty()) {
      w.insert(w.end(), t.proposed_formula->begin(), t.proposed_formula->end());
    } else {
      w.push_back("none");
    }
  } else if (task == envs::Task::numberline || task == envs::Task::blackjack) {
    w.push_back(task == envs::Task::numberline ? "current" : "player");
    put_int(t.current_claim);
    w.insert(w.end(), {";", task == envs::Task::numberline ? "target" : "dealer"});
    put_int(t.target_claim);
  } else {
    w.push_back("at");
    put_text(t.location_claim);
    w.insert(w.end(), {";", "holding"});
    put_text(t.holding_claim);
    w.insert(w.end(), {";", "subgoal"});
    put_text(t.subgoal_claim);
  }
  w.insert(w.end(), {";", "next"});
  put_text(t.chosen_action);
  return w;
}

std::vector<TokenId> thought_to_tokens(envs::Task task, const ThoughtFields& t, const Vocab& vocab) {
  return vocab.encode(render_thought(task, t));
}

json thought_to_json(envs::Task task, const ThoughtFields& t) {
  json j = json::object();
  auto opt_text = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  auto opt_int = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  if (is_card_task(task)) {
    j["cards"] = t.recognized_cards ? json(*t.recognized_cards) : json(nullptr);
    j["formula"] = t.proposed_formula ? json(solver::join_formula(*t.proposed_formula)) : json(nullptr);
  } else if (task == envs::Task::numberline) {
    j["current"] = opt_int(t.current_claim);
    j["target"] = opt_int(t.target_claim);
  } else if (task == envs::Task::blackjack) {
    j["player"] = opt_int(t.current_claim);
    j["dealer"] = opt_int(t.target_claim);
  } else {
    j["at"] = opt_text(t.location_claim);
    j["holding"] = opt_text(t.holding_claim);
    j["subgoal"] = opt_text(t.subgoal_claim);
  }
  j["next"] = opt_text(t.chosen_action);
  return j;
}

ThoughtFields thought_from_json(envs::Task task, const json& j) {
  if (!j.is_object()) throw SchemaViolation("correction must be a JSON object");
  ThoughtFields t;
  auto text = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    if (!j.at(k).is_string()) throw SchemaViolation(std::string("correction.") + k + " must be a string");
    return j.at(k).get<std::string>();
  };
  auto integer = [&](const char* k) -> std::optional<int> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    if (!j.at(k).is_number_integer())
      throw SchemaViolation(std::string("correction.") + k + " must be an integer");
    return j.at(k).get<int>();
  };
  if (is_card_task(task)) {
    if (j.contains("cards") && !j.at("cards").is_null()) {
      const auto& c = j.at("cards");
      if (!c.is_array()) throw SchemaViolation("correction.cards must be an array");
      std::vector<int> cards;
      for (const auto& v : c) {
        if (v.is_number_integer()) cards.push_back(v.get<int>());
        else if (v.is_string() && to_int(v.get<std::string>())) cards.push_back(*to_int(v.get<std::string>()));
        else throw SchemaViolation("correction.cards entries must be integers");
      }
      t.recognized_cards = cards;
    }
    if (auto f = text("formula"); f && *f != "none") {
      try {
        t.proposed_formula = solver::split_formula(*f);
      } catch (const Error& e) {
        throw SchemaViolation(std::string("correction.formula: ") + e.what());
      }
    }
  } else if (task == envs::Task::numberline) {
    t.current_claim = integer("current");
    t.target_claim = integer("target");
  } else if (task == envs::Task::blackjack) {
    t.current_claim = integer("player");
    t.target_claim = integer("dealer");
  } else {
    t.location_claim = text("at");
    t.holding_claim = text("holding");
    t.subgoal_claim = text("subgoal");
  }
  t.chosen_action = text("next");
  t.raw = render_thought(task, t);
  return t;
}

}  // namespace gtr::corrector
