#include "gtr/vocab.hpp"

#include <sstream>

#include "gtr/errors.hpp"
#include "gtr/rng.hpp"

namespace gtr {

namespace {

std::vector<std::string> default_tokens() {
  std::vector<std::string> t = {"<eos>", "thought:", "action:"};
  for (int i = 0; i <= 30; ++i) t.push_back(std::to_string(i));
  for (const char* s : {"+", "-", "*", "/", "(", ")", "=", ";", ","}) t.emplace_back(s);
  // slot keywords
  for (const char* s : {"cards", "formula", "next", "none", "current", "target", "player",
                        "dealer", "total", "soft", "hard", "at", "holding", "nothing", "see",
                        "subgoal", "hit", "stand"})
    t.emplace_back(s);
  // household actions and task text
  for (const char* s : {"go", "to", "take", "from", "put", "in/on", "open", "close", "toggle",
                        "clean", "heat", "cool", "with", "look", "under", "the", "a", "two",
                        "hot", "desklamp"})
    t.emplace_back(s);
  for (const char* s : {"countertop", "cabinet", "drawer", "shelf", "diningtable", "sidetable",
                        "dresser", "garbagecan", "coffeetable", "desk", "sinkbasin", "microwave",
                        "fridge"})
    t.emplace_back(s);
  for (const char* s : {"apple", "mug", "potato", "bread", "plate", "book", "cd", "pencil",
                        "tomato", "egg", "lettuce", "cup"})
    t.emplace_back(s);
  // filler lexicon
  for (const char* s : {"i", "think", "so", "maybe", "we", "should", "is", "now", "then", "let",
                        "me", "try", "it", "ok", "hmm", "because", "use", "make", "need", "and",
                        "first", "done", "good", "wait", "answer", "card", "number", "step"})
    t.emplace_back(s);
  return t;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::string joined;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw Error("duplicate vocabulary token '" + tokens_[i] + "'");
    joined += tokens_[i];
    joined += '\n';
  }
  hash_ = fnv1a64(joined);
  thought_ = contains("thought:") ? id("thought:") : -1;
  action_ = contains("action:") ? id("action:") : -1;
}

const Vocab& Vocab::global() {
  static const Vocab v(default_tokens());
  return v;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw OutOfVocabulary(std::string(token));
  return it->second;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  return encode(split_words(text));
}

std::vector<TokenId> Vocab::encode(const std::vector<std::string>& words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::string Vocab::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId t : ids) {
    if (t == kEos) continue;
    if (!out.empty()) out += ' ';
    out += token(t);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace gtr
