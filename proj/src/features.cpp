#include "gtr/features.hpp"

#include <algorithm>
#include <set>

#include "gtr/rng.hpp"

namespace gtr::policy {

namespace {

using json = nlohmann::json;

std::string join_json(const json& arr, const char* sep) {
  std::string out;
  for (const auto& v : arr) {
    if (!out.empty()) out += sep;
    out += v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

std::string type_of(const std::string& name) { return name.substr(0, name.find(' ')); }

FeatureKey combine(FeatureKey a, std::uint64_t b) { return mix64(a ^ (b + 0x9E3779B97F4A7C15ULL)); }

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {"thought:", "action:", "cards",  "formula", "next",
                                          "current",  "target",  "player", "dealer",  "at",
                                          "holding",  "see",     "subgoal"};
  return k;
}

}  // namespace

FeatureKey feature_key(const std::string& name) { return mix64(fnv1a64(name)); }

std::vector<std::string> observation_feature_names(const envs::Observation& obs) {
  std::vector<std::string> f;
  const json& s = obs.symbols;
  switch (obs.task) {
    case envs::Task::points24:
    case envs::Task::ezpoints: {
      std::vector<int> shown = s.at("shown").get<std::vector<int>>();
      for (std::size_t i = 0; i < shown.size(); ++i)
        f.push_back("c" + std::to_string(i) + "=" + std::to_string(shown[i]));
      std::sort(shown.begin(), shown.end());
      std::string hand;
      for (int v : shown) hand += (hand.empty() ? "" : ",") + std::to_string(v);
      const std::string formula = join_json(s.at("formula"), " ");
      f.push_back("hand=" + hand);
      f.push_back("f=" + formula);
      f.push_back("hf=" + hand + "|" + formula);
      f.push_back("n=" + std::to_string(s.at("formula").size()));
      std::string used;
      for (const auto& u : s.at("used")) used += u.get<bool>() ? '1' : '0';
      f.push_back("used=" + used);
      if (!s.at("formula").empty()) f.push_back("last=" + s.at("formula").back().get<std::string>());
      break;
    }
    case envs::Task::numberline: {
      const auto cur = std::to_string(s.at("current").get<int>());
      const auto tgt = std::to_string(s.at("target").get<int>());
      f.push_back("cur=" + cur);
      f.push_back("tgt=" + tgt);
      f.push_back("ct=" + cur + "," + tgt);
      break;
    }
    case envs::Task::blackjack: {
      const auto total = std::to_string(s.at("player_total").get<int>());
      const auto up = std::to_string(s.at("dealer_upcard").get<int>());
      const std::string soft = s.at("soft").get<bool>() ? "soft" : "hard";
      f.push_back("pt=" + total);
      f.push_back("up=" + up);
      f.push_back("soft=" + soft);
      f.push_back("ptu=" + total + "," + up + "," + soft);
      break;
    }
    case envs::Task::miniworld: {
      const std::string loc = s.at("location").get<std::string>();
      const std::string hold = s.at("holding").get<std::string>();
      const std::string kind = s.at("task_kind").get<std::string>();
      const std::string tobj = s.at("target_object").get<std::string>();
      const std::string trec = s.at("target_receptacle").get<std::string>();
      f.push_back("loc=" + loc);
      f.push_back("loct=" + type_of(loc));
      f.push_back("hold=" + hold);
      f.push_back("holdt=" + type_of(hold));
      f.push_back("kind=" + kind);
      f.push_back("tobj=" + tobj);
      f.push_back("trec=" + trec);
      f.push_back("flags=" + join_json(s.at("held_flags"), ","));
      f.push_back("khl=" + kind + "|" + type_of(hold) + "|" + type_of(loc));
      f.push_back("atgoal=" + std::string(loc == trec ? "1" : "0"));
      if (s.contains("open")) f.push_back(std::string("open=") + (s.at("open").get<bool>() ? "1" : "0"));
      bool target_seen = false;
      for (const auto& v : s.at("visible")) {
        const std::string name = v.get<std::string>();
        target_seen = target_seen || type_of(name) == tobj;
        if (f.size() + 6 < kMaxObsFeatures) f.push_back("vis=" + name);
      }
      f.push_back(std::string("seen=") + (target_seen ? "1" : "0"));
      for (const auto& c : s.at("capabilities")) f.push_back("cap=" + c.get<std::string>());
      f.push_back("hist=" + std::to_string(std::min<std::size_t>(obs.history.size(), 10)));
      if (!obs.history.empty()) f.push_back("last=" + obs.history.back());
      break;
    }
  }
  if (f.size() > kMaxObsFeatures - 1) f.resize(kMaxObsFeatures - 1);
  return f;
}

std::vector<FeatureKey> encode_observation(const envs::Observation& obs) {
  std::vector<FeatureKey> keys = {feature_key("bias:" + envs::to_string(obs.task))};
  for (const auto& name : observation_feature_names(obs)) keys.push_back(feature_key(name));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

SlotContext slot_context(const Vocab& vocab, const std::vector<TokenId>& prefix) {
  SlotContext ctx;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const TokenId t = prefix[i];
    if (keywords().count(vocab.token(t))) {
      ctx.keyword = t;
      ctx.offset = 0;
      if (t == vocab.action_marker()) ctx.in_action = true;
    } else {
      ++ctx.offset;
    }
  }
  ctx.offset = std::min(ctx.offset, 15);
  return ctx;
}

std::vector<FeatureKey> context_features(const Vocab& vocab,
                                         const std::vector<FeatureKey>& obs_features,
                                         const std::vector<TokenId>& prefix) {
  const SlotContext ctx = slot_context(vocab, prefix);
  const auto n = prefix.size();
  const std::uint64_t l1 = n >= 1 ? static_cast<std::uint64_t>(prefix[n - 1]) : 0xFFFF;
  const std::uint64_t l2 = n >= 2 ? static_cast<std::uint64_t>(prefix[n - 2]) : 0xFFFF;
  const FeatureKey slot =
      combine(combine(feature_key("slot"), static_cast<std::uint64_t>(ctx.keyword + 1)),
              static_cast<std::uint64_t>(ctx.offset));

  std::vector<FeatureKey> out;
  out.reserve(obs_features.size() + 8);
  if (ctx.in_action) {
    // The action sees the observation only through the thought: its single
    // key is the token at the same offset in the thought's "next" slot.
    const TokenId next_kw = vocab.contains("next") ? vocab.id("next") : -1;
    std::vector<TokenId> next_slot;
    bool in_next = false;
    for (TokenId t : prefix) {
      if (t == vocab.action_marker()) break;
      if (keywords().count(vocab.token(t)) || vocab.token(t) == ";") {
        in_next = t == next_kw;
        if (in_next) next_slot.clear();
        continue;
      }
      if (in_next) next_slot.push_back(t);
    }
    const auto off = static_cast<std::size_t>(ctx.offset);
    const std::uint64_t echo = off < next_slot.size() ? static_cast<std::uint64_t>(next_slot[off]) : 0xFFFE;
    out.push_back(combine(combine(feature_key("echo"), off), echo));
    return out;
  }
  out.push_back(feature_key("bias"));
  out.push_back(slot);
  out.push_back(combine(feature_key("l1"), l1));
  out.push_back(combine(combine(feature_key("l2"), l2), l1));
  out.push_back(combine(combine(feature_key("slot-l1"), slot), l1));
  if (n == 0) out.push_back(feature_key("start"));
  for (FeatureKey f : obs_features) out.push_back(combine(f, slot));
  return out;
}

}  // namespace gtr::policy
