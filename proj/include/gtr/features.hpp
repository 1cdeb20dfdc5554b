#pragma once

// Hashed indicator features for observations and generation prefixes.

#include <cstdint>
#include <string>
#include <vector>

#include "gtr/envs.hpp"
#include "gtr/vocab.hpp"

namespace gtr::policy {

using FeatureKey = std::uint64_t;

// Upper bound on the number of observation features (L0 norm).
constexpr std::size_t kMaxObsFeatures = 40;

// Readable feature names, e.g. "c0=7", "hand=2,3,7,10", "loc=fridge".
std::vector<std::string> observation_feature_names(const envs::Observation& obs);

// Sorted, de-duplicated hashes of observation_feature_names (plus a bias key).
std::vector<FeatureKey> encode_observation(const envs::Observation& obs);

// Slot position derived from the prefix: last keyword token and the number of
// tokens emitted since it.
struct SlotContext {
  TokenId keyword = -1;
  int offset = 0;
  bool in_action = false;
};

SlotContext slot_context(const Vocab& vocab, const std::vector<TokenId>& prefix);

// Keys active when predicting the token that follows `prefix`.
// Bounded by kMaxObsFeatures + 8. After "action:" only the copy key is active.
std::vector<FeatureKey> context_features(const Vocab& vocab,
                                         const std::vector<FeatureKey>& obs_features,
                                         const std::vector<TokenId>& prefix);

FeatureKey feature_key(const std::string& name);

}  // namespace gtr::policy
