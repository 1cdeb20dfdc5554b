#pragma once

// Checkpoint file: one JSON document.
//
//   {"format": "gtr-checkpoint", "version": 1,
//    "vocab_hash": "<16 hex digits>", "vocab_size": V, "policy": {...PolicyConfig},
//    "meta": {...free-form: env_step, iteration, run config...},
//    "E": [V*d doubles], "value_b": x, "value_w": [[bucket, w], ...],
//    "W": [[bucket, [V doubles]], ...]}
//
// Rows are written in bucket order and only when nonzero. Doubles are printed
// with round-trip precision, so save/load is bit-exact.

#include <string>

#include <json.hpp>

#include "gtr/policy.hpp"

namespace gtr::policy {

struct Checkpoint {
  PolicyConfig config;
  Params params;
  json meta = json::object();
};

json checkpoint_to_json(const Policy& policy, const json& meta);
Checkpoint checkpoint_from_json(const json& j, const Vocab& vocab);  // ConfigError on mismatch

void save_checkpoint(const std::string& path, const Policy& policy, const json& meta);
Checkpoint load_checkpoint(const std::string& path, const Vocab& vocab);

std::string hex64(std::uint64_t x);

}  // namespace gtr::policy
