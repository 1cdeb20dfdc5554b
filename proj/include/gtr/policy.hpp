#pragma once

// Linear-softmax autoregressive token policy over hashed context features with
// a recency-weighted bag of token embeddings, plus a linear value head.
//
//   logits_t[v] = sum_{k in ctx_t} W[k][v] + E[v] . h_t
//   h_t         = sum_{j<t} (1 - a) a^(t-1-j) E[y_j]
//   value(o)    = (b + sum_{k in obs(o)} u[k]) / (|obs(o)| + 1)
//
// W rows and u entries are indexed by hashed feature buckets and stored
// sparsely; absent entries are zero.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gtr/envs.hpp"
#include "gtr/features.hpp"
#include "gtr/rng.hpp"
#include "gtr/vocab.hpp"

namespace gtr::policy {

using json = nlohmann::json;

struct PolicyConfig {
  int hash_bits = 22;
  int embed_dim = 8;
  double recency = 0.5;
  double init_scale = 0.05;  // stddev of embedding init

  json to_json() const;
  static PolicyConfig from_json(const json& j);
};

struct GenerationConfig {
  int max_len = 256;
  double temperature = 0.2;
  double repetition_penalty = 1.2;
  bool greedy = false;

  void validate() const;  // throws ConfigError
  json to_json() const;
  static GenerationConfig from_json(const json& j);
};

// Parameters and gradients share one sparse layout.
struct Params {
  std::size_t vocab_size = 0;
  int embed_dim = 0;
  std::unordered_map<std::uint32_t, std::vector<double>> W;
  std::vector<double> E;  // vocab_size x embed_dim, row-major
  std::unordered_map<std::uint32_t, double> value_w;
  double value_b = 0.0;

  static Params zeros_like(const Params& p);
  void add_scaled(const Params& g, double s);  // this += s * g
  void scale(double s);
  double dot(const Params& other) const;
  bool all_finite() const;
  std::size_t nonzero_rows() const;
};

struct PolicyOutput {
  std::vector<TokenId> thought_tokens;  // everything before the first "action:"
  std::vector<TokenId> action_tokens;   // "action:" onwards, including eos
  std::vector<double> token_logprobs;   // unpenalized, temperature 1
  std::vector<double> token_entropies;  // of the unpenalized distribution
  double combined_logprob = 0.0;        // lambda * thought + action

  std::vector<TokenId> tokens() const;
};

// Per-position weights for a scalar objective over a token sequence:
//   J = sum_t logp_coef[t] * log p(y_t) + ent_coef[t] * H_t
struct SequenceObjective {
  std::vector<double> logp_coef;
  std::vector<double> ent_coef;
};

class Policy {
 public:
  Policy(PolicyConfig cfg, const Vocab& vocab, std::uint64_t init_seed);
  Policy(PolicyConfig cfg, const Vocab& vocab, Params params);

  const PolicyConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return *vocab_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  std::uint32_t bucket(FeatureKey k) const {
    return static_cast<std::uint32_t>(k & ((std::uint64_t{1} << cfg_.hash_bits) - 1));
  }

  std::vector<double> next_token_logits(const std::vector<FeatureKey>& obs_features,
                                        const std::vector<TokenId>& prefix) const;

  PolicyOutput generate(const envs::Observation& obs, const GenerationConfig& gen, Rng& rng,
                        double thought_coef = 1.0) const;

  // lambda * sum log p(thought) + sum log p(action), temperature 1, no penalty.
  double sequence_logprob(const envs::Observation& obs, const std::vector<TokenId>& thought,
                          const std::vector<TokenId>& action, double thought_coef) const;
  Params grad_sequence_logprob(const envs::Observation& obs, const std::vector<TokenId>& thought,
                               const std::vector<TokenId>& action, double thought_coef) const;

  // Value J of `obj` on `tokens`, per-position log-probs and entropies; when
  // `grad` is given, dJ/dparams is accumulated into it (scaled by `grad_scale`).
  double evaluate(const std::vector<FeatureKey>& obs_features, const std::vector<TokenId>& tokens,
                  const SequenceObjective& obj, Params* grad, double grad_scale = 1.0,
                  std::vector<double>* logprobs = nullptr,
                  std::vector<double>* entropies = nullptr) const;

  double value(const envs::Observation& obs) const;
  double value(const std::vector<FeatureKey>& obs_features) const;
  // Accumulates coef * dV/dparams into grad.
  void add_value_grad(const std::vector<FeatureKey>& obs_features, double coef, Params& grad) const;

 private:
  void recency_state(const std::vector<TokenId>& prefix, std::vector<double>& h) const;

  PolicyConfig cfg_;
  const Vocab* vocab_;
  Params params_;
};

// Repetition penalty: divide positive logits, multiply negative ones, for
// tokens already generated.
void apply_repetition_penalty(std::vector<double>& logits, const std::vector<TokenId>& generated,
                              double penalty);

std::vector<double> log_softmax(const std::vector<double>& logits);

// Eq. 2, summed left to right: lambda * log p for the first `thought_len`
// tokens, log p for the rest. With lambda = 1 this is the plain sum.
double combine_logprobs(const std::vector<double>& logprobs, std::size_t thought_len,
                        double thought_coef);

// Eq. 1: action string after the first "action:" marker, or a uniform sample
// from `legal` when the marker is missing or followed by nothing.
std::string extract_action(const Vocab& vocab, const std::vector<TokenId>& tokens,
                           const std::vector<std::string>& legal, Rng& rng);
// The parseable action after the marker, if any.
std::optional<std::string> parse_action(const Vocab& vocab, const std::vector<TokenId>& tokens);

// Splits a token sequence at the first "action:" marker.
void split_at_action(const Vocab& vocab, const std::vector<TokenId>& tokens,
                     std::vector<TokenId>& thought, std::vector<TokenId>& action);

}  // namespace gtr::policy
