#include "gtr/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gtr/errors.hpp"

namespace gtr::policy {

json PolicyConfig::to_json() const {
  return {{"hash_bits", hash_bits}, {"embed_dim", embed_dim}, {"recency", recency},
          {"init_scale", init_scale}};
}

PolicyConfig PolicyConfig::from_json(const json& j) {
  PolicyConfig c;
  for (const auto& [k, v] : j.items()) {
    if (k == "hash_bits") c.hash_bits = v.get<int>();
    else if (k == "embed_dim") c.embed_dim = v.get<int>();
    else if (k == "recency") c.recency = v.get<double>();
    else if (k == "init_scale") c.init_scale = v.get<double>();
    else throw ConfigError("policy: unknown key '" + k + "'");
  }
  if (c.hash_bits < 8 || c.hash_bits > 30) throw ConfigError("policy.hash_bits must be in [8, 30]");
  if (c.embed_dim < 0) throw ConfigError("policy.embed_dim must be >= 0");
  if (c.recency < 0 || c.recency >= 1) throw ConfigError("policy.recency must be in [0, 1)");
  return c;
}

void GenerationConfig::validate() const {
  if (!(temperature > 0)) throw ConfigError("generation.temperature must be > 0");
  if (!(repetition_penalty >= 1)) throw ConfigError("generation.repetition_penalty must be >= 1");
  if (max_len < 8) throw ConfigError("generation.max_len must be >= 8");
}

json GenerationConfig::to_json() const {
  return {{"max_len", max_len}, {"temperature", temperature},
          {"repetition_penalty", repetition_penalty}, {"greedy", greedy}};
}

GenerationConfig GenerationConfig::from_json(const json& j) {
  GenerationConfig g;
  for (const auto& [k, v] : j.items()) {
    if (k == "max_len") g.max_len = v.get<int>();
    else if (k == "temperature") g.temperature = v.get<double>();
    else if (k == "repetition_penalty") g.repetition_penalty = v.get<double>();
    else if (k == "greedy") g.greedy = v.get<bool>();
    else throw ConfigError("generation: unknown key '" + k + "'");
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Params

Params Params::zeros_like(const Params& p) {
  Params z;
  z.vocab_size = p.vocab_size;
  z.embed_dim = p.embed_dim;
  z.E.assign(p.E.size(), 0.0);
  return z;
}

void Params::add_scaled(const Params& g, double s) {
  for (const auto& [k, row] : g.W) {
    auto& dst = W[k];
    if (dst.empty()) dst.assign(vocab_size, 0.0);
    for (std::size_t v = 0; v < row.size(); ++v) dst[v] += s * row[v];
  }
  for (std::size_t i = 0; i < g.E.size(); ++i) E[i] += s * g.E[i];
  for (const auto& [k, w] : g.value_w) value_w[k] += s * w;
  value_b += s * g.value_b;
}

void Params::scale(double s) {
  for (auto& [k, row] : W)
    for (double& x : row) x *= s;
  for (double& x : E) x *= s;
  for (auto& [k, w] : value_w) w *= s;
  value_b *= s;
}

double Params::dot(const Params& o) const {
  double acc = 0.0;
  for (const auto& [k, row] : W) {
    auto it = o.W.find(k);
    if (it == o.W.end()) continue;
    for (std::size_t v = 0; v < row.size(); ++v) acc += row[v] * it->second[v];
  }
  for (std::size_t i = 0; i < E.size() && i < o.E.size(); ++i) acc += E[i] * o.E[i];
  for (const auto& [k, w] : value_w) {
    auto it = o.value_w.find(k);
    if (it != o.value_w.end()) acc += w * it->second;
  }
  return acc + value_b * o.value_b;
}

bool Params::all_finite() const {
  auto fin = [](double x) { return std::isfinite(x); };
  for (const auto& [k, row] : W)
    if (!std::all_of(row.begin(), row.end(), fin)) return false;
  if (!std::all_of(E.begin(), E.end(), fin)) return false;
  for (const auto& [k, w] : value_w)
    if (!fin(w)) return false;
  return fin(value_b);
}

std::size_t Params::nonzero_rows() const {
  std::size_t n = 0;
  for (const auto& [k, row] : W)
    n += std::any_of(row.begin(), row.end(), [](double x) { return x != 0.0; });
  return n;
}

std::vector<TokenId> PolicyOutput::tokens() const {
  std::vector<TokenId> t = thought_tokens;
  t.insert(t.end(), action_tokens.begin(), action_tokens.end());
  return t;
}

// ---------------------------------------------------------------------------
// Helpers

std::vector<double> log_softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - m);
  const double lz = m + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lz;
  return out;
}

void apply_repetition_penalty(std::vector<double>& logits, const std::vector<TokenId>& generated,
                              double penalty) {
  if (penalty == 1.0) return;
  std::vector<bool> seen(logits.size(), false);
  for (TokenId t : generated) seen[static_cast<std::size_t>(t)] = true;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    if (!seen[v]) continue;
    logits[v] = logits[v] > 0 ? logits[v] / penalty : logits[v] * penalty;
  }
}

void split_at_action(const Vocab& vocab, const std::vector<TokenId>& tokens,
                     std::vector<TokenId>& thought, std::vector<TokenId>& action) {
  auto it = std::find(tokens.begin(), tokens.end(), vocab.action_marker());
  thought.assign(tokens.begin(), it);
  action.assign(it, tokens.end());
}

std::optional<std::string> parse_action(const Vocab& vocab, const std::vector<TokenId>& tokens) {
  auto it = std::find(tokens.begin(), tokens.end(), vocab.action_marker());
  if (it == tokens.end()) return std::nullopt;
  std::vector<std::string> words;
  for (++it; it != tokens.end() && *it != Vocab::kEos; ++it) words.push_back(vocab.token(*it));
  if (words.empty()) return std::nullopt;
  return join_words(words);
}

double combine_logprobs(const std::vector<double>& logprobs, std::size_t thought_len,
                        double thought_coef) {
  double total = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i)
    total += i < thought_len ? thought_coef * logprobs[i] : logprobs[i];
  return total;
}

std::string extract_action(const Vocab& vocab, const std::vector<TokenId>& tokens,
                           const std::vector<std::string>& legal, Rng& rng) {
  if (auto a = parse_action(vocab, tokens)) return *a;
  if (legal.empty()) throw Error("extract_action: empty legal action set");
  return legal[rng.index(legal.size())];
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(PolicyConfig cfg, const Vocab& vocab, std::uint64_t init_seed)
    : cfg_(cfg), vocab_(&vocab) {
  params_.vocab_size = vocab.size();
  params_.embed_dim = cfg.embed_dim;
  params_.E.resize(vocab.size() * static_cast<std::size_t>(cfg.embed_dim));
  Rng rng(init_seed);
  for (double& x : params_.E) x = rng.normal(0.0, cfg.init_scale);
}

Policy::Policy(PolicyConfig cfg, const Vocab& vocab, Params params)
    : cfg_(cfg), vocab_(&vocab), params_(std::move(params)) {
  if (params_.vocab_size != vocab.size() || params_.embed_dim != cfg.embed_dim ||
      params_.E.size() != vocab.size() * static_cast<std::size_t>(cfg.embed_dim))
    throw ConfigError("policy parameters do not match vocabulary/config dimensions");
}

namespace {

// Logits from context rows and the recency state.
void compute_logits(const Params& p, const std::vector<const std::vector<double>*>& rows,
                    const std::vector<double>& h, std::vector<double>& logits) {
  const std::size_t V = p.vocab_size;
  const auto d = static_cast<std::size_t>(p.embed_dim);
  logits.assign(V, 0.0);
  for (const auto* row : rows)
    for (std::size_t v = 0; v < V; ++v) logits[v] += (*row)[v];
  if (d == 0) return;
  for (std::size_t v = 0; v < V; ++v) {
    double acc = 0.0;
    const double* e = &p.E[v * d];
    for (std::size_t k = 0; k < d; ++k) acc += e[k] * h[k];
    logits[v] += acc;
  }
}

void advance_recency(const Params& p, double a, TokenId y, std::vector<double>& h) {
  const auto d = static_cast<std::size_t>(p.embed_dim);
  const double* e = &p.E[static_cast<std::size_t>(y) * d];
  for (std::size_t k = 0; k < d; ++k) h[k] = a * h[k] + (1.0 - a) * e[k];
}

}  // namespace

void Policy::recency_state(const std::vector<TokenId>& prefix, std::vector<double>& h) const {
  h.assign(static_cast<std::size_t>(cfg_.embed_dim), 0.0);
  for (TokenId y : prefix) advance_recency(params_, cfg_.recency, y, h);
}

std::vector<double> Policy::next_token_logits(const std::vector<FeatureKey>& obs_features,
                                              const std::vector<TokenId>& prefix) const {
  std::vector<const std::vector<double>*> rows;
  for (FeatureKey k : context_features(*vocab_, obs_features, prefix)) {
    auto it = params_.W.find(bucket(k));
    if (it != params_.W.end()) rows.push_back(&it->second);
  }
  std::vector<double> h, logits;
  recency_state(prefix, h);
  compute_logits(params_, rows, h, logits);
  return logits;
}

PolicyOutput Policy::generate(const envs::Observation& obs, const GenerationConfig& gen, Rng& rng,
                              double thought_coef) const {
  const auto feats = encode_observation(obs);
  std::vector<TokenId> seq;
  std::vector<double> logps, ents, h(static_cast<std::size_t>(cfg_.embed_dim), 0.0), logits;
  std::vector<const std::vector<double>*> rows;
  while (static_cast<int>(seq.size()) < gen.max_len) {
    rows.clear();
    for (FeatureKey k : context_features(*vocab_, feats, seq)) {
      auto it = params_.W.find(bucket(k));
      if (it != params_.W.end()) rows.push_back(&it->second);
    }
    compute_logits(params_, rows, h, logits);
    const auto ls = log_softmax(logits);

    std::vector<double> z = logits;
    apply_repetition_penalty(z, seq, gen.repetition_penalty);
    TokenId y = 0;
    if (gen.greedy) {
      y = static_cast<TokenId>(std::max_element(z.begin(), z.end()) - z.begin());
    } else {
      for (double& x : z) x /= gen.temperature;
      const auto lz = log_softmax(z);
      double u = rng.uniform01();
      y = static_cast<TokenId>(lz.size() - 1);
      for (std::size_t v = 0; v < lz.size(); ++v) {
        u -= std::exp(lz[v]);
        if (u < 0) {
          y = static_cast<TokenId>(v);
          break;
        }
      }
    }
    double H = 0.0;
    for (double l : ls) H -= std::exp(l) * l;
    logps.push_back(ls[static_cast<std::size_t>(y)]);
    ents.push_back(H);
    seq.push_back(y);
    advance_recency(params_, cfg_.recency, y, h);
    if (y == Vocab::kEos) break;
  }

  PolicyOutput out;
  split_at_action(*vocab_, seq, out.thought_tokens, out.action_tokens);
  out.token_logprobs = std::move(logps);
  out.token_entropies = std::move(ents);
  out.combined_logprob =
      combine_logprobs(out.token_logprobs, out.thought_tokens.size(), thought_coef);
  return out;
}

double Policy::evaluate(const std::vector<FeatureKey>& obs_features,
                        const std::vector<TokenId>& tokens, const SequenceObjective& obj,
                        Params* grad, double grad_scale, std::vector<double>* logprobs,
                        std::vector<double>* entropies) const {
  const std::size_t V = params_.vocab_size;
  const auto d = static_cast<std::size_t>(cfg_.embed_dim);
  const double a = cfg_.recency;
  std::vector<TokenId> prefix;
  std::vector<double> h(d, 0.0), logits;
  std::vector<const std::vector<double>*> rows;
  std::vector<std::uint32_t> keys;
  std::vector<std::vector<double>> dh_hist;  // dJ/dh_t, for the embedding backward pass
  if (grad) dh_hist.reserve(tokens.size());
  double J = 0.0;
  if (logprobs) logprobs->clear();
  if (entropies) entropies->clear();

  for (std::size_t t = 0; t < tokens.size(); ++t) {
    rows.clear();
    keys.clear();
    for (FeatureKey k : context_features(*vocab_, obs_features, prefix)) {
      const auto b = bucket(k);
      keys.push_back(b);
      auto it = params_.W.find(b);
      if (it != params_.W.end()) rows.push_back(&it->second);
    }
    compute_logits(params_, rows, h, logits);
    const auto ls = log_softmax(logits);
    const auto y = static_cast<std::size_t>(tokens[t]);
    double H = 0.0;
    for (double l : ls) H -= std::exp(l) * l;
    const double cl = t < obj.logp_coef.size() ? obj.logp_coef[t] : 0.0;
    const double ce = t < obj.ent_coef.size() ? obj.ent_coef[t] : 0.0;
    J += cl * ls[y] + ce * H;
    if (logprobs) logprobs->push_back(ls[y]);
    if (entropies) entropies->push_back(H);

    if (grad && (cl != 0.0 || ce != 0.0)) {
      std::vector<double> dz(V);
      for (std::size_t v = 0; v < V; ++v) {
        const double p = std::exp(ls[v]);
        dz[v] = grad_scale * (-cl * p - ce * p * (ls[v] + H));
      }
      dz[y] += grad_scale * cl;
      for (auto b : keys) {
        auto& row = grad->W[b];
        if (row.empty()) row.assign(V, 0.0);
        for (std::size_t v = 0; v < V; ++v) row[v] += dz[v];
      }
      std::vector<double> dh(d, 0.0);
      for (std::size_t v = 0; v < V && d > 0; ++v) {
        const double* e = &params_.E[v * d];
        double* ge = &grad->E[v * d];
        for (std::size_t k = 0; k < d; ++k) {
          ge[k] += dz[v] * h[k];
          dh[k] += dz[v] * e[k];
        }
      }
      dh_hist.push_back(std::move(dh));
    } else if (grad) {
      dh_hist.emplace_back(d, 0.0);
    }
    prefix.push_back(tokens[t]);
    advance_recency(params_, a, tokens[t], h);
  }

  // h_t = sum_{j<t} (1-a) a^(t-1-j) E[y_j]; push dJ/dh_t back to the embeddings.
  if (grad && d > 0) {
    std::vector<double> carry(d, 0.0);  // sum_{t>j} a^(t-1-j) dh_t, built right to left
    for (std::size_t j = tokens.size(); j-- > 0;) {
      // carry currently holds sum_{t>j+1} a^(t-2-j) dh_t; fold in dh_{j+1}.
      if (j + 1 < tokens.size()) {
        for (std::size_t k = 0; k < d; ++k) carry[k] = a * carry[k] + dh_hist[j + 1][k];
      }
      double* ge = &grad->E[static_cast<std::size_t>(tokens[j]) * d];
      for (std::size_t k = 0; k < d; ++k) ge[k] += (1.0 - a) * carry[k];
    }
  }
  return J;
}

double Policy::sequence_logprob(const envs::Observation& obs, const std::vector<TokenId>& thought,
                                const std::vector<TokenId>& action, double thought_coef) const {
  std::vector<TokenId> seq = thought;
  seq.insert(seq.end(), action.begin(), action.end());
  std::vector<double> lp;
  evaluate(encode_observation(obs), seq, {}, nullptr, 1.0, &lp, nullptr);
  return combine_logprobs(lp, thought.size(), thought_coef);
}

Params Policy::grad_sequence_logprob(const envs::Observation& obs,
                                     const std::vector<TokenId>& thought,
                                     const std::vector<TokenId>& action,
                                     double thought_coef) const {
  std::vector<TokenId> seq = thought;
  seq.insert(seq.end(), action.begin(), action.end());
  SequenceObjective obj;
  obj.logp_coef.assign(seq.size(), 1.0);
  std::fill(obj.logp_coef.begin(), obj.logp_coef.begin() + static_cast<long>(thought.size()),
            thought_coef);
  Params g = Params::zeros_like(params_);
  evaluate(encode_observation(obs), seq, obj, &g);
  return g;
}

double Policy::value(const envs::Observation& obs) const { return value(encode_observation(obs)); }

// Features are averaged (bias included) so the curvature of the squared value
// error does not grow with the number of active features.
double Policy::value(const std::vector<FeatureKey>& obs_features) const {
  double v = params_.value_b;
  for (FeatureKey k : obs_features) {
    auto it = params_.value_w.find(bucket(k));
    if (it != params_.value_w.end()) v += it->second;
  }
  return v / static_cast<double>(obs_features.size() + 1);
}

void Policy::add_value_grad(const std::vector<FeatureKey>& obs_features, double coef,
                            Params& grad) const {
  const double c = coef / static_cast<double>(obs_features.size() + 1);
  grad.value_b += c;
  for (FeatureKey k : obs_features) grad.value_w[bucket(k)] += c;
}

}  // namespace gtr::policy
