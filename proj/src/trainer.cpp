#include "gtr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <set>

#include "gtr/card_envs.hpp"
#include "gtr/errors.hpp"
#include "gtr/miniworld.hpp"
#include "gtr/thought.hpp"

namespace gtr::train {

using corrector::ThoughtFields;

namespace {

json observation_to_json(const envs::Observation& obs) {
  return {{"task", envs::to_string(obs.task)}, {"symbols", obs.symbols}, {"history", obs.history}};
}

envs::Observation observation_from_json(const json& j) {
  envs::Observation obs;
  obs.task = envs::task_from_string(j.at("task").get<std::string>());
  obs.symbols = j.at("symbols");
  obs.history = j.value("history", std::vector<std::string>{});
  obs.prompt_text = envs::render_prompt(obs);
  return obs;
}

std::string fmt6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::vector<TokenId> with_action_marker(std::vector<TokenId> t, const Vocab& vocab) {
  t.push_back(vocab.action_marker());
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Records and rows

json ThoughtRecord::to_json(const Vocab& vocab) const {
  return {{"obs", observation_to_json(obs)}, {"thought", vocab.decode(tokens)}, {"iteration", iteration}};
}

ThoughtRecord ThoughtRecord::from_json(const json& j, const Vocab& vocab) {
  ThoughtRecord r;
  r.obs = observation_from_json(j.at("obs"));
  r.features = policy::encode_observation(r.obs);
  r.tokens = vocab.encode(j.at("thought").get<std::string>());
  r.iteration = j.value("iteration", 0);
  return r;
}

std::string MetricsRow::csv_header() {
  return "env_step,episodes,success_rate,mean_return,disc_return,ep_len,format_rate,"
         "thought_diversity,token_entropy,lr,mode,seed";
}

std::string MetricsRow::csv() const {
  char lr_buf[64];
  std::snprintf(lr_buf, sizeof lr_buf, "%.6e", lr);
  return std::to_string(env_step) + "," + std::to_string(episodes) + "," + fmt6(success_rate) + "," +
         fmt6(mean_return) + "," + fmt6(disc_return) + "," + fmt6(ep_len) + "," + fmt6(format_rate) +
         "," + fmt6(thought_diversity) + "," + fmt6(token_entropy) + "," + lr_buf + "," + mode + "," +
         std::to_string(seed);
}

MetricsRow summarize(const std::vector<EpisodeSummary>& window, double) {
  MetricsRow m;
  if (window.empty()) return m;
  std::set<std::string> distinct;
  double steps = 0, fmt = 0, ent = 0, tok = 0, n_thoughts = 0;
  for (const auto& e : window) {
    m.success_rate += e.success;
    m.mean_return += e.ret;
    m.disc_return += e.disc_ret;
    m.ep_len += e.length;
    steps += e.length;
    fmt += e.format_valid_steps;
    ent += e.thought_entropy;
    tok += e.thought_tokens;
    distinct.insert(e.thoughts.begin(), e.thoughts.end());
    n_thoughts += static_cast<double>(e.thoughts.size());
  }
  const double n = static_cast<double>(window.size());
  m.success_rate /= n;
  m.mean_return /= n;
  m.disc_return /= n;
  m.ep_len /= n;
  m.format_rate = steps > 0 ? fmt / steps : 0.0;
  m.thought_diversity = n_thoughts > 0 ? static_cast<double>(distinct.size()) / n_thoughts : 0.0;
  m.token_entropy = tok > 0 ? ent / tok : 0.0;
  return m;
}

json CorrectionLog::to_json(envs::Task task) const {
  json j = {{"episode_id", episode_id},
            {"step", step},
            {"evaluation", response.evaluation ? "YES" : "NO"},
            {"possible_solution",
             response.possible_solution ? json(*response.possible_solution ? "YES" : "NO") : json(nullptr)},
            {"target_formula", response.target_formula ? solver::join_formula(*response.target_formula)
                                                       : std::string("NOT DETERMINED")},
            {"fallback_used", response.fallback_used},
            {"latency_ms", latency_ms}};
  (void)task;
  return j;
}

json EvalReport::to_json() const {
  return {{"episodes", episodes},           {"success_rate", success_rate},
          {"mean_return", mean_return},     {"mean_disc_return", mean_disc_return},
          {"format_rate", format_rate},     {"thought_diversity", thought_diversity}};
}

std::unique_ptr<envs::Env> make_env(envs::Task task) {
  if (task == envs::Task::miniworld) return std::make_unique<miniworld::MiniWorldEnv>();
  return envs::make_card_env(task);
}

// ---------------------------------------------------------------------------
// Demonstrations and canonical thoughts

std::vector<TokenId> format_demonstration(const envs::Env& env, const envs::Observation& obs,
                                          const Vocab& vocab, Rng& rng) {
  const auto legal = env.legal_actions();
  const std::string next = legal[rng.index(legal.size())];
  ThoughtFields t;
  switch (obs.task) {
    case envs::Task::points24:
    case envs::Task::ezpoints: {
      t.recognized_cards = obs.symbols.at("shown").get<std::vector<int>>();
      const auto& cards = *t.recognized_cards;
      const std::string ops = obs.task == envs::Task::ezpoints ? "+-" : "+-*/";
      const int n_numbers = 1 + static_cast<int>(rng.index(cards.size()));
      solver::FormulaTokens f;
      for (int i = 0; i < n_numbers; ++i) {
        if (i) f.emplace_back(1, ops[rng.index(ops.size())]);
        f.push_back(std::to_string(cards[rng.index(cards.size())]));
      }
      t.proposed_formula = f;
      break;
    }
    case envs::Task::numberline:
      t.current_claim = obs.symbols.at("current").get<int>();
      t.target_claim = obs.symbols.at("target").get<int>();
      break;
    case envs::Task::blackjack:
      t.current_claim = obs.symbols.at("player_total").get<int>();
      t.target_claim = envs::card_points(obs.symbols.at("dealer_upcard").get<int>());
      break;
    case envs::Task::miniworld: {
      const auto& w = dynamic_cast<const miniworld::MiniWorldEnv&>(env);
      t.location_claim = w.state().agent_at;
      t.holding_claim = w.state().holding ? *w.state().holding : "nothing";
      t.subgoal_claim = w.next_subgoal_text();
      break;
    }
  }
  t.chosen_action = next;
  auto tokens = corrector::thought_to_tokens(obs.task, t, vocab);
  tokens.push_back(vocab.action_marker());
  for (const auto& w : split_words(next)) tokens.push_back(vocab.id(w));
  tokens.push_back(Vocab::kEos);
  return tokens;
}

std::vector<TokenId> canonical_thought(const envs::Env& env, const envs::Observation& obs,
                                       const Vocab& vocab) {
  corrector::CorrectionResponse r;
  const ThoughtFields empty;
  switch (obs.task) {
    case envs::Task::points24:
    case envs::Task::ezpoints: r = corrector::oracle_correct_cards(obs, empty, std::nullopt); break;
    case envs::Task::numberline: r = corrector::oracle_correct_numberline(obs, empty); break;
    case envs::Task::blackjack: r = corrector::oracle_correct_blackjack(obs, empty); break;
    case envs::Task::miniworld:
      r = corrector::oracle_correct_miniworld(dynamic_cast<const miniworld::MiniWorldEnv&>(env), empty);
      break;
  }
  return corrector::thought_to_tokens(obs.task, *r.correction, vocab);
}

double sft_agreement(const policy::Policy& pol, envs::Task task, int n, std::uint64_t seed) {
  if (n <= 0) return 0.0;
  auto env = make_env(task);
  policy::GenerationConfig greedy;
  greedy.greedy = true;
  greedy.max_len = 64;
  Rng unused(0);
  int agree = 0;
  for (int i = 0; i < n; ++i) {
    auto obs = env->reset(derive_seed(seed, "agreement", static_cast<std::uint64_t>(i)));
    Rng walk(derive_seed(seed, "agreement-walk", static_cast<std::uint64_t>(i)));
    // Advance along the corrector's own plan to reach mid-episode states.
    const int advance = static_cast<int>(walk.index(3));
    for (int s = 0; s < advance && !env->done(); ++s) {
      const auto fields =
          corrector::parse_thought(task, pol.vocab(), canonical_thought(*env, obs, pol.vocab()));
      if (!fields.chosen_action) break;
      obs = env->step_text(*fields.chosen_action).observation;
    }
    if (env->done()) obs = env->reset(derive_seed(seed, "agreement", static_cast<std::uint64_t>(i)));
    const auto want = canonical_thought(*env, obs, pol.vocab());
    const auto out = pol.generate(obs, greedy, unused);
    agree += out.thought_tokens == want;
  }
  return static_cast<double>(agree) / n;
}

EvalReport evaluate_policy(const policy::Policy& pol, envs::Task task, int episodes,
                           std::uint64_t seed, const policy::GenerationConfig& gen_in, double gamma,
                           bool truncation) {
  if (episodes <= 0) throw ConfigError("evaluation needs at least one episode");
  policy::GenerationConfig gen = gen_in;
  gen.greedy = true;
  auto env = make_env(task);
  env->set_truncation(truncation);
  std::vector<EpisodeSummary> eps;
  for (int e = 0; e < episodes; ++e) {
    auto obs = env->reset(derive_seed(seed, "eval-env", static_cast<std::uint64_t>(e)));
    Rng rng(derive_seed(seed, "eval-explore", static_cast<std::uint64_t>(e)));
    EpisodeSummary s;
    double disc = 1.0;
    while (!env->done()) {
      const auto out = pol.generate(obs, gen, rng);
      const auto tokens = out.tokens();
      const std::string action = policy::extract_action(pol.vocab(), tokens, env->legal_actions(), rng);
      const auto fmt = corrector::format_judge(pol.vocab(), tokens, 0.0);
      const auto res = env->step_text(action);
      s.ret += res.reward;
      s.disc_ret += disc * res.reward;
      disc *= gamma;
      ++s.length;
      s.format_valid_steps += fmt.valid;
      s.thoughts.push_back(pol.vocab().decode(out.thought_tokens));
      if (res.done) s.success = res.info.value("success", false);
      obs = res.observation;
    }
    eps.push_back(std::move(s));
  }
  const MetricsRow m = summarize(eps);
  EvalReport r;
  r.episodes = episodes;
  r.success_rate = m.success_rate;
  r.mean_return = m.mean_return;
  r.mean_disc_return = m.disc_return;
  r.format_rate = m.format_rate;
  r.thought_diversity = m.thought_diversity;
  return r;
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(RunConfig cfg, std::unique_ptr<corrector::Corrector> corr)
    : cfg_(std::move(cfg)), corrector_(std::move(corr)) {
  cfg_.validate();
  policy_ = std::make_unique<policy::Policy>(cfg_.policy, Vocab::global(),
                                             derive_seed(cfg_.seed, "policy-init"));
  if (!corrector_) {
    if (cfg_.corrector.remote)
      corrector_ = std::make_unique<corrector::RemoteCorrector>(cfg_.corrector.endpoint);
    else
      corrector_ = std::make_unique<corrector::OracleCorrector>();
  }
  env_ = make_env(cfg_.task);
  env_->set_truncation(cfg_.trainer.truncation_enabled());
  adam_m_ = policy::Params::zeros_like(policy_->params());
  adam_v_ = policy::Params::zeros_like(policy_->params());
}

void Trainer::restore(policy::Params params, long env_steps, int iteration, long episodes_started,
                      std::vector<ThoughtRecord> dataset) {
  policy_ = std::make_unique<policy::Policy>(cfg_.policy, Vocab::global(), std::move(params));
  env_steps_ = env_steps;
  iteration_ = iteration;
  next_episode_ = episodes_started;
  dataset_ = std::move(dataset);
}

void Trainer::warmup() {
  const auto& w = cfg_.warmup;
  if (w.steps <= 0) return;
  auto env = make_env(cfg_.task);
  const Vocab& vocab = policy_->vocab();
  Rng rng(derive_seed(cfg_.seed, "warmup"));
  std::uint64_t state_id = 0;
  for (int step = 0; step < w.steps; ++step) {
    std::vector<std::vector<policy::FeatureKey>> feats;
    std::vector<std::vector<TokenId>> seqs;
    for (int b = 0; b < w.batch; ++b) {
      auto obs = env->reset(derive_seed(cfg_.seed, "warmup-env", state_id++));
      const int advance = static_cast<int>(rng.index(3));
      for (int s = 0; s < advance && !env->done(); ++s) {
        const auto legal = env->legal_actions();
        const auto res = env->step_text(legal[rng.index(legal.size())]);
        if (res.done) break;
        obs = res.observation;
      }
      if (env->done()) obs = env->reset(derive_seed(cfg_.seed, "warmup-env", state_id++));
      feats.push_back(policy::encode_observation(obs));
      seqs.push_back(format_demonstration(*env, obs, vocab, rng));
    }
    std::vector<SftSample> batch;
    for (std::size_t i = 0; i < seqs.size(); ++i) batch.push_back({&feats[i], &seqs[i]});
    auto g = policy::Params::zeros_like(policy_->params());
    sft_loss(*policy_, batch, &g);
    policy_->params().add_scaled(g, -w.lr);
  }
}

std::size_t Trainer::collect_rollouts() {
  const auto& tc = cfg_.trainer;
  const Vocab& vocab = policy_->vocab();
  buffer_.clear();
  corrections_.clear();
  Rng sample_rng(derive_seed(cfg_.seed, "sampling", static_cast<std::uint64_t>(iteration_)));
  Rng explore_rng(derive_seed(cfg_.seed, "explore", static_cast<std::uint64_t>(iteration_)));
  const bool correcting = tc.mode != Mode::rl4vlm;

  std::vector<corrector::CorrectionRequest> requests;
  std::vector<std::size_t> request_transition;

  bool need_reset = true;
  std::uint64_t episode_id = 0;
  int step = 0;
  EpisodeSummary summary;
  double disc = 1.0;
  envs::Observation obs;

  while (static_cast<int>(buffer_.size()) < tc.buffer_size || !need_reset) {
    if (need_reset) {
      episode_id = static_cast<std::uint64_t>(next_episode_++);
      obs = env_->reset(derive_seed(cfg_.seed, "env", episode_id));
      step = 0;
      summary = {};
      summary.episode_id = episode_id;
      disc = 1.0;
      need_reset = false;
    }
    Transition tr;
    tr.episode_id = episode_id;
    tr.step = step;
    tr.snapshot = iteration_;
    tr.obs = obs;
    tr.features = policy::encode_observation(obs);
    const auto out = policy_->generate(obs, cfg_.generation, sample_rng, tc.thought_coef);
    tr.thought = out.thought_tokens;
    tr.action = out.action_tokens;
    tr.logprob_old = out.combined_logprob;
    tr.value_old = policy_->value(tr.features);
    for (std::size_t i = 0; i < out.thought_tokens.size(); ++i) tr.thought_entropy += out.token_entropies[i];

    const auto tokens = out.tokens();
    tr.extracted_action = policy::extract_action(vocab, tokens, env_->legal_actions(), explore_rng);
    const auto fmt = corrector::format_judge(vocab, tokens, tc.format_reward_value);
    tr.format_valid = fmt.valid;

    if (correcting) {
      corrector::CorrectionRequest req;
      req.episode_id = episode_id;
      req.step = step;
      req.obs = obs;
      req.thought = corrector::parse_thought(cfg_.task, vocab, out.thought_tokens);
      if (cfg_.task == envs::Task::miniworld) req.env = std::shared_ptr<const envs::Env>(env_->clone());
      requests.push_back(std::move(req));
      request_transition.push_back(buffer_.size());
    }

    const auto res = env_->step_text(tr.extracted_action);
    tr.reward = res.reward + fmt.reward;
    tr.truncated = res.truncated;
    // Truncations that resolve the outcome (card games) are terminal; the
    // others bootstrap with V(s_T) when configured.
    const bool bootstrap =
        res.truncated && tc.truncation_bootstrap && !res.info.value("resolved", false);
    tr.done = res.done && !bootstrap;
    if (bootstrap) tr.next_value = policy_->value(res.observation);
    ++env_steps_;

    summary.ret += tr.reward;
    summary.disc_ret += disc * tr.reward;
    disc *= tc.gamma;
    ++summary.length;
    summary.format_valid_steps += fmt.valid;
    summary.thoughts.push_back(vocab.decode(out.thought_tokens));
    summary.thought_entropy += tr.thought_entropy;
    summary.thought_tokens += static_cast<int>(out.thought_tokens.size());
    buffer_.push_back(std::move(tr));

    ++step;
    obs = res.observation;
    if (res.done) {
      summary.success = res.info.value("success", false);
      summary.truncated = res.truncated;
      episodes_.push_back(summary);
      need_reset = true;
    }
  }

  // Label thoughts: episodes in parallel, steps of one episode in order.
  std::vector<corrector::CorrectionResponse> responses(requests.size());
  std::vector<double> latency(requests.size(), 0.0);
  if (correcting && !requests.empty()) {
    std::map<std::uint64_t, std::vector<std::size_t>> by_episode;
    for (std::size_t i = 0; i < requests.size(); ++i) by_episode[requests[i].episode_id].push_back(i);
    auto run_episode = [&](const std::vector<std::size_t>& idx) {
      for (std::size_t i : idx) {
        const auto t0 = std::chrono::steady_clock::now();
        responses[i] = corrector_->correct(requests[i]);
        latency[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
      corrector_->end_episode(requests[idx.front()].episode_id);
    };
    const int lanes = cfg_.corrector.remote ? cfg_.corrector.endpoint.max_in_flight : 1;
    if (lanes <= 1) {
      for (const auto& [ep, idx] : by_episode) run_episode(idx);
    } else {
      std::vector<const std::vector<std::size_t>*> groups;
      for (const auto& [ep, idx] : by_episode) groups.push_back(&idx);
      for (std::size_t start = 0; start < groups.size(); start += static_cast<std::size_t>(lanes)) {
        std::vector<std::future<void>> inflight;
        for (std::size_t g = start; g < std::min(groups.size(), start + static_cast<std::size_t>(lanes)); ++g)
          inflight.push_back(std::async(std::launch::async, run_episode, std::cref(*groups[g])));
        for (auto& f : inflight) f.get();
      }
    }
  }

  if (!tc.dagger_aggregate) dataset_.clear();
  std::size_t added = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = responses[i];
    corrections_.push_back({requests[i].episode_id, requests[i].step, r, latency[i]});
    const Transition& tr = buffer_[request_transition[i]];
    ThoughtRecord rec;
    rec.obs = tr.obs;
    rec.features = tr.features;
    rec.iteration = iteration_;
    try {
      const ThoughtFields& fields = r.evaluation ? requests[i].thought : *r.correction;
      rec.tokens = with_action_marker(corrector::thought_to_tokens(cfg_.task, fields, vocab), vocab);
    } catch (const OutOfVocabulary&) {
      continue;  // a remote correction used words the policy cannot emit
    }
    dataset_.push_back(std::move(rec));
    ++added;
  }
  compute_advantages();
  return added;
}

void Trainer::compute_advantages() {
  const auto& tc = cfg_.trainer;
  const std::size_t n = buffer_.size();
  std::vector<double> rewards(n), values(n), next(n, 0.0);
  std::vector<bool> dones(n), cuts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = buffer_[i];
    rewards[i] = t.reward;
    values[i] = t.value_old;
    dones[i] = t.done;
    const bool last_of_episode = i + 1 == n || buffer_[i + 1].episode_id != t.episode_id;
    cuts[i] = last_of_episode;
    if (t.truncated) next[i] = t.next_value;
    else if (!last_of_episode) next[i] = buffer_[i + 1].value_old;
  }
  const auto gae = compute_gae(rewards, values, next, dones, cuts, tc.gamma, tc.gae_lambda);
  for (std::size_t i = 0; i < n; ++i) {
    buffer_[i].advantage = gae.advantages[i];
    buffer_[i].return_target = gae.returns[i];
  }
}

void Trainer::apply_gradient(const policy::Params& g_in, double lr) {
  const auto& tc = cfg_.trainer;
  const policy::Params* g = &g_in;
  policy::Params clipped;
  if (tc.max_grad_norm > 0) {
    const double norm = std::sqrt(g_in.dot(g_in));
    if (norm > tc.max_grad_norm) {
      clipped = g_in;
      clipped.scale(tc.max_grad_norm / norm);
      g = &clipped;
    }
  }
  if (!g->all_finite()) throw NonFiniteLoss("non-finite gradient");
  auto& p = policy_->params();
  if (tc.optimizer == OptimizerKind::sgd) {
    p.add_scaled(*g, -lr);
    return;
  }
  ++adam_t_;
  const double b1 = tc.adam_beta1, b2 = tc.adam_beta2, eps = tc.adam_eps;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
  auto step = [&](double& w, double& m, double& v, double gr) {
    m = b1 * m + (1 - b1) * gr;
    v = b2 * v + (1 - b2) * gr * gr;
    w -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
  };
  for (const auto& [k, row] : g->W) {
    auto& w = p.W[k];
    auto& m = adam_m_.W[k];
    auto& v = adam_v_.W[k];
    if (w.empty()) w.assign(p.vocab_size, 0.0);
    if (m.empty()) m.assign(p.vocab_size, 0.0);
    if (v.empty()) v.assign(p.vocab_size, 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) step(w[i], m[i], v[i], row[i]);
  }
  for (std::size_t i = 0; i < g->E.size(); ++i) step(p.E[i], adam_m_.E[i], adam_v_.E[i], g->E[i]);
  for (const auto& [k, gr] : g->value_w) step(p.value_w[k], adam_m_.value_w[k], adam_v_.value_w[k], gr);
  step(p.value_b, adam_m_.value_b, adam_v_.value_b, g->value_b);
}

void Trainer::update() {
  const auto& tc = cfg_.trainer;
  const Mode mode = tc.mode;
  if (buffer_.empty()) return;
  for (const auto& t : buffer_)
    if (t.snapshot != iteration_) throw Error("stale transition in the on-policy buffer");
  if (mode != Mode::rl4vlm && dataset_.empty()) return;

  std::vector<double> adv(buffer_.size());
  for (std::size_t i = 0; i < buffer_.size(); ++i) adv[i] = buffer_[i].advantage;
  if (tc.normalize_advantages && adv.size() > 1) {
    double mean = 0, var = 0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(adv.size());
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(adv.size()));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }

  const double lr = current_lr();
  Rng rng(derive_seed(cfg_.seed, "update", static_cast<std::uint64_t>(iteration_)));
  std::vector<std::size_t> order(buffer_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto mb = static_cast<std::size_t>(tc.minibatch_size);

  for (int epoch = 0; epoch < tc.ppo_epochs; ++epoch) {
    rng.shuffle(order);
    auto acc = policy::Params::zeros_like(policy_->params());
    int n_acc = 0;
    for (std::size_t start = 0; start < order.size(); start += mb) {
      std::vector<PpoSample> b;
      for (std::size_t i = start; i < std::min(order.size(), start + mb); ++i) {
        const auto& t = buffer_[order[i]];
        b.push_back({&t.features, &t.thought, &t.action, t.logprob_old, adv[order[i]], t.return_target});
      }
      std::vector<SftSample> d;
      if (mode != Mode::rl4vlm) {
        for (int k = 0; k < tc.dagger_batch; ++k) {
          const auto& r = dataset_[rng.index(dataset_.size())];
          d.push_back({&r.features, &r.tokens});
        }
      }
      combined_loss(mode, *policy_, b, d, tc, &acc);
      if (++n_acc == tc.grad_accum_steps || start + mb >= order.size()) {
        acc.scale(1.0 / n_acc);
        apply_gradient(acc, lr);
        acc = policy::Params::zeros_like(policy_->params());
        n_acc = 0;
      }
    }
  }
}

void Trainer::iterate() {
  collect_rollouts();
  update();
  ++iteration_;
}

MetricsRow Trainer::metrics() const {
  const auto& tc = cfg_.trainer;
  const std::size_t w = static_cast<std::size_t>(tc.metrics_window);
  const std::size_t start = episodes_.size() > w ? episodes_.size() - w : 0;
  std::vector<EpisodeSummary> window(episodes_.begin() + static_cast<long>(start), episodes_.end());
  MetricsRow m = summarize(window);
  m.env_step = env_steps_;
  m.episodes = next_episode_;
  m.lr = tc.lr.at(std::max(0, iteration_ - 1));
  m.mode = to_string(tc.mode);
  m.seed = cfg_.seed;
  return m;
}

}  // namespace gtr::train
