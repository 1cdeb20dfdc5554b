#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "gtr/checkpoint.hpp"
#include "gtr/errors.hpp"

using namespace gtr;
using namespace gtr::policy;

namespace {

const char* kThought = "thought: cards 2 3 4 1 ; formula 2 * 3 * 4 * 1 ; next 2";

}  // namespace

TEST_CASE("sequence objective gradient matches finite differences") {
  const auto obs = fixture::points24_obs();
  const auto seq = fixture::tokens_of(std::string(kThought) + " action: 2");
  auto pol = fixture::random_policy(obs, seq);
  const auto feats = encode_observation(obs);
  SequenceObjective obj;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    obj.logp_coef.push_back(0.5 + 0.1 * static_cast<double>(t % 3));
    obj.ent_coef.push_back(t % 2 ? 0.2 : -0.1);
  }
  Params g = Params::zeros_like(pol.params());
  pol.evaluate(feats, seq, obj, &g);
  const double err = fixture::finite_difference_error(
      pol, g, [&] { return pol.evaluate(feats, seq, obj, nullptr); });
  CHECK(err < 1e-4);
}

TEST_CASE("value gradient matches finite differences") {
  const auto obs = fixture::points24_obs();
  auto pol = fixture::random_policy(obs, {});
  const auto feats = encode_observation(obs);
  Params g = Params::zeros_like(pol.params());
  pol.add_value_grad(feats, 1.0, g);
  const double err = fixture::finite_difference_error(pol, g, [&] { return pol.value(feats); });
  CHECK(err < 1e-4);
}

TEST_CASE("combined log-likelihood is lambda times thought plus action") {
  const auto obs = fixture::points24_obs();
  const auto thought = fixture::tokens_of(kThought);
  auto action = fixture::tokens_of("action: 2");
  action.push_back(Vocab::kEos);
  auto seq = thought;
  seq.insert(seq.end(), action.begin(), action.end());
  const auto pol = fixture::random_policy(obs, seq);

  std::vector<double> lp;
  pol.evaluate(encode_observation(obs), seq, {}, nullptr, 1.0, &lp);
  double a = 0.0, b = 0.0, plain = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    (i < thought.size() ? a : b) += lp[i];
    plain += lp[i];
  }
  CHECK(pol.sequence_logprob(obs, thought, action, 1.0) == plain);
  for (double lambda : {0.0, 0.3, 1.0}) {
    CHECK(pol.sequence_logprob(obs, thought, action, lambda) ==
          doctest::Approx(lambda * a + b).epsilon(1e-13));
  }
}

TEST_CASE("generation log-probs replay exactly") {
  const auto obs = fixture::points24_obs();
  const auto pol = fixture::random_policy(obs, fixture::tokens_of(kThought));
  GenerationConfig gen;
  gen.max_len = 40;
  gen.temperature = 1.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(s);
    const auto out = pol.generate(obs, gen, rng, 0.5);
    CHECK(pol.sequence_logprob(obs, out.thought_tokens, out.action_tokens, 0.5) ==
          out.combined_logprob);
  }
}

TEST_CASE("generation is deterministic in the rng") {
  const auto obs = fixture::points24_obs();
  const auto pol = fixture::random_policy(obs, fixture::tokens_of(kThought));
  GenerationConfig gen;
  Rng a(9), b(9);
  CHECK(pol.generate(obs, gen, a).tokens() == pol.generate(obs, gen, b).tokens());
}

TEST_CASE("action extraction") {
  const auto& vocab = Vocab::global();
  Rng rng(1);
  const std::vector<std::string> legal{"1", "2", "+"};
  CHECK(extract_action(vocab, fixture::tokens_of("thought: next 2 action: 3"), legal, rng) == "3");
  auto with_eos = fixture::tokens_of("action: +");
  with_eos.push_back(Vocab::kEos);
  with_eos.push_back(vocab.id("7"));
  CHECK(extract_action(vocab, with_eos, legal, rng) == "+");
  CHECK(extract_action(vocab, fixture::tokens_of("action: 1 action: 2"), legal, rng) == "1 action: 2");

  std::map<std::string, int> counts;
  for (int i = 0; i < 3000; ++i)
    ++counts[extract_action(vocab, fixture::tokens_of("thought: next 2"), legal, rng)];
  CHECK(counts.size() == 3);
  for (const auto& [a, n] : counts) CHECK(std::abs(n - 1000) < 120);
  CHECK(extract_action(vocab, fixture::tokens_of("action:"), {"2"}, rng) == "2");
}

TEST_CASE("repetition penalty") {
  std::vector<double> z{2.0, -2.0, 1.0};
  apply_repetition_penalty(z, {0, 1}, 2.0);
  CHECK(z == std::vector<double>{1.0, -4.0, 1.0});
}

TEST_CASE("log_softmax of equal logits is uniform") {
  const auto ls = log_softmax(std::vector<double>(8, 3.0));
  for (double l : ls) CHECK(l == doctest::Approx(-std::log(8.0)));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto obs = fixture::points24_obs();
  const auto pol = fixture::random_policy(obs, fixture::tokens_of(kThought));
  const auto path = std::filesystem::temp_directory_path() / "gtr_policy_ckpt.json";
  save_checkpoint(path.string(), pol, {{"env_step", 12}});
  const auto ck = load_checkpoint(path.string(), Vocab::global());
  std::filesystem::remove(path);
  CHECK(ck.meta["env_step"] == 12);
  CHECK(ck.params.E == pol.params().E);
  CHECK(ck.params.value_b == pol.params().value_b);
  CHECK(ck.params.value_w == pol.params().value_w);
  std::size_t rows = 0;
  for (const auto& [b, row] : pol.params().W) {
    if (std::all_of(row.begin(), row.end(), [](double x) { return x == 0.0; })) continue;
    ++rows;
    REQUIRE(ck.params.W.count(b));
    CHECK(ck.params.W.at(b) == row);
  }
  CHECK(ck.params.W.size() == rows);

  auto j = checkpoint_to_json(pol, {});
  j["vocab_hash"] = "0000000000000000";
  CHECK_THROWS_AS(checkpoint_from_json(j, Vocab::global()), ConfigError);
}

TEST_CASE("generation config validation") {
  GenerationConfig g;
  g.temperature = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = {};
  g.max_len = 0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}
