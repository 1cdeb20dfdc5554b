#include "gtr/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gtr/errors.hpp"

namespace gtr::policy {

namespace {
constexpr int kVersion = 1;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

json checkpoint_to_json(const Policy& policy, const json& meta) {
  const Params& p = policy.params();
  json j;
  j["format"] = "gtr-checkpoint";
  j["version"] = kVersion;
  j["vocab_hash"] = hex64(policy.vocab().hash());
  j["vocab_size"] = p.vocab_size;
  j["policy"] = policy.config().to_json();
  j["meta"] = meta;
  j["E"] = p.E;
  j["value_b"] = p.value_b;

  std::vector<std::uint32_t> keys;
  for (const auto& [k, w] : p.value_w)
    if (w != 0.0) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  json vw = json::array();
  for (auto k : keys) vw.push_back({k, p.value_w.at(k)});
  j["value_w"] = std::move(vw);

  keys.clear();
  for (const auto& [k, row] : p.W)
    if (std::any_of(row.begin(), row.end(), [](double x) { return x != 0.0; })) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  json W = json::array();
  for (auto k : keys) W.push_back({k, p.W.at(k)});
  j["W"] = std::move(W);
  return j;
}

Checkpoint checkpoint_from_json(const json& j, const Vocab& vocab) {
  Checkpoint c;
  try {
    if (j.at("format") != "gtr-checkpoint") throw ConfigError("not a checkpoint file");
    if (j.at("version").get<int>() != kVersion)
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    if (j.at("vocab_hash").get<std::string>() != hex64(vocab.hash()) ||
        j.at("vocab_size").get<std::size_t>() != vocab.size())
      throw ConfigError("checkpoint vocabulary does not match this build");
    c.config = PolicyConfig::from_json(j.at("policy"));
    c.meta = j.value("meta", json::object());
    Params& p = c.params;
    p.vocab_size = vocab.size();
    p.embed_dim = c.config.embed_dim;
    p.E = j.at("E").get<std::vector<double>>();
    if (p.E.size() != p.vocab_size * static_cast<std::size_t>(p.embed_dim))
      throw ConfigError("checkpoint embedding size mismatch");
    p.value_b = j.at("value_b").get<double>();
    for (const auto& e : j.at("value_w")) p.value_w[e.at(0).get<std::uint32_t>()] = e.at(1).get<double>();
    for (const auto& e : j.at("W")) {
      auto row = e.at(1).get<std::vector<double>>();
      if (row.size() != p.vocab_size) throw ConfigError("checkpoint row size mismatch");
      p.W[e.at(0).get<std::uint32_t>()] = std::move(row);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::string& path, const Policy& policy, const json& meta) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw Error("cannot write checkpoint '" + path + "'");
    os << checkpoint_to_json(policy, meta).dump();
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path, const Vocab& vocab) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j, vocab);
}

}  // namespace gtr::policy
