#include "gtr/remote_corrector.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "gtr/errors.hpp"

namespace gtr::corrector {

void CorrectorEndpoint::validate() const {
  if (base_url.empty()) throw ConfigError("corrector.base_url must not be empty");
  if (!(timeout > 0)) throw ConfigError("corrector.timeout must be > 0");
  if (max_retries < 0) throw ConfigError("corrector.max_retries must be >= 0");
  if (max_in_flight < 1) throw ConfigError("corrector.max_in_flight must be >= 1");
  if (max_text_len < 1) throw ConfigError("corrector.max_text_len must be >= 1");
}

json CorrectorEndpoint::to_json() const {
  return {{"base_url", base_url},       {"model_name", model_name},
          {"api_key_env", api_key_env}, {"timeout", timeout},
          {"max_retries", max_retries}, {"temperature", temperature},
          {"max_text_len", max_text_len}, {"max_in_flight", max_in_flight},
          {"fallback_to_oracle", fallback_to_oracle}, {"prompt_dir", prompt_dir}};
}

CorrectorEndpoint CorrectorEndpoint::from_json(const json& j) {
  CorrectorEndpoint e;
  for (const auto& [k, v] : j.items()) {
    if (k == "base_url") e.base_url = v.get<std::string>();
    else if (k == "model_name") e.model_name = v.get<std::string>();
    else if (k == "api_key_env") e.api_key_env = v.get<std::string>();
    else if (k == "timeout") e.timeout = v.get<double>();
    else if (k == "max_retries") e.max_retries = v.get<int>();
    else if (k == "temperature") e.temperature = v.get<double>();
    else if (k == "max_text_len") e.max_text_len = v.get<int>();
    else if (k == "max_in_flight") e.max_in_flight = v.get<int>();
    else if (k == "fallback_to_oracle") e.fallback_to_oracle = v.get<bool>();
    else if (k == "prompt_dir") e.prompt_dir = v.get<std::string>();
    else throw ConfigError("corrector.endpoint: unknown key '" + k + "'");
  }
  e.validate();
  return e;
}

PromptTemplate load_prompt(const std::string& prompt_dir, envs::Task task) {
  const std::string dir = prompt_dir.empty() ? std::string(GTR_DATA_DIR) + "/prompts" : prompt_dir;
  const std::string path = dir + "/" + envs::to_string(task) + ".json";
  std::ifstream is(path);
  if (!is) throw ConfigError("no corrector prompt for task " + envs::to_string(task) + " (" + path + ")");
  json j;
  try {
    is >> j;
    PromptTemplate p;
    p.system = j.at("system").get<std::string>();
    p.query = j.at("query").get<std::string>();
    p.correction_format = j.value("correction_format", std::string());
    p.tools = j.value("tools", json::array());
    return p;
  } catch (const json::exception& e) {
    throw ConfigError("malformed prompt file " + path + ": " + e.what());
  }
}

std::string fill_template(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) {
    const std::string key = "{{" + k + "}}";
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + v.size()))
      text.replace(pos, key.size(), v);
  }
  return text;
}

json build_request(const CorrectorEndpoint& ep, const PromptTemplate& prompt,
                   const CorrectionRequest& req, const std::optional<FormulaTokens>& episode_target) {
  std::map<std::string, std::string> values;
  values["observation"] = req.obs.prompt_text;
  values["thought"] = join_words(req.thought.raw);
  if (req.obs.symbols.contains("formula")) {
    values["current_formula"] = solver::join_formula(req.obs.symbols.at("formula").get<FormulaTokens>());
    values["target_formula"] = episode_target ? solver::join_formula(*episode_target) : "NOT DETERMINED";
  }
  if (req.obs.task == envs::Task::miniworld) {
    values["task"] = req.obs.symbols.at("task_text").get<std::string>();
    std::string hist, adm;
    for (const auto& h : req.obs.history) hist += (hist.empty() ? "" : "; ") + h;
    values["history"] = hist.empty() ? "none" : hist;
    if (req.env)
      for (const auto& a : req.env->legal_actions()) adm += (adm.empty() ? "" : "; ") + a;
    values["admissible"] = adm;
  }
  std::string query = fill_template(prompt.query, values);
  if (!prompt.correction_format.empty()) query += "\n" + prompt.correction_format;
  json body = {{"model", ep.model_name},
               {"temperature", ep.temperature},
               {"max_tokens", ep.max_text_len},
               {"messages", json::array({{{"role", "system"}, {"content", prompt.system}},
                                         {{"role", "user"}, {"content", query}}})}};
  if (!prompt.tools.empty()) body["tools"] = prompt.tools;
  return body;
}

std::string run_tool(const std::string& name, const json& arguments, envs::Task task) {
  if (name != "find_all_correct_formulas") throw SchemaViolation("unknown tool '" + name + "'");
  json args = arguments;
  if (args.is_string()) {
    try {
      args = json::parse(args.get<std::string>());
    } catch (const json::exception&) {
      throw SchemaViolation("tool arguments are not JSON");
    }
  }
  if (!args.is_object() || !args.contains("cards") || !args.at("cards").is_array())
    throw SchemaViolation("tool arguments need a 'cards' array");
  std::vector<int> values;
  for (const auto& c : args.at("cards")) {
    int r = 0;
    if (c.is_number_integer()) r = c.get<int>();
    else if (c.is_string()) {
      const auto s = c.get<std::string>();
      r = s == "A" ? 1 : s == "J" ? 11 : s == "Q" ? 12 : s == "K" ? 13 : std::atoi(s.c_str());
    }
    if (r < 1 || r > 13) throw SchemaViolation("tool card out of range");
    values.push_back(solver::effective_value(r));
  }
  std::vector<FormulaTokens> sols;
  if (task == envs::Task::ezpoints) {
    if (values.size() != 2) throw SchemaViolation("the 12-point tool takes two cards");
    sols = solver::find_all_correct_formulas_12(values);
  } else {
    if (values.size() != 4) throw SchemaViolation("the 24-point tool takes four cards");
    sols = solver::find_all_correct_formulas(values);
  }
  json out = json::array();
  for (const auto& f : sols) out.push_back(solver::join_formula(f));
  return json{{"formulas", out}}.dump();
}

json extract_json_object(const std::string& text) {
  const auto b = text.find('{');
  const auto e = text.rfind('}');
  if (b == std::string::npos || e == std::string::npos || e < b)
    throw SchemaViolation("no JSON object in corrector reply");
  try {
    return json::parse(text.substr(b, e - b + 1));
  } catch (const json::exception& ex) {
    throw SchemaViolation(std::string("corrector reply is not valid JSON: ") + ex.what());
  }
}

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // e.g. /v1
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', start);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

json post(const CorrectorEndpoint& ep, const std::string& key, const json& body) {
  const Url u = split_url(ep.base_url);
  httplib::Client cli(u.origin);
  const auto secs = static_cast<time_t>(ep.timeout);
  const auto usecs = static_cast<time_t>((ep.timeout - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers = {{"Authorization", "Bearer " + key}};
  auto res = cli.Post(u.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw EndpointUnavailable(ep.base_url + ": " + httplib::to_string(res.error()));
  if (res->status >= 500 || res->status == 429)
    throw EndpointUnavailable(ep.base_url + ": HTTP " + std::to_string(res->status));
  if (res->status != 200) throw SchemaViolation("HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("response body is not JSON: ") + e.what());
  }
}

constexpr int kMaxToolRounds = 4;

}  // namespace

CorrectionResponse remote_correct(const CorrectionRequest& req, const CorrectorEndpoint& ep,
                                  const std::optional<FormulaTokens>& episode_target) {
  const char* key = std::getenv(ep.api_key_env.c_str());
  if (!key || !*key) throw MissingApiKey(ep.api_key_env);
  const PromptTemplate prompt = load_prompt(ep.prompt_dir, req.obs.task);
  const json base = build_request(ep, prompt, req, episode_target);

  std::string last_error;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    json body = base;
    try {
      for (int round = 0;; ++round) {
        const json reply = post(ep, key, body);
        const json& msg = reply.at("choices").at(0).at("message");
        if (msg.contains("tool_calls") && !msg.at("tool_calls").is_null() && !msg.at("tool_calls").empty()) {
          if (round >= kMaxToolRounds) throw SchemaViolation("too many tool-call rounds");
          body["messages"].push_back(msg);
          for (const auto& call : msg.at("tool_calls")) {
            const auto& fn = call.at("function");
            body["messages"].push_back({{"role", "tool"},
                                        {"tool_call_id", call.value("id", std::string())},
                                        {"content", run_tool(fn.at("name").get<std::string>(),
                                                             fn.value("arguments", json::object()),
                                                             req.obs.task)}});
          }
          continue;
        }
        const std::string content = msg.at("content").is_string() ? msg.at("content").get<std::string>() : "";
        CorrectionResponse r = CorrectionResponse::from_json(req.obs.task, extract_json_object(content));
        r.retries = attempt;
        return r;
      }
    } catch (const SchemaViolation& e) {
      last_error = e.what();
    } catch (const json::exception& e) {
      last_error = std::string("malformed chat response: ") + e.what();
    }
  }
  throw SchemaViolation("corrector gave no valid reply after " + std::to_string(ep.max_retries + 1) +
                        " attempts: " + last_error);
}

RemoteCorrector::RemoteCorrector(CorrectorEndpoint ep) : ep_(std::move(ep)) { ep_.validate(); }

CorrectionResponse RemoteCorrector::correct(const CorrectionRequest& req) {
  std::optional<FormulaTokens> target;
  {
    std::lock_guard lock(mu_);
    auto it = targets_.find(req.episode_id);
    if (it != targets_.end()) target = it->second;
  }
  CorrectionResponse r;
  try {
    r = remote_correct(req, ep_, target);
  } catch (const SchemaViolation&) {
    if (!ep_.fallback_to_oracle) throw;
    r = oracle_.correct(req);
    r.fallback_used = true;
    r.retries = ep_.max_retries;
  } catch (const EndpointUnavailable&) {
    if (!ep_.fallback_to_oracle) throw;
    r = oracle_.correct(req);
    r.fallback_used = true;
  }
  if (r.target_formula) {
    std::lock_guard lock(mu_);
    targets_[req.episode_id] = *r.target_formula;
  }
  return r;
}

void RemoteCorrector::end_episode(std::uint64_t episode_id) {
  oracle_.end_episode(episode_id);
  std::lock_guard lock(mu_);
  targets_.erase(episode_id);
}

}  // namespace gtr::corrector
