#pragma once

// Chat-completion client for an external corrector model.
//
// POST {base_url}/chat/completions with
//   {"model", "temperature", "max_tokens", "messages": [system, user], "tools": [...]}
// Tool calls in the reply are answered locally and the conversation is sent
// again; the final assistant content must hold the correction JSON.

#include <functional>
#include <string>

#include <json.hpp>

#include "gtr/corrector.hpp"

namespace gtr::corrector {

struct CorrectorEndpoint {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name = "gpt-4o";
  std::string api_key_env = "GTR_CORRECTOR_API_KEY";
  double timeout = 60.0;  // seconds
  int max_retries = 2;
  double temperature = 0.4;
  int max_text_len = 600;
  int max_in_flight = 4;
  bool fallback_to_oracle = true;
  std::string prompt_dir;  // empty: the repository's data/prompts

  void validate() const;  // throws ConfigError
  json to_json() const;
  static CorrectorEndpoint from_json(const json& j);
};

struct PromptTemplate {
  std::string system;
  std::string query;
  std::string correction_format;
  json tools = json::array();
};

PromptTemplate load_prompt(const std::string& prompt_dir, envs::Task task);

// Replaces every "{{key}}" in `text`.
std::string fill_template(std::string text, const std::map<std::string, std::string>& values);

// Chat request body for one correction.
json build_request(const CorrectorEndpoint& ep, const PromptTemplate& prompt,
                   const CorrectionRequest& req, const std::optional<FormulaTokens>& episode_target);

// Local implementation of the declared tool. `arguments` is the JSON object
// (or its string encoding) sent by the model.
std::string run_tool(const std::string& name, const json& arguments, envs::Task task);

// Pulls the first JSON object out of assistant text (tolerates code fences).
json extract_json_object(const std::string& text);

// One remote correction. Throws MissingApiKey, EndpointUnavailable and, once
// retries are exhausted, SchemaViolation.
CorrectionResponse remote_correct(const CorrectionRequest& req, const CorrectorEndpoint& ep,
                                  const std::optional<FormulaTokens>& episode_target);

class RemoteCorrector : public Corrector {
 public:
  explicit RemoteCorrector(CorrectorEndpoint ep);
  CorrectionResponse correct(const CorrectionRequest& req) override;
  void end_episode(std::uint64_t episode_id) override;
  const CorrectorEndpoint& endpoint() const { return ep_; }

 private:
  CorrectorEndpoint ep_;
  OracleCorrector oracle_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, FormulaTokens> targets_;
};

}  // namespace gtr::corrector
