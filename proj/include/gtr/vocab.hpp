#pragma once

// Fixed token vocabulary shared by every task. Text is tokenized by splitting
// on whitespace; each piece must be a vocabulary entry.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gtr {

using TokenId = std::int32_t;

class Vocab {
 public:
  static constexpr TokenId kEos = 0;

  explicit Vocab(std::vector<std::string> tokens);
  static const Vocab& global();

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view token) const;  // throws OutOfVocabulary
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t hash() const { return hash_; }

  TokenId thought_marker() const { return thought_; }
  TokenId action_marker() const { return action_; }

  std::vector<TokenId> encode(std::string_view text) const;
  std::vector<TokenId> encode(const std::vector<std::string>& words) const;
  std::string decode(const std::vector<TokenId>& ids) const;  // space-joined, eos dropped

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::uint64_t hash_ = 0;
  TokenId thought_ = -1;
  TokenId action_ = -1;
};

std::vector<std::string> split_words(std::string_view text);
std::string join_words(const std::vector<std::string>& words);

}  // namespace gtr
