#pragma once

#include <stdexcept>
#include <string>

namespace gtr {

// Base for every error raised by the library. Callers that only care about
// "something in gtr failed" can catch this.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedExpression : Error {
  using Error::Error;
};

struct DivisionByZero : Error {
  DivisionByZero() : Error("division by zero") {}
};

struct UnknownToken : Error {
  explicit UnknownToken(const std::string& token)
      : Error("unknown token '" + token + "'"), token(token) {}
  std::string token;
};

struct EpisodeDone : Error {
  EpisodeDone() : Error("step called on a finished episode") {}
};

struct UnsolvableScene : Error {
  using Error::Error;
};

struct OutOfVocabulary : Error {
  explicit OutOfVocabulary(const std::string& word)
      : Error("word not in vocabulary: '" + word + "'"), word(word) {}
  std::string word;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct NonFiniteLoss : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Remote corrector failures.
struct EndpointUnavailable : Error {
  using Error::Error;
};

struct SchemaViolation : Error {
  using Error::Error;
};

struct MissingApiKey : Error {
  explicit MissingApiKey(const std::string& var)
      : Error("API key environment variable not set: " + var) {}
};

}  // namespace gtr
