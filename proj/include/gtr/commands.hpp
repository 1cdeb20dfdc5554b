#pragma once

// Command implementations behind the gtr tool. Each returns the process exit
// code: 0 success, 1 configuration or input error, 2 runtime failure.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gtr/config.hpp"

namespace gtr::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> task;
  std::optional<std::string> out;
};

// Reads the config file (or defaults for the task) and applies overrides.
train::RunConfig resolve_config(const std::optional<std::string>& path, const Overrides& o);

int cmd_train(const std::optional<std::string>& config_path, const Overrides& o, bool resume,
              std::ostream& out, std::ostream& err);

int cmd_eval(const std::string& checkpoint, const std::string& task, int episodes,
             std::uint64_t seed, const std::optional<std::string>& out_dir, std::ostream& out,
             std::ostream& err);

int cmd_solve(const std::vector<std::string>& cards, std::ostream& out, std::ostream& err);

int cmd_play(const std::string& task, std::uint64_t seed, std::istream& in, std::ostream& out);

// Fixture: {"seed": n, "actions": [...], "thought": "thought: ..."}; card
// tasks may give "cards": [ranks] instead of a seed.
int cmd_correct(const std::string& task, const std::string& fixture_path,
                const std::optional<std::string>& config_path, std::ostream& out, std::ostream& err);

}  // namespace gtr::cli
