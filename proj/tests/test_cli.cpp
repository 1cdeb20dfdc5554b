#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtr/commands.hpp"
#include "gtr/errors.hpp"
#include "gtr/run.hpp"

using namespace gtr;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("solve lists sorted solutions") {
  std::ostringstream out, err;
  CHECK(cli::cmd_solve({"2", "3", "4", "1"}, out, err) == 0);
  const auto ls = lines(out.str());
  CHECK(ls.size() == 86);
  CHECK(std::is_sorted(ls.begin(), ls.end()));
  CHECK(std::find(ls.begin(), ls.end(), "2*3*4*1") != ls.end());
}

TEST_CASE("solve maps face cards and reports unsolvable hands") {
  std::ostringstream out, err;
  CHECK(cli::cmd_solve({"11", "12", "13", "2"}, out, err) == 0);
  CHECK(out.str() == "UNSOLVABLE\n");
  std::ostringstream o2, e2;
  CHECK(cli::cmd_solve({"1", "1", "1"}, o2, e2) == 1);
  CHECK(cli::cmd_solve({"1", "1", "1", "14"}, o2, e2) == 1);
  CHECK(cli::cmd_solve({"1", "1", "1", "x"}, o2, e2) == 1);
}

TEST_CASE("play rejects unknown tokens and ends on submission") {
  std::istringstream in("banana\n=\n");
  std::ostringstream out;
  CHECK(cli::cmd_play("points24", 3, in, out) == 0);
  const auto s = out.str();
  CHECK(s.find("rejected:") != std::string::npos);
  CHECK(s.find("reward -1 done true") != std::string::npos);
  CHECK(s.find("episode over: success false") != std::string::npos);

  std::istringstream quit("quit\n");
  std::ostringstream o2;
  CHECK(cli::cmd_play("miniworld", 1, quit, o2) == 0);
  CHECK(o2.str().find("admissible:") != std::string::npos);
  std::ostringstream o3;
  std::istringstream none;
  CHECK(cli::cmd_play("chess", 1, none, o3) == 1);
}

TEST_CASE("eval needs a positive episode count") {
  const auto dir = fs::temp_directory_path() / "gtr_cli_eval";
  fs::remove_all(dir);
  cli::Overrides o;
  o.task = "ezpoints";
  o.out = dir.string();
  auto cfg = cli::resolve_config(std::nullopt, o);
  cfg.trainer.total_env_steps = 64;
  cfg.trainer.buffer_size = 64;
  cfg.trainer.ppo_epochs = 1;
  const auto res = train::train_run(cfg, false);
  REQUIRE(fs::exists(res.checkpoint));

  std::ostringstream out, err;
  CHECK(cli::cmd_eval(res.checkpoint, "ezpoints", 0, 1, std::nullopt, out, err) == 1);
  std::ostringstream o2, e2;
  CHECK(cli::cmd_eval(res.checkpoint, "ezpoints", 3, 1, dir.string(), o2, e2) == 0);
  const auto report = json::parse(o2.str());
  CHECK(report["episodes"] == 3);
  CHECK(fs::exists(dir / "eval.json"));
  std::ostringstream o3, e3;
  CHECK(cli::cmd_eval((dir / "missing.json").string(), "ezpoints", 3, 1, std::nullopt, o3, e3) != 0);
  fs::remove_all(dir);
}

TEST_CASE("config resolution") {
  cli::Overrides o;
  o.task = "points24";
  o.mode = "rl4vlm";
  o.seed = 9;
  const auto cfg = cli::resolve_config(std::nullopt, o);
  CHECK(cfg.task == envs::Task::points24);
  CHECK(cfg.trainer.mode == train::Mode::rl4vlm);
  CHECK(cfg.seed == 9);

  const auto path = write_file("gtr_cli_cfg.json", R"({"task": "ezpoints", "seed": 2})");
  cli::Overrides clash;
  clash.task = "points24";
  CHECK_THROWS_AS(cli::resolve_config(path.string(), clash), ConfigError);
  std::ostringstream out, err;
  CHECK(cli::cmd_train(path.string(), clash, false, out, err) == 1);
  const auto bad = write_file("gtr_cli_bad.json", R"({"task": "ezpoints", "colour": "red"})");
  CHECK(cli::cmd_train(bad.string(), {}, false, out, err) == 1);
  fs::remove(path);
  fs::remove(bad);
}

TEST_CASE("correct prints a protocol response") {
  const auto fx = write_file(
      "gtr_cli_fixture.json",
      R"({"cards": [2, 3, 4, 1], "actions": ["2"], "thought": "thought: cards 2 3 4 1 ; formula 2 + 3 ; next +"})");
  std::ostringstream out, err;
  CHECK(cli::cmd_correct("points24", fx.string(), std::nullopt, out, err) == 0);
  const auto j = json::parse(out.str());
  CHECK(j["evaluation"] == "NO");
  CHECK(j["correction"]["next"] == "*");
  CHECK(cli::cmd_correct("points24", "/nonexistent.json", std::nullopt, out, err) == 1);
  fs::remove(fx);
}
