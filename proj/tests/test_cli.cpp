#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "test_support.hpp"

using etcnet::test::scratch_dir;

namespace {

const char* cli_path() { return std::getenv("ETCNET_CLI"); }

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cmd(const std::string& args) {
  CmdResult r;
  const std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("budget subcommand reproduces the published numbers") {
  if (!cli_path()) return;  // only meaningful under ctest

  const CmdResult r = run_cmd("budget --bandwidth 170 --levels 2 --msg-len 6 --freq 45 "
                              "--agents 2 --sigma2 0.69 --gamma 0.95 --json");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("p_sup").get<double>() == doctest::Approx(0.5104801469).epsilon(1e-9));
  CHECK(doc.at("c_sup").get<double>() == doctest::Approx(doc.at("p_sup").get<double>() / 0.05));

  // Byte-identical rerun.
  CHECK(run_cmd("budget --bandwidth 170 --levels 2 --msg-len 6 --freq 45 "
                "--agents 2 --sigma2 0.69 --gamma 0.95 --json")
            .out == r.out);
}

TEST_CASE("config errors exit with code 2") {
  if (!cli_path()) return;

  const auto dir = scratch_dir("cli_bad_config");
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"budget": {"bandwidth": -3}})";
  }
  const CmdResult r = run_cmd("train-stage1 --config " + (dir / "bad.json").string() + " --out " +
                              (dir / "out").string());
  CHECK(r.exit_code == 2);

  const CmdResult unknown = run_cmd("train-stage1 --config " + (dir / "nothere.json").string());
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("training and analysis subcommands run end to end") {
  if (!cli_path()) return;

  const auto dir = scratch_dir("cli_train");
  {
    std::ofstream out(dir / "cfg.json");
    out << R"({"training": {"total_steps": 320, "eval_cadence": 320,
               "eval_episodes": 2, "measure_steps": 32}})";
  }
  const std::string cfg = (dir / "cfg.json").string();

  CHECK(run_cmd("train-stage1 --config " + cfg + " --seed 3 --out " + (dir / "s1").string()).exit_code == 0);
  CHECK(run_cmd("train-stage2 --config " + cfg + " --seed 3 --stage1 " + (dir / "s1/checkpoint").string() +
                " --out " + (dir / "s2").string())
            .exit_code == 0);
  CHECK(run_cmd("baseline dropout --dropout-p 0.5 --config " + cfg + " --seed 3 --out " +
                (dir / "drop").string())
            .exit_code == 0);

  const CmdResult eval = run_cmd("eval --checkpoint " + (dir / "s2/checkpoint").string() +
                                 " --episodes 3 --seed 1 --dump " + (dir / "dump.jsonl").string());
  CHECK(eval.exit_code == 0);
  CHECK(nlohmann::json::parse(eval.out).at("episodes").get<int>() == 3);

  CHECK(run_cmd("analyze timeline --dump " + (dir / "dump.jsonl").string() + " --out " +
                (dir / "timeline.csv").string())
            .exit_code == 0);
  CHECK(run_cmd("analyze pca --dump " + (dir / "dump.jsonl").string() + " --agent 0 --out " +
                (dir / "pca").string())
            .exit_code == 0);
  CHECK(run_cmd("analyze curves " + (dir / "s1/metrics.csv").string() + " " +
                (dir / "s2/metrics.csv").string() + " --keys eval_mean_steps --out " +
                (dir / "curves").string())
            .exit_code == 0);
  CHECK(std::filesystem::exists(dir / "curves/curve_eval_mean_steps.svg"));
  CHECK(std::filesystem::exists(dir / "pca/pca.csv"));
}

}  // TEST_SUITE
