#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "sqe/config.hpp"
#include "sqe/experiments.hpp"
#include "sqe/report.hpp"

using namespace sqe;
namespace fs = std::filesystem;

namespace {

int run_tool(const std::string& args) {
  const std::string cmd = std::string(SQE_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sqe_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("defaults layer per experiment") {
  auto c = parse_config("control", nullptr);
  CHECK(c.integer("n") == 3);
  CHECK(c.list("a") == std::vector<double>{0, 0, 0, 1});
  CHECK(c.num("cutoff") == 8);
  CHECK(c.num("dt") == 1e-3);
  CHECK(c.seed() == 1);
  auto w = parse_config("wick-covariance", nullptr);
  CHECK(w.replicas() == 10000);
  auto b = parse_config("bel", nullptr);
  CHECK(b.num("cutoff") == 2);
  CHECK(b.replicas() == 100000);
  CHECK(experiment_names().size() == 13);
}

TEST_CASE("file values and overrides take precedence in order") {
  ConfigOverrides o;
  o.values["cutoff"] = {6};
  auto c = parse_config_text("control", "cutoff: 4\ndt: 0.002\nseed: 18446744073709551615\n", o);
  CHECK(c.num("cutoff") == 6);
  CHECK(c.num("dt") == 0.002);
  CHECK(c.seed() == 18446744073709551615ull);
  o.has_seed = true;
  o.seed = 9;
  CHECK(parse_config_text("control", "seed: 4\n", o).seed() == 9);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(parse_config_text("control", "n: 4\na: [0, 0, 0, 0, 1]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("control", "a: [0, 0, 0, -1]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("moments", "replicas: 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("control", "bogus: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("control", "cutoff: 4\ncutoff: 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("control", "experiment: bel\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("control", "seed: -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no-such-experiment", nullptr), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("control", "gamma: 0.1\n"), doctest::Contains("beta_gamma_cond"), ConfigError);
}

TEST_CASE("canonical form and hash") {
  auto a = parse_config_text("control", "dt: 0.001\ncutoff: 8\n");
  auto b = parse_config("control", nullptr);
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  CHECK(a.canonical().rfind("experiment = control\n", 0) == 0);
  ConfigOverrides o;
  o.has_seed = true;
  o.seed = 2;
  CHECK(parse_config("control", nullptr, o).hash() != a.hash());
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  auto echo = a.echo();
  CHECK(echo.find("# tolerance:") != std::string::npos);
}

TEST_CASE("report json round trip") {
  ExperimentReport r;
  r.experiment = "control";
  r.seed = 18446744073709551615ull;
  r.config_hash = "abc";
  r.check("x", 1.5, true, "anchor", "< 2", 0.25);
  r.info("y", std::nan(""), "anchor");
  r.table("t", {"a", "b"}).add({"1", "2"});
  r.notes.push_back("note");
  auto back = report_from_json(report_to_json(r));
  CHECK(back.experiment == "control");
  CHECK(back.seed == r.seed);
  REQUIRE(back.metrics.size() == 2);
  CHECK(back.metrics[0].estimate == 1.5);
  CHECK(back.metrics[0].stderr_ == 0.25);
  CHECK(back.metrics[0].verdict == Verdict::pass);
  CHECK(std::isnan(back.metrics[1].estimate));
  CHECK(back.metrics[1].verdict == Verdict::info);
  REQUIRE(back.tables.size() == 1);
  CHECK(back.tables[0].rows[0][1] == "2");
  CHECK(report_to_json(back) == report_to_json(r));
}

TEST_CASE("exit codes follow the verdicts") {
  ExperimentReport empty;
  CHECK(empty.all_pass());
  CHECK(empty.exit_code() == 0);
  ExperimentReport fail;
  fail.check("x", 3, false, "a", "< 2");
  CHECK(fail.exit_code() == 1);
  ExperimentReport boom;
  boom.explosion = true;
  CHECK(boom.exit_code() == 3);
  CHECK(to_string(Verdict::fail) == "fail");
  CHECK(verdict_from_string("pass") == Verdict::pass);
}

TEST_CASE("artifacts are written as json and csv") {
  auto dir = scratch("artifacts");
  ExperimentReport r;
  r.experiment = "control";
  r.table("series", {"t", "v"}).add({"0", "1"});
  write_artifacts(r, dir);
  CHECK(fs::exists(dir / "control.json"));
  CHECK(fs::exists(dir / "series.csv"));
  std::ifstream in(dir / "series.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "t,v\n0,1\n");
  fs::remove_all(dir);
}

TEST_CASE("runs are reproducible for a fixed seed") {
  ConfigOverrides o;
  o.values["paths"] = {3};
  auto cfg = parse_config("restart-consistency", nullptr, o);
  auto a = run_experiment(cfg), b = run_experiment(cfg);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].name == b.metrics[i].name);
    CHECK(a.metrics[i].estimate == b.metrics[i].estimate);
  }
  CHECK(a.config_hash == cfg.hash());
  CHECK(a.exit_code() == 0);
}

TEST_CASE("command line exit codes") {
  auto dir = scratch("cli");
  CHECK(run_tool("control --replicas 0 --out " + dir.string()) == 2);
  CHECK(run_tool("control --config " + (dir / "missing.yaml").string()) == 2);
  {
    std::ofstream bad(dir / "bad.yaml");
    bad << "n: 4\na: [0, 0, 0, 0, 1]\n";
  }
  CHECK(run_tool("control --config " + (dir / "bad.yaml").string()) == 2);
  CHECK(run_tool("kernel-bounds --out " + (dir / "kb").string()) == 0);
  CHECK(fs::exists(dir / "kb" / "kernel-bounds.json"));
  fs::remove_all(dir);
}
