#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string("\"") + SPATIAL_TRUST_CLI + "\" " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("spatial_trust_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

}  // namespace

TEST_CASE("gen is deterministic") {
  TempDir d("gen");
  REQUIRE(run("gen --seed 42 --n 1000 --out " + (d / "a")).exit_code == 0);
  REQUIRE(run("gen --seed 42 --n 1000 --out " + (d / "b")).exit_code == 0);
  const std::string a = slurp(d / "a/train.jsonl");
  CHECK(a == slurp(d / "b/train.jsonl"));
  CHECK(lines(d / "a/train.jsonl").size() == 1000);
  CHECK(slurp(d / "a/train.truth.jsonl") == slurp(d / "b/train.truth.jsonl"));
}

TEST_CASE("gen with zero samples writes an empty file") {
  TempDir d("gen0");
  REQUIRE(run("gen --n 0 --out " + d.path.string()).exit_code == 0);
  CHECK(fs::exists(d / "train.jsonl"));
  CHECK(fs::file_size(d / "train.jsonl") == 0);
}

TEST_CASE("gen rejects invalid rates") {
  TempDir d("genbad");
  const RunResult r = run("gen --detection-failure-rate 1.5 --out " + d.path.string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("detection_failure_rate") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags") {
  TempDir d("config");
  std::ofstream(d / "cfg.json") << R"({"n": 40, "seed": 3, "vlm_base_error": 0.1})";
  REQUIRE(run("gen --config " + (d / "cfg.json") + " --out " + (d / "a")).exit_code == 0);
  CHECK(lines(d / "a/train.jsonl").size() == 40);
  REQUIRE(run("gen --config " + (d / "cfg.json") + " --n 12 --out " + (d / "b")).exit_code == 0);
  CHECK(lines(d / "b/train.jsonl").size() == 12);
  REQUIRE(run("gen --seed 3 --n 40 --vlm-base-error 0.1 --out " + (d / "c")).exit_code == 0);
  CHECK(slurp(d / "a/train.jsonl") == slurp(d / "c/train.jsonl"));

  std::ofstream(d / "train.json") << R"({"data": ")" << (d / "a/train.jsonl") << R"(", "n_trees": 3, "unused_key": 1})";
  REQUIRE(run("train --config " + (d / "train.json") + " --out " + (d / "m")).exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(d / "m/model.json"))["trees"].size() == 3);

  std::ofstream(d / "broken.json") << "{\"n\": ";
  CHECK(run("gen --config " + (d / "broken.json") + " --out " + (d / "x")).exit_code != 0);
}

TEST_CASE("train, eval, scenegraph and ablate") {
  TempDir d("flow");
  REQUIRE(run("gen --n 600 --n-test 300 --out " + d.path.string()).exit_code == 0);
  const std::string small = " --n-trees 15";
  REQUIRE(run("train --data " + (d / "train.jsonl") + small + " --out " + (d / "m1")).exit_code == 0);
  REQUIRE(run("train --data " + (d / "train.jsonl") + small + " --out " + (d / "m2")).exit_code == 0);
  CHECK(slurp(d / "m1/model.json") == slurp(d / "m2/model.json"));
  CHECK(lines(d / "m1/train_log.csv").size() == 16);
  CHECK(lines(d / "m1/feature_importance.csv").size() == 5);

  const std::string model = " --model " + (d / "m1/model.json");
  const std::string data = " --data " + (d / "test.jsonl");
  REQUIRE(run("eval --no-timestamp" + model + data + " --out " + (d / "e1")).exit_code == 0);
  REQUIRE(run("eval --no-timestamp" + model + data + " --out " + (d / "e2")).exit_code == 0);
  CHECK(slurp(d / "e1/report.json") == slurp(d / "e2/report.json"));
  const auto report = nlohmann::json::parse(slurp(d / "e1/report.json"));
  CHECK(report["n"] == 300);
  CHECK_FALSE(report.contains("generated_at"));
  CHECK(lines(d / "e1/coverage.csv").size() == 5);

  REQUIRE(run("eval --confidence-source oracle" + data + " --out " + (d / "eo")).exit_code == 0);
  const auto oracle = nlohmann::json::parse(slurp(d / "eo/report.json"));
  CHECK(oracle["auroc"] == 1.0);
  CHECK(oracle.contains("generated_at"));

  REQUIRE(run("scenegraph --taus 0,1.1" + model + data + " --out " + (d / "g")).exit_code == 0);
  const auto sweep = lines(d / "g/graph_sweep.csv");
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0] == "tau,precision,coverage,f1,retained,total");
  CHECK(sweep[1].rfind("0,", 0) == 0);
  CHECK(sweep[1].find(",1,") != std::string::npos);  // full coverage at tau 0
  CHECK(sweep[2].find(",0,300") != std::string::npos);  // nothing retained above 1
  CHECK(fs::exists(d / "g/graphs.json"));
  CHECK(lines(d / "g/graph_targets.csv").size() == 5);

  REQUIRE(run("ablate --n-trees 10 --data " + (d / "train.jsonl") + " --test " + (d / "test.jsonl") + " --out " +
              (d / "ab"))
              .exit_code == 0);
  const auto ab = lines(d / "ab/ablation.csv");
  REQUIRE(ab.size() == 7);
  CHECK(ab[0] == "configuration,auroc,coverage,target");
  CHECK(ab[6].rfind("geometric_only,", 0) == 0);
}

TEST_CASE("training on a single class fails") {
  TempDir d("oneclass");
  REQUIRE(run("gen --n 100 --vlm-base-error 0 --vlm-overlap-error-boost 0 --vlm-small-displacement-error-boost 0 "
              "--out " + d.path.string())
              .exit_code == 0);
  const RunResult r = run("train --data " + (d / "train.jsonl") + " --out " + d.path.string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("degenerate training set") != std::string::npos);
}

TEST_CASE("eval without a model fails") {
  TempDir d("nomodel");
  REQUIRE(run("gen --n 50 --out " + d.path.string()).exit_code == 0);
  CHECK(run("eval --data " + (d / "train.jsonl") + " --out " + d.path.string()).exit_code != 0);
  CHECK(run("eval --model " + (d / "missing.json") + " --data " + (d / "train.jsonl") + " --out " + d.path.string())
            .exit_code != 0);
}

TEST_CASE("scenegraph on an empty dataset") {
  TempDir d("empty");
  REQUIRE(run("gen --n 0 --out " + d.path.string()).exit_code == 0);
  const RunResult r =
      run("scenegraph --confidence-source oracle --data " + (d / "train.jsonl") + " --out " + (d / "g"));
  CHECK(r.exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(d / "g/graphs.json")).empty());
  CHECK(lines(d / "g/graph_sweep.csv").size() == 1);
}

TEST_CASE("bad input files are reported with line numbers") {
  TempDir d("bad");
  std::ofstream(d / "bad.jsonl") << "{\"sample_id\": 1}\n";
  const RunResult r = run("train --data " + (d / "bad.jsonl") + " --out " + d.path.string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("line 1") != std::string::npos);
}
