#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flowsteer/cli.hpp"
#include "flowsteer/point_set.hpp"

using namespace flowsteer;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "flowsteer");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    std::ofstream(path / name) << content;
    return (path / name).string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

const char* kSmallConfig = R"({
  "seed": 4,
  "model": {"hidden": [16, 16]},
  "train": {"steps": 300, "batch_size": 64, "learning_rate": 0.005},
  "sample": {"n": 256, "steps": 20},
  "steer": {"particles": 64, "steps": 20, "resample_every": 5},
  "potential": {"kind": "distance", "weight": 4.0}
})";

}  // namespace

TEST_CASE("help lists every configuration key with its default") {
  auto r = cli({"--help"});
  CHECK(r.code == 0);
  std::istringstream lines(config_reference());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    if (line.find(" = ") == std::string::npos) continue;
    ++n;
    CHECK_MESSAGE(r.out.find(line) != std::string::npos, line);
  }
  CHECK(n > 20);
  for (const char* key : {"steer.lambda", "noise.sigma0", "train.bridge_sigma", "potential.kind", "bench.suite"})
    CHECK(r.out.find(key) != std::string::npos);
}

TEST_CASE("configuration errors exit with 2 and write nothing") {
  TempDir tmp("flowsteer_cli_errors");
  const std::vector<std::string> bad{
      "{not json",
      R"({"bogus": 1})",
      R"({"train": {"steps": "many"}})",
      R"({"train": {"steps": 0}})",
      R"({"steer": {"schedule": "geometric"}})",
      R"({"noise": {"sigma0": -1}})",
      R"({"steer": {"steps": 5, "resample_every": 6}})",
      R"([1, 2])",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const auto cfg = tmp.file("bad" + std::to_string(i) + ".json", bad[i]);
    const auto out = tmp.sub("out" + std::to_string(i));
    for (const char* cmd : {"train", "sample", "steer", "bench"}) {
      auto r = cli({cmd, "--config", cfg, "--out-dir", out});
      CHECK_MESSAGE(r.code == kExitConfig, bad[i] << " " << cmd << ": " << r.err);
      CHECK_FALSE(fs::exists(out));
    }
  }
  CHECK(cli({"train", "--config", tmp.sub("missing.json"), "--out-dir", tmp.sub("o")}).code == kExitConfig);
  CHECK(cli({"bench", "spirals", "--out-dir", tmp.sub("o")}).code == kExitConfig);
  CHECK(cli({"train", "--profile", "huge"}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({}).code == kExitConfig);
  CHECK_FALSE(fs::exists(tmp.sub("o")));
}

TEST_CASE("sample and steer need a usable checkpoint") {
  TempDir tmp("flowsteer_cli_ckpt");
  const auto cfg = tmp.file("c.json", kSmallConfig);
  CHECK(cli({"sample", "--config", cfg, "--out-dir", tmp.sub("none")}).code == kExitConfig);
  CHECK_FALSE(fs::exists(tmp.sub("none")));
  REQUIRE(cli({"train", "--config", cfg, "--out-dir", tmp.sub("m")}).code == 0);
  // A hypercube run cannot use a 1D checkpoint.
  const auto cube = tmp.file("cube.json", R"({"data": {"kind": "hypercube", "dim": 2}, "checkpoint": ")" +
                                              tmp.sub("m") + "/model.ckpt\"}");
  CHECK(cli({"sample", "--config", cube, "--out-dir", tmp.sub("x")}).code == kExitConfig);
  CHECK_FALSE(fs::exists(tmp.sub("x")));
}

TEST_CASE("train, sample and steer are reproducible") {
  TempDir tmp("flowsteer_cli_runs");
  const auto cfg = tmp.file("c.json", kSmallConfig);
  const auto a = tmp.sub("a"), b = tmp.sub("b");
  for (const auto& dir : {a, b}) {
    REQUIRE(cli({"train", "--config", cfg, "--out-dir", dir}).code == 0);
    REQUIRE(cli({"sample", "--config", cfg, "--out-dir", dir}).code == 0);
  }
  CHECK(slurp(fs::path(a) / "model.ckpt") == slurp(fs::path(b) / "model.ckpt"));
  CHECK(slurp(fs::path(a) / "loss_trace.csv") == slurp(fs::path(b) / "loss_trace.csv"));
  CHECK(slurp(fs::path(a) / "samples.csv") == slurp(fs::path(b) / "samples.csv"));
  CHECK(fs::exists(fs::path(a) / "run_config.json"));

  // Steering loads the checkpoint from the output directory when the path is relative.
  for (const auto& dir : {a, b}) REQUIRE(cli({"steer", "--config", cfg, "--out-dir", dir}).code == 0);
  CHECK(slurp(fs::path(a) / "diagnostics.csv") == slurp(fs::path(b) / "diagnostics.csv"));
  CHECK(slurp(fs::path(a) / "samples.csv") == slurp(fs::path(b) / "samples.csv"));
  CHECK(read_points_csv((fs::path(a) / "samples.csv").string()).size() == 64);

  REQUIRE(cli({"sample", "--config", cfg, "--out-dir", a, "--seed", "99"}).code == 0);
  CHECK(slurp(fs::path(a) / "samples.csv") != slurp(fs::path(b) / "samples.csv"));
}

TEST_CASE("training trace decreases and steering diagnostics behave") {
  TempDir tmp("flowsteer_cli_behaviour");
  const auto cfg = tmp.file("c.json", kSmallConfig);
  const auto dir = tmp.sub("run");
  REQUIRE(cli({"train", "--config", cfg, "--out-dir", dir}).code == 0);
  std::ifstream trace(fs::path(dir) / "loss_trace.csv");
  std::string line;
  std::getline(trace, line);
  CHECK(line == "step,loss,smoothed");
  std::vector<double> smoothed;
  while (std::getline(trace, line)) smoothed.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  REQUIRE(smoothed.size() == 300);
  CHECK(smoothed.back() < smoothed[99]);

  SUBCASE("deterministic steering loses ancestors") {
    const auto det = tmp.file("det.json", R"({"seed": 4, "model": {"hidden": [16, 16]},
      "steer": {"particles": 64, "steps": 20, "resample_every": 5, "deterministic": true, "lambda": 2.0},
      "potential": {"kind": "distance", "weight": 4.0}})");
    REQUIRE(cli({"steer", "--config", det, "--out-dir", dir}).code == 0);
    std::ifstream diag(fs::path(dir) / "diagnostics.csv");
    std::getline(diag, line);
    std::vector<long> ancestors;
    while (std::getline(diag, line)) {
      std::stringstream ss(line);
      std::string cell;
      for (int i = 0; i < 4; ++i) std::getline(ss, cell, ',');
      ancestors.push_back(std::stol(cell));
    }
    REQUIRE(ancestors.size() == 4);
    for (std::size_t i = 1; i < ancestors.size(); ++i) CHECK(ancestors[i] <= ancestors[i - 1]);
    CHECK(ancestors.back() < 64);
  }
  SUBCASE("lambda = 0 steering matches plain sampling in distribution") {
    const auto flat = tmp.file("flat.json", R"({"seed": 4, "model": {"hidden": [16, 16]}, "checkpoint": ")" + dir +
                                                R"(/model.ckpt",
      "sample": {"n": 2048, "steps": 20},
      "steer": {"particles": 2048, "steps": 20, "resample_every": 5, "lambda": 0.0}})");
    auto rs = cli({"sample", "--config", flat, "--out-dir", dir + "/s"});
    REQUIRE_MESSAGE(rs.code == 0, rs.err);
    REQUIRE(cli({"steer", "--config", flat, "--out-dir", dir + "/f"}).code == 0);
    auto s = read_points_csv(dir + "/s/samples.csv");
    auto f = read_points_csv(dir + "/f/samples.csv");
    std::size_t sp = 0, fp = 0;
    for (double v : s.flat()) sp += v > 0.0;
    for (double v : f.flat()) fp += v > 0.0;
    CHECK(std::abs(double(sp) - double(fp)) / 2048.0 < 0.08);
  }
}

TEST_CASE("numeric failure exits with 3") {
  TempDir tmp("flowsteer_cli_numeric");
  const auto cfg = tmp.file("c.json", R"({"model": {"hidden": [8]}, "train": {"steps": 200, "learning_rate": 1e200}})");
  auto r = cli({"train", "--config", cfg, "--out-dir", tmp.sub("o")});
  CHECK_MESSAGE(r.code == kExitNumeric, r.err);
}

TEST_CASE("installed executable reports configuration errors through its exit status") {
  const char* exe = std::getenv("FLOWSTEER_CLI");
  if (!exe) {
    MESSAGE("FLOWSTEER_CLI not set; skipped");
    return;
  }
  TempDir tmp("flowsteer_cli_exe");
  const auto cfg = tmp.file("bad.json", R"({"bogus": true})");
  const std::string cmd = std::string(exe) + " train --config " + cfg + " --out-dir " + tmp.sub("o") + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  CHECK_FALSE(fs::exists(tmp.sub("o")));
}
