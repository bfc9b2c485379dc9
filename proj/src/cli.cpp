#include "flowsteer/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "flowsteer/checkpoint.hpp"
#include "flowsteer/error.hpp"
#include "flowsteer/ode.hpp"
#include "flowsteer/point_set.hpp"
#include "format.hpp"

namespace flowsteer {

namespace fs = std::filesystem;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_config_echo(const RunConfig& config, const std::string& out_dir, std::vector<std::string>& written) {
  const std::string path = in_dir(out_dir, "run_config.json");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << config.to_json().dump(2) << '\n';
  written.push_back(path);
}

// A relative checkpoint path is looked up in the working directory first,
// then in the output directory.
std::string resolve_checkpoint(const RunConfig& config, const std::string& out_dir) {
  const fs::path p(config.checkpoint);
  if (p.is_absolute() || fs::exists(p)) return p.string();
  const fs::path alt = fs::path(out_dir) / p;
  if (fs::exists(alt)) return alt.string();
  throw ConfigError("checkpoint '" + config.checkpoint + "' not found");
}

VelocityModel load_for(const RunConfig& config, const std::string& out_dir) {
  VelocityModel model = load_checkpoint(resolve_checkpoint(config, out_dir));
  if (model.dim() != config.data.flow_dim())
    throw ConfigError("checkpoint dimension " + std::to_string(model.dim()) + " does not match data dimension " +
                      std::to_string(config.data.flow_dim()));
  return model;
}

void check_score_source(const RunConfig& config, const VelocityModel& model, bool needs_score) {
  if (!needs_score) return;
  if (config.score_source == ScoreSourceKind::learned) {
    if (!model.has_score()) throw ConfigError("score_source 'learned' needs a checkpoint with a score head");
  } else if (config.data.kind == DataKind::hypercube || config.data.kind == DataKind::twod) {
    throw ConfigError("the analytic Gaussian score needs a standard-normal prior; use score_source 'learned'");
  }
}

}  // namespace

std::vector<std::string> cmd_train(const RunConfig& config, const std::string& out_dir) {
  ModelSpec spec = config.model;
  spec.dim = config.data.flow_dim();
  auto result = train_flow(config.data.pair_sampler(), spec, config.train);

  std::vector<std::string> written;
  fs::create_directories(out_dir);
  const std::string ckpt = in_dir(out_dir, config.checkpoint);
  if (auto parent = fs::path(ckpt).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_checkpoint(ckpt, result.model);
  written.push_back(ckpt);

  const std::string trace = in_dir(out_dir, "loss_trace.csv");
  std::ofstream out(trace);
  if (!out) throw ConfigError("cannot write '" + trace + "'");
  out << "step,loss,smoothed\n";
  const auto smooth = smoothed_trace(result.loss_trace, 100);
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
    out << i << ',' << detail::format_double(result.loss_trace[i]) << ',' << detail::format_double(smooth[i]) << '\n';
  written.push_back(trace);
  write_config_echo(config, out_dir, written);
  return written;
}

std::vector<std::string> cmd_sample(const RunConfig& config, const std::string& out_dir) {
  const VelocityModel model = load_for(config, out_dir);
  check_score_source(config, model, !config.noise.is_zero());
  const PointSet samples = sample_unsteered(model, config.score(), config.noise, config.data.prior(), config.sample_n,
                                            config.sample_steps, Rng(config.seed, {0x5a}));
  std::vector<std::string> written;
  fs::create_directories(out_dir);
  const std::string path = in_dir(out_dir, "samples.csv");
  write_points_csv(path, samples);
  written.push_back(path);
  write_config_echo(config, out_dir, written);
  return written;
}

std::vector<std::string> cmd_steer(const RunConfig& config, const std::string& out_dir) {
  const VelocityModel model = load_for(config, out_dir);
  check_score_source(config, model, !config.steer.deterministic && !config.noise.is_zero());
  const Potential potential = config.potential.build(model.dim());
  const auto result = fk_sample(model, config.score(), config.noise, potential, config.steer, config.data.prior(),
                                Rng(config.seed, {0x57}));
  std::vector<std::string> written;
  fs::create_directories(out_dir);
  const std::string samples = in_dir(out_dir, "samples.csv");
  write_points_csv(samples, result.samples);
  written.push_back(samples);
  const std::string diag = in_dir(out_dir, "diagnostics.csv");
  write_diagnostics_csv(diag, result.events);
  written.push_back(diag);
  write_config_echo(config, out_dir, written);
  return written;
}

std::vector<std::string> cmd_bench(const RunConfig& config, Profile profile, const std::string& out_dir) {
  auto repeats = [&](std::size_t fallback) { return config.bench_repeats > 0 ? config.bench_repeats : fallback; };
  BenchmarkReport report;
  switch (config.bench_suite) {
    case BenchSuite::two_gaussian: {
      auto c = TwoGaussianConfig::for_profile(profile);
      c.seed = config.seed;
      report = run_two_gaussian(c).report;
      break;
    }
    case BenchSuite::hypercube: {
      auto c = HypercubeConfig::for_profile(profile);
      c.seed = config.seed;
      c.repeats = repeats(c.repeats);
      report = run_hypercube_benchmark(c).report;
      break;
    }
    case BenchSuite::twod: {
      auto c = TwoDConfig::for_profile(profile);
      c.seed = config.seed;
      c.repeats = repeats(c.repeats);
      report = run_2d_benchmark(c);
      break;
    }
    case BenchSuite::chiral: {
      auto c = ChiralConfig::for_profile(profile);
      c.seed = config.seed;
      c.repeats = repeats(c.repeats);
      report = run_chiral_benchmark(c).report;
      break;
    }
  }
  return report.write(out_dir);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feynman-Kac steering of flow-matching models"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".", profile_name = "smoke";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration (defaults apply to missing keys)");
  app.add_option("--seed", seed, "Override the configuration seed");
  app.add_option("--out-dir", out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--profile", profile_name, "Benchmark scale: smoke or paper")
      ->check(CLI::IsMember({"smoke", "paper"}))
      ->capture_default_str();
  app.footer("Configuration keys and defaults:\n" + config_reference());
  app.fallthrough();

  auto* train = app.add_subcommand("train", "Train a flow (and optional score head)");
  auto* sample = app.add_subcommand("sample", "Draw unsteered samples from a checkpoint");
  auto* steer = app.add_subcommand("steer", "Draw FK-steered samples from a checkpoint");
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string suite;
  bench->add_option("suite", suite, "two_gaussian, hypercube, twod or chiral (overrides bench.suite)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    nlohmann::json user = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config '" + config_path + "'");
      try {
        user = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + config_path + "' is not valid JSON: " + e.what());
      }
      if (!user.is_object()) throw ConfigError("config '" + config_path + "' must be a JSON object");
    }
    if (seed) user["seed"] = *seed;
    if (!suite.empty()) user["bench"]["suite"] = suite;
    const RunConfig config = RunConfig::from_json(user);
    const Profile profile = parse_profile(profile_name);

    std::vector<std::string> written;
    if (*train) written = cmd_train(config, out_dir);
    else if (*sample) written = cmd_sample(config, out_dir);
    else if (*steer) written = cmd_steer(config, out_dir);
    else written = cmd_bench(config, profile, out_dir);
    for (const auto& w : written) out << w << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace flowsteer
