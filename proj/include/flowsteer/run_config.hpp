#pragma once

// Run configuration for the command-line tool: one JSON document per run.
// Every key has a default; user documents are merged over the defaults and
// unknown keys or wrongly typed values are rejected with ConfigError.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "flowsteer/benchmarks.hpp"
#include "flowsteer/datasets.hpp"
#include "flowsteer/potentials.hpp"
#include "flowsteer/sampler.hpp"
#include "flowsteer/score_sde.hpp"
#include "flowsteer/steering.hpp"
#include "flowsteer/training.hpp"
#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

enum class DataKind { two_gaussian, hypercube, twod, chiral };

std::string_view to_string(DataKind k);
DataKind parse_data_kind(std::string_view name);

/// Which density a run trains on, and therefore which prior it samples from.
struct DataSpec {
  DataKind kind = DataKind::two_gaussian;
  std::size_t dim = 2;  // hypercube only
  double corner_std = 0.2;
  double mode_center = 2.0;
  double mode_std = 0.3;
  Dataset2D source = Dataset2D::eight_gaussians;
  Dataset2D target = Dataset2D::moons;

  std::size_t flow_dim() const;
  PairSampler pair_sampler() const;
  PointSampler prior() const;
};

enum class PotentialKind { indicator, distance, halfspace, chirality };

std::string_view to_string(PotentialKind k);
PotentialKind parse_potential_kind(std::string_view name);

struct PotentialSpec {
  PotentialKind kind = PotentialKind::distance;
  double weight = 1.0;
  std::size_t axis = 0;
  /// Chirality only: centre table (see read_chiral_centers_csv). Empty uses
  /// the toy molecule's centre.
  std::string centers;

  Potential build(std::size_t dim) const;
};

enum class BenchSuite { two_gaussian, hypercube, twod, chiral };

std::string_view to_string(BenchSuite s);
BenchSuite parse_bench_suite(std::string_view name);

struct RunConfig {
  std::uint64_t seed = 0;
  DataSpec data;
  ModelSpec model;
  TrainConfig train;
  std::string checkpoint = "model.ckpt";
  std::size_t sample_n = 1024;
  std::size_t sample_steps = 50;
  NoiseSchedule noise;
  ScoreSourceKind score_source = ScoreSourceKind::analytic_gaussian;
  SteeringConfig steer;
  PotentialSpec potential;
  BenchSuite bench_suite = BenchSuite::two_gaussian;
  std::size_t bench_repeats = 0;  // 0 keeps the profile's value

  /// The full default document.
  static nlohmann::json defaults();
  /// Merges `user` over the defaults and validates every field.
  static RunConfig from_json(const nlohmann::json& user);
  /// Reads a JSON file; throws ConfigError on I/O or parse failure.
  static RunConfig load(const std::string& path);

  /// The materialized document (every key present).
  nlohmann::json to_json() const;
  ScoreSource score() const;
};

/// "key = default" lines for every configuration key, dotted paths.
std::string config_reference();

}  // namespace flowsteer
