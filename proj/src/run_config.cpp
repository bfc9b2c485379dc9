#include "flowsteer/run_config.hpp"

#include <fstream>
#include <sstream>

#include "flowsteer/chirality.hpp"
#include "flowsteer/error.hpp"

namespace flowsteer {

using nlohmann::json;

std::string_view to_string(DataKind k) {
  switch (k) {
    case DataKind::two_gaussian: return "two_gaussian";
    case DataKind::hypercube: return "hypercube";
    case DataKind::twod: return "twod";
    case DataKind::chiral: return "chiral";
  }
  return "?";
}

DataKind parse_data_kind(std::string_view name) {
  for (auto k : {DataKind::two_gaussian, DataKind::hypercube, DataKind::twod, DataKind::chiral})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown data kind '" + std::string(name) + "'");
}

std::string_view to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::indicator: return "indicator";
    case PotentialKind::distance: return "distance";
    case PotentialKind::halfspace: return "halfspace";
    case PotentialKind::chirality: return "chirality";
  }
  return "?";
}

PotentialKind parse_potential_kind(std::string_view name) {
  for (auto k : {PotentialKind::indicator, PotentialKind::distance, PotentialKind::halfspace, PotentialKind::chirality})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown potential kind '" + std::string(name) + "'");
}

std::string_view to_string(BenchSuite s) {
  switch (s) {
    case BenchSuite::two_gaussian: return "two_gaussian";
    case BenchSuite::hypercube: return "hypercube";
    case BenchSuite::twod: return "twod";
    case BenchSuite::chiral: return "chiral";
  }
  return "?";
}

BenchSuite parse_bench_suite(std::string_view name) {
  for (auto s : {BenchSuite::two_gaussian, BenchSuite::hypercube, BenchSuite::twod, BenchSuite::chiral})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown bench suite '" + std::string(name) + "'");
}

// --- data / potential ----------------------------------------------------------

std::size_t DataSpec::flow_dim() const {
  switch (kind) {
    case DataKind::two_gaussian: return 1;
    case DataKind::hypercube: return dim;
    case DataKind::twod: return 2;
    case DataKind::chiral: return kChiralToyDim;
  }
  return 0;
}

PairSampler DataSpec::pair_sampler() const {
  switch (kind) {
    case DataKind::two_gaussian: return two_gaussian_pair_sampler(mode_center, mode_std);
    case DataKind::hypercube: return gen_hypercube_pair_sampler(dim, corner_std);
    case DataKind::twod: return independent_pair_sampler(2, dataset_2d_sampler(source), dataset_2d_sampler(target));
    case DataKind::chiral: return gen_chiral_toy_sampler();
  }
  throw ConfigError("unknown data kind");
}

PointSampler DataSpec::prior() const {
  switch (kind) {
    case DataKind::hypercube: return uniform_box_sampler(-1.0, 1.0);
    case DataKind::twod: return dataset_2d_sampler(source);
    case DataKind::two_gaussian:
    case DataKind::chiral: return standard_normal_sampler();
  }
  throw ConfigError("unknown data kind");
}

Potential PotentialSpec::build(std::size_t dim) const {
  switch (kind) {
    case PotentialKind::indicator: return make_indicator_potential(dim, weight);
    case PotentialKind::distance: return make_distance_potential(dim, weight);
    case PotentialKind::halfspace:
      if (axis >= dim) throw ConfigError("potential.axis must be below the flow dimension");
      return make_halfspace_potential(dim, weight, axis);
    case PotentialKind::chirality: {
      if (dim % 3 != 0) throw ConfigError("chirality potential needs a flow dimension divisible by 3");
      auto centers = this->centers.empty() ? std::vector<ChiralCenter>{chiral_toy_center()}
                                           : read_chiral_centers_csv(this->centers);
      return make_chirality_potential(dim / 3, std::move(centers));
    }
  }
  throw ConfigError("unknown potential kind");
}

// --- documents -----------------------------------------------------------------

json RunConfig::to_json() const {
  return {{"seed", seed},
          {"data",
           {{"kind", to_string(data.kind)},
            {"dim", data.dim},
            {"corner_std", data.corner_std},
            {"mode_center", data.mode_center},
            {"mode_std", data.mode_std},
            {"source", to_string(data.source)},
            {"target", to_string(data.target)}}},
          {"model",
           {{"hidden", model.hidden},
            {"activation", to_string(model.activation)},
            {"score_head", model.score_head}}},
          {"train",
           {{"batch_size", train.batch_size},
            {"steps", train.steps},
            {"learning_rate", train.learning_rate},
            {"beta1", train.beta1},
            {"beta2", train.beta2},
            {"adam_epsilon", train.adam_epsilon},
            {"final_lr_fraction", train.final_lr_fraction},
            {"bridge_sigma", train.bridge_sigma},
            {"time_epsilon", train.time_epsilon},
            {"coupling", to_string(train.coupling)},
            {"score_weighting", to_string(train.score_weighting)}}},
          {"checkpoint", checkpoint},
          {"sample", {{"n", sample_n}, {"steps", sample_steps}}},
          {"noise", {{"kind", to_string(noise.kind)}, {"sigma0", noise.sigma0}, {"sigma1", noise.sigma1}}},
          {"score_source", to_string(score_source)},
          {"steer",
           {{"lambda", steer.lambda},
            {"schedule", to_string(steer.schedule)},
            {"particles", steer.particles},
            {"steps", steer.steps},
            {"resample_every", steer.resample_every},
            {"estimate", to_string(steer.estimate)},
            {"deterministic", steer.deterministic},
            {"resampling", to_string(steer.resampling)}}},
          {"potential",
           {{"kind", to_string(potential.kind)},
            {"weight", potential.weight},
            {"axis", potential.axis},
            {"centers", potential.centers}}},
          {"bench", {{"suite", to_string(bench_suite)}, {"repeats", bench_repeats}}}};
}

json RunConfig::defaults() { return RunConfig{}.to_json(); }

namespace {

std::string type_name(const json& j) {
  if (j.is_number_unsigned()) return "nonnegative integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

bool same_kind(const json& def, const json& user) {
  if (def.is_number_unsigned()) return user.is_number_unsigned();
  if (def.is_number()) return user.is_number();
  if (def.is_array()) {
    if (!user.is_array()) return false;
    for (const auto& e : user)
      if (!e.is_number_unsigned()) return false;
    return true;
  }
  return def.type() == user.type();
}

void check_against(const json& user, const json& def, const std::string& path) {
  if (!user.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!def.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    const json& d = def.at(key);
    if (d.is_object()) {
      check_against(value, d, where);
    } else if (!same_kind(d, value)) {
      throw ConfigError("config key '" + where + "' expects " + type_name(d) + ", got " + type_name(value));
    }
  }
}

void flatten(const json& j, const std::string& path, std::ostringstream& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (value.is_object()) {
      flatten(value, where, out);
    } else {
      out << "  " << where << " = " << value.dump() << '\n';
    }
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& user) {
  const json def = defaults();
  check_against(user, def, "");
  json m = def;
  m.merge_patch(user);

  RunConfig c;
  try {
    c.seed = m["seed"].get<std::uint64_t>();

    const auto& d = m["data"];
    c.data.kind = parse_data_kind(d["kind"].get<std::string>());
    c.data.dim = d["dim"].get<std::size_t>();
    c.data.corner_std = d["corner_std"].get<double>();
    c.data.mode_center = d["mode_center"].get<double>();
    c.data.mode_std = d["mode_std"].get<double>();
    c.data.source = parse_dataset_2d(d["source"].get<std::string>());
    c.data.target = parse_dataset_2d(d["target"].get<std::string>());
    if (c.data.dim == 0) throw ConfigError("data.dim must be >= 1");
    if (!(c.data.corner_std > 0.0)) throw ConfigError("data.corner_std must be > 0");
    if (!(c.data.mode_std > 0.0)) throw ConfigError("data.mode_std must be > 0");

    const auto& mo = m["model"];
    c.model.dim = c.data.flow_dim();
    c.model.hidden = mo["hidden"].get<std::vector<std::size_t>>();
    c.model.activation = parse_activation(mo["activation"].get<std::string>());
    c.model.score_head = mo["score_head"].get<bool>();
    for (std::size_t h : c.model.hidden)
      if (h == 0) throw ConfigError("model.hidden entries must be >= 1");

    const auto& t = m["train"];
    c.train.batch_size = t["batch_size"].get<std::size_t>();
    c.train.steps = t["steps"].get<std::size_t>();
    c.train.learning_rate = t["learning_rate"].get<double>();
    c.train.beta1 = t["beta1"].get<double>();
    c.train.beta2 = t["beta2"].get<double>();
    c.train.adam_epsilon = t["adam_epsilon"].get<double>();
    c.train.final_lr_fraction = t["final_lr_fraction"].get<double>();
    c.train.bridge_sigma = t["bridge_sigma"].get<double>();
    c.train.time_epsilon = t["time_epsilon"].get<double>();
    c.train.coupling = parse_coupling(t["coupling"].get<std::string>());
    c.train.score_weighting = parse_score_weighting(t["score_weighting"].get<std::string>());
    c.train.seed = c.seed;
    c.train.validate();
    if (c.model.score_head && !(c.train.bridge_sigma > 0.0))
      throw ConfigError("model.score_head requires train.bridge_sigma > 0");

    c.checkpoint = m["checkpoint"].get<std::string>();
    if (c.checkpoint.empty()) throw ConfigError("checkpoint must not be empty");
    c.sample_n = m["sample"]["n"].get<std::size_t>();
    c.sample_steps = m["sample"]["steps"].get<std::size_t>();
    if (c.sample_n == 0 || c.sample_steps == 0) throw ConfigError("sample.n and sample.steps must be >= 1");

    const auto& n = m["noise"];
    c.noise.kind = parse_noise_kind(n["kind"].get<std::string>());
    c.noise.sigma0 = n["sigma0"].get<double>();
    c.noise.sigma1 = n["sigma1"].get<double>();
    c.noise.validate();
    c.score_source = parse_score_source(m["score_source"].get<std::string>());

    const auto& s = m["steer"];
    c.steer.lambda = s["lambda"].get<double>();
    c.steer.schedule = parse_potential_schedule(s["schedule"].get<std::string>());
    c.steer.particles = s["particles"].get<std::size_t>();
    c.steer.steps = s["steps"].get<std::size_t>();
    c.steer.resample_every = s["resample_every"].get<std::size_t>();
    c.steer.estimate = parse_estimate_order(s["estimate"].get<std::string>());
    c.steer.deterministic = s["deterministic"].get<bool>();
    c.steer.resampling = parse_resampling_method(s["resampling"].get<std::string>());
    c.steer.validate();
    if (c.steer.resample_every > c.steer.steps) throw ConfigError("steer.resample_every must not exceed steer.steps");

    const auto& p = m["potential"];
    c.potential.kind = parse_potential_kind(p["kind"].get<std::string>());
    c.potential.weight = p["weight"].get<double>();
    c.potential.axis = p["axis"].get<std::size_t>();
    c.potential.centers = p["centers"].get<std::string>();
    if (!(c.potential.weight > 0.0)) throw ConfigError("potential.weight must be > 0");

    c.bench_suite = parse_bench_suite(m["bench"]["suite"].get<std::string>());
    c.bench_repeats = m["bench"]["repeats"].get<std::size_t>();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(user);
}

ScoreSource RunConfig::score() const {
  return score_source == ScoreSourceKind::learned ? ScoreSource::learned() : ScoreSource::analytic();
}

std::string config_reference() {
  std::ostringstream out;
  flatten(RunConfig::defaults(), "", out);
  return out.str();
}

}  // namespace flowsteer
