#include "flowsteer/datasets.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "flowsteer/error.hpp"

namespace flowsteer {

PointSampler standard_normal_sampler() {
  return [](Rng& rng, std::span<double> out) { rng.fill_normal(out); };
}

PointSampler uniform_box_sampler(double lo, double hi) {
  if (!(hi > lo)) throw DomainError("uniform_box_sampler: requires hi > lo");
  return [lo, hi](Rng& rng, std::span<double> out) {
    for (double& v : out) v = rng.uniform(lo, hi);
  };
}

PointSet draw_points(const PointSampler& sampler, std::size_t n, std::size_t dim, Rng& rng) {
  PointSet p(n, dim);
  for (std::size_t i = 0; i < n; ++i) sampler(rng, p.row(i));
  return p;
}

PairSampler independent_pair_sampler(std::size_t dim, PointSampler source, PointSampler target) {
  return {dim, [source = std::move(source), target = std::move(target)](Rng& rng, PointSet& x0, PointSet& x1) {
            for (std::size_t i = 0; i < x0.size(); ++i) source(rng, x0.row(i));
            for (std::size_t i = 0; i < x1.size(); ++i) target(rng, x1.row(i));
          }};
}

PointSampler two_gaussian_sampler(double center, double std) {
  if (!(std > 0.0)) throw DomainError("two_gaussian_sampler: std must be > 0");
  return [center, std](Rng& rng, std::span<double> out) {
    for (double& v : out) {
      const double c = rng.coin() ? center : -center;
      v = c + std * rng.normal();
    }
  };
}

PairSampler two_gaussian_pair_sampler(double center, double std) {
  return independent_pair_sampler(1, standard_normal_sampler(), two_gaussian_sampler(center, std));
}

PointSampler hypercube_corner_sampler(double corner_std) {
  if (!(corner_std > 0.0)) throw DomainError("hypercube sampler: corner_std must be > 0");
  return [corner_std](Rng& rng, std::span<double> out) {
    for (double& v : out) {
      const double c = rng.coin() ? 2.0 : -2.0;
      v = c + corner_std * rng.normal();
    }
  };
}

PairSampler gen_hypercube_pair_sampler(std::size_t d, double corner_std) {
  if (d == 0) throw DomainError("hypercube sampler: d must be >= 1");
  return independent_pair_sampler(d, uniform_box_sampler(-1.0, 1.0), hypercube_corner_sampler(corner_std));
}

// --- 2D ----------------------------------------------------------------------

std::string_view to_string(Dataset2D name) {
  switch (name) {
    case Dataset2D::circle: return "circle";
    case Dataset2D::s_curve: return "s_curve";
    case Dataset2D::eight_gaussians: return "eight_gaussians";
    case Dataset2D::moons: return "moons";
    case Dataset2D::uniform_square: return "uniform_square";
  }
  return "?";
}

Dataset2D parse_dataset_2d(std::string_view name) {
  for (auto d : {Dataset2D::circle, Dataset2D::s_curve, Dataset2D::eight_gaussians, Dataset2D::moons,
                 Dataset2D::uniform_square})
    if (name == to_string(d)) return d;
  throw ConfigError("unknown 2D dataset '" + std::string(name) + "'");
}

namespace {

constexpr double kPi = std::numbers::pi;

void sample_2d(Dataset2D name, Rng& rng, std::span<double> out) {
  if (out.size() != 2) throw DomainError("2D dataset sampler called with dimension " + std::to_string(out.size()));
  switch (name) {
    case Dataset2D::circle: {
      const double a = rng.uniform(0.0, 2.0 * kPi);
      const double r = 1.0 + 0.05 * rng.normal();
      out[0] = r * std::cos(a);
      out[1] = r * std::sin(a);
      return;
    }
    case Dataset2D::s_curve: {
      const double u = rng.uniform(-kPi, kPi);
      const double sign = u < 0.0 ? -1.0 : 1.0;
      out[0] = 2.0 * std::sin(u) + 0.05 * rng.normal();
      out[1] = sign * (std::cos(u) - 1.0) + 0.05 * rng.normal();
      return;
    }
    case Dataset2D::eight_gaussians: {
      const double a = static_cast<double>(rng.index(8)) * kPi / 4.0;
      out[0] = 2.0 * std::cos(a) + 0.1 * rng.normal();
      out[1] = 2.0 * std::sin(a) + 0.1 * rng.normal();
      return;
    }
    case Dataset2D::moons: {
      const double a = rng.uniform(0.0, kPi);
      if (rng.coin()) {
        out[0] = std::cos(a);
        out[1] = std::sin(a);
      } else {
        out[0] = 1.0 - std::cos(a);
        out[1] = 0.5 - std::sin(a);
      }
      out[0] += 0.05 * rng.normal();
      out[1] += 0.05 * rng.normal();
      return;
    }
    case Dataset2D::uniform_square:
      out[0] = rng.uniform(-2.0, 2.0);
      out[1] = rng.uniform(-2.0, 2.0);
      return;
  }
}

}  // namespace

PointSampler dataset_2d_sampler(Dataset2D name) {
  return [name](Rng& rng, std::span<double> out) { sample_2d(name, rng, out); };
}

PointSet gen_2d_dataset(Dataset2D name, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("gen_2d_dataset: n must be >= 1");
  return draw_points(dataset_2d_sampler(name), n, 2, rng);
}

// --- chirality ---------------------------------------------------------------

namespace {

// Uniform random rotation from a normalised Gaussian quaternion.
std::array<Vec3, 3> random_rotation(Rng& rng) {
  double q[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : q) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

}  // namespace

ChiralCenter chiral_toy_center() { return {"c0", {1, 2, 3, 4}, Handedness::R, CenterSource::product}; }

PointSampler chiral_toy_sampler() {
  return [](Rng& rng, std::span<double> out) {
    if (out.size() != kChiralToyDim) throw DomainError("chiral toy sampler: wrong dimension");
    // Vertices of a regular tetrahedron centred at the origin, edge 2 sqrt(2).
    static constexpr Vec3 base[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    const double scale = kChiralToyEdge / (2.0 * std::sqrt(2.0));
    const bool mirror = rng.coin();
    const auto rot = random_rotation(rng);
    out[0] = out[1] = out[2] = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      Vec3 p = base[a];
      if (mirror) p[0] = -p[0];
      for (std::size_t r = 0; r < 3; ++r) {
        const double v = scale * (rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2]);
        out[3 * (a + 1) + r] = v + kChiralToyJitter * rng.normal();
      }
    }
  };
}

PairSampler gen_chiral_toy_sampler() {
  return independent_pair_sampler(kChiralToyDim, standard_normal_sampler(), chiral_toy_sampler());
}

}  // namespace flowsteer
