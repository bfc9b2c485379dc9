#pragma once

// Synthetic densities used by the benchmarks: source/target pair samplers for
// training and single-point samplers for inference priors.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "flowsteer/chirality.hpp"
#include "flowsteer/point_set.hpp"
#include "flowsteer/rng.hpp"
#include "flowsteer/sampler.hpp"
#include "flowsteer/training.hpp"

namespace flowsteer {

PointSampler standard_normal_sampler();
/// Uniform on [lo, hi]^d.
PointSampler uniform_box_sampler(double lo, double hi);
/// Draws n points with one sampler, all from `rng`.
PointSet draw_points(const PointSampler& sampler, std::size_t n, std::size_t dim, Rng& rng);

/// PairSampler drawing x0 and x1 independently.
PairSampler independent_pair_sampler(std::size_t dim, PointSampler source, PointSampler target);

// --- two-Gaussian mixture (1D) -------------------------------------------------

/// Even mixture of N(-center, std^2) and N(center, std^2).
PointSampler two_gaussian_sampler(double center = 2.0, double std = 0.3);
/// x0 ~ N(0, 1), x1 from two_gaussian_sampler.
PairSampler two_gaussian_pair_sampler(double center = 2.0, double std = 0.3);

// --- hypercube ---------------------------------------------------------------

/// c + corner_std * eps with c uniform over {-2, 2}^d.
PointSampler hypercube_corner_sampler(double corner_std);
/// x0 ~ Uniform[-1, 1]^d, x1 from hypercube_corner_sampler.
PairSampler gen_hypercube_pair_sampler(std::size_t d, double corner_std);

// --- 2D datasets -------------------------------------------------------------

enum class Dataset2D { circle, s_curve, eight_gaussians, moons, uniform_square };

std::string_view to_string(Dataset2D name);
Dataset2D parse_dataset_2d(std::string_view name);

PointSampler dataset_2d_sampler(Dataset2D name);
PointSet gen_2d_dataset(Dataset2D name, std::size_t n, Rng& rng);

// --- toy chirality -----------------------------------------------------------

inline constexpr std::size_t kChiralToyAtoms = 5;
inline constexpr std::size_t kChiralToyDim = 3 * kChiralToyAtoms;
inline constexpr double kChiralToyEdge = 1.5;
inline constexpr double kChiralToyJitter = 0.05;

/// Atom 0 at the origin, atoms 1..4 on a randomly rotated regular tetrahedron
/// (edge 1.5, jitter 0.05), mirrored with probability 1/2.
PointSampler chiral_toy_sampler();
/// x0 ~ N(0, I_15), x1 from chiral_toy_sampler.
PairSampler gen_chiral_toy_sampler();
/// The single centre of the toy molecule: atom 0 with neighbours 1..4, labelled R.
ChiralCenter chiral_toy_center();

}  // namespace flowsteer
