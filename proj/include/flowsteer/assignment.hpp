#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flowsteer/point_set.hpp"

namespace flowsteer {

inline constexpr std::size_t kMaxExactAssignment = 512;

/// Exact solution of the square linear assignment problem: returns `perm` with
/// row i assigned to column perm[i], minimising sum_i cost[i][perm[i]].
/// Shortest-augmenting-path Hungarian method, O(n^3).
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// Permutation pi minimising sum_i |batch0[i] - batch1[pi(i)]|^2.
std::vector<std::size_t> minibatch_ot_pairing(const PointSet& batch0, const PointSet& batch1,
                                              std::size_t cap = kMaxExactAssignment);

}  // namespace flowsteer
