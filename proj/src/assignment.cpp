#include "flowsteer/assignment.hpp"

#include <limits>
#include <string>

#include "flowsteer/error.hpp"
#include "flowsteer/kernels.hpp"

namespace flowsteer {

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw DomainError("assignment: cost matrix must be n x n");
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows), v (cols); col_owner[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    col_owner[0] = row;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw NumericError("assignment: non-finite cost matrix");
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[col_owner[j] - 1] = j - 1;
  return perm;
}

std::vector<std::size_t> minibatch_ot_pairing(const PointSet& batch0, const PointSet& batch1, std::size_t cap) {
  if (batch0.size() != batch1.size()) throw DomainError("minibatch OT: batch sizes differ");
  if (batch0.dim() != batch1.dim()) throw DomainError("minibatch OT: dimensions differ");
  const std::size_t n = batch0.size();
  if (n > cap)
    throw DomainError("minibatch OT: batch of " + std::to_string(n) + " exceeds exact-assignment cap " +
                      std::to_string(cap));
  std::vector<double> cost(n * n);
  const std::size_t d = batch0.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = kernels::squared_distance(d, batch0.row(i).data(), batch1.row(j).data());
  return solve_assignment(cost, n);
}

}  // namespace flowsteer
