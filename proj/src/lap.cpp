#include "mobigraph/lap.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mobigraph/error.hpp"

namespace mobigraph {

Assignment solve_lap(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) {
    throw DimensionError("solve_lap: cost matrix is " + std::to_string(cost.rows()) + "x" +
                         std::to_string(cost.cols()));
  }
  if (!cost.allFinite()) throw DataError("solve_lap: cost matrix has non-finite entries");

  const auto n = static_cast<std::size_t>(cost.rows());
  if (n == 0) return {Permutation::identity(0), 0.0};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    match_col[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match_col[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match_col[j] - 1] = j - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i]));
  }
  return {Permutation(std::move(assignment)), total};
}

}  // namespace mobigraph
