#pragma once

// Independent reference computations for tests. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Elementwise sqrt(sum (a - b)^2).
inline double frobenius_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  }
  return std::sqrt(s);
}

inline Eigen::MatrixXd permutation_matrix(const std::vector<std::size_t>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(m[i])) = 1.0;
  return p;
}

// P A P^T by explicit triple loops.
inline Eigen::MatrixXd conjugate(const Eigen::MatrixXd& p, const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd pa = Eigen::MatrixXd::Zero(n, n), out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j) pa(i, j) += p(i, k) * a(k, j);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j) out(i, j) += pa(i, k) * p(j, k);
  return out;
}

// Minimum of sum_i cost(i, p(i)) over every permutation.
inline double brute_force_lap(const Eigen::MatrixXd& cost) {
  std::vector<std::size_t> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      s += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    }
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// lambda * ||A1 - P A2 P^T||_F + (1 - lambda) * sum_i D(i, p(i)) with the
// conjugation done by matrix products.
inline double matching_objective(const std::vector<std::size_t>& m, const Eigen::MatrixXd& a1,
                                 const Eigen::MatrixXd& a2, const Eigen::MatrixXd& d,
                                 double lambda) {
  const Eigen::MatrixXd p = permutation_matrix(m);
  double node = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    node += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m[i]));
  }
  return lambda * frobenius_distance(a1, conjugate(p, a2)) + (1.0 - lambda) * node;
}

// Exhaustive minimum of matching_objective.
inline double brute_force_qap(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2,
                              const Eigen::MatrixXd& d, double lambda) {
  std::vector<std::size_t> perm(static_cast<std::size_t>(a1.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, matching_objective(perm, a1, a2, d, lambda));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Central finite difference of f at x along every coordinate of `param`.
template <typename Param, typename F>
Eigen::MatrixXd central_difference(Param& param, F&& f, double step) {
  Eigen::MatrixXd g(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double saved = param(i, j);
      param(i, j) = saved + step;
      const double up = f();
      param(i, j) = saved - step;
      const double down = f();
      param(i, j) = saved;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-10});
  return (analytic - numeric).norm() / scale;
}

}  // namespace oracle
