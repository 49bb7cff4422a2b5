#include "mobigraph/layout.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mobigraph/random.hpp"

namespace mobigraph {

MobilityGraph layout_fruchterman_reingold(const MobilityGraph& g, std::uint64_t seed,
                                          int iterations) {
  MobilityGraph out = g;
  out.node_attrs.setZero();

  std::vector<Eigen::Index> real;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.null_mask[i]) real.push_back(static_cast<Eigen::Index>(i));
  }
  const std::size_t n = real.size();
  if (n == 0) return out;

  Rng rng(seed);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform();
    y[i] = rng.uniform();
  }

  const double max_w = g.adjacency.size() > 0 ? g.adjacency.maxCoeff() : 0.0;
  const double k = std::sqrt(1.0 / static_cast<double>(n));
  const double t0 = 0.1;
  constexpr double kMinDist = 1e-9;

  std::vector<double> dx(n), dy(n);
  for (int it = 0; it < iterations; ++it) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dy.begin(), dy.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double ddx = x[i] - x[j];
        double ddy = y[i] - y[j];
        double d = std::sqrt(ddx * ddx + ddy * ddy);
        if (d < kMinDist) {
          // Coincident points: push apart along a fixed diagonal.
          ddx = kMinDist;
          ddy = kMinDist;
          d = std::sqrt(2.0) * kMinDist;
        }
        const double w = max_w > 0.0 ? g.adjacency(real[i], real[j]) / max_w : 0.0;
        // Repulsion k^2/d minus weighted attraction d^2/k, along the unit vector.
        const double f = (k * k / d - w * d * d / k) / d;
        dx[i] += ddx * f;
        dy[i] += ddy * f;
        dx[j] -= ddx * f;
        dy[j] -= ddy * f;
      }
    }
    const double temp = t0 * (1.0 - static_cast<double>(it) / iterations);
    for (std::size_t i = 0; i < n; ++i) {
      const double len = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
      if (len > 0.0) {
        const double step = std::min(len, temp) / len;
        x[i] += dx[i] * step;
        y[i] += dy[i] * step;
      }
    }
  }

  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cx += x[i];
    cy += y[i];
  }
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  double extent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] -= cx;
    y[i] -= cy;
    extent = std::max({extent, std::abs(x[i]), std::abs(y[i])});
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.node_attrs(real[i], 0) = extent > 0.0 ? x[i] / extent : 0.0;
    out.node_attrs(real[i], 1) = extent > 0.0 ? y[i] / extent : 0.0;
  }
  return out;
}

}  // namespace mobigraph
