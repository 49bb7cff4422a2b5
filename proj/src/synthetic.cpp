#include "mobigraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mobigraph/random.hpp"

namespace mobigraph {

MobilityGraph random_geometric_graph(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  MobilityGraph g = MobilityGraph::empty(n);
  const auto m = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    g.node_attrs(i, 0) = rng.uniform(-1.0, 1.0);
    g.node_attrs(i, 1) = rng.uniform(-1.0, 1.0);
  }
  // Mean pair distance in the square is about 1.04; exp(-d/s) averages to
  // roughly `density` for s = 1.04 / -log(density) at moderate densities.
  const double scale = 1.04 / -std::log(std::clamp(density, 0.01, 0.99));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = (g.node_attrs.row(i) - g.node_attrs.row(j)).norm();
      if (rng.uniform() < std::exp(-d / scale)) {
        g.adjacency(i, j) = g.adjacency(j, i) = 5.0 + 20.0 * d;
      }
    }
  }
  return g;
}

MobilityGraph random_weighted_graph(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  MobilityGraph g = MobilityGraph::empty(n);
  const auto m = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    g.node_attrs(i, 0) = rng.uniform(-1.0, 1.0);
    g.node_attrs(i, 1) = rng.uniform(-1.0, 1.0);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (rng.uniform() < density) g.adjacency(i, j) = g.adjacency(j, i) = rng.uniform(1.0, 10.0);
    }
  }
  return g;
}

MobilityGraph perturb_weights(const MobilityGraph& g, double noise, std::uint64_t seed) {
  Rng rng(seed);
  MobilityGraph out = g;
  for (Eigen::Index i = 0; i < out.adjacency.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < out.adjacency.cols(); ++j) {
      if (out.adjacency(i, j) == 0.0) continue;
      const double w = out.adjacency(i, j) * (1.0 + noise * rng.uniform(-1.0, 1.0));
      out.adjacency(i, j) = out.adjacency(j, i) = w;
    }
  }
  return out;
}

Permutation random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  Rng rng(seed);
  rng.shuffle(m);
  return Permutation(std::move(m));
}

}  // namespace mobigraph
