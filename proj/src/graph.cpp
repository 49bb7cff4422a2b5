#include "mobigraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mobigraph/error.hpp"

namespace mobigraph {

std::string_view to_string(Modality m) {
  return m == Modality::AvgTravelTime ? "avg-time" : "trip-count";
}

std::string_view to_string(Period p) {
  switch (p) {
    case Period::AM: return "am";
    case Period::PM: return "pm";
    case Period::Unspecified: break;
  }
  return "unspecified";
}

Modality parse_modality(std::string_view s) {
  if (s == "avg-time") return Modality::AvgTravelTime;
  if (s == "trip-count") return Modality::TripCount;
  throw DataError("unknown modality '" + std::string(s) + "' (expected avg-time or trip-count)");
}

Period parse_period(std::string_view s) {
  if (s == "am") return Period::AM;
  if (s == "pm") return Period::PM;
  if (s == "unspecified") return Period::Unspecified;
  throw DataError("unknown period '" + std::string(s) + "' (expected am, pm or unspecified)");
}

std::size_t MobilityGraph::real_node_count() const {
  return static_cast<std::size_t>(std::count(null_mask.begin(), null_mask.end(), false));
}

MobilityGraph MobilityGraph::empty(std::size_t n, Modality modality, Period period) {
  MobilityGraph g;
  g.node_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.node_ids[i] = static_cast<std::int64_t>(i);
  g.node_attrs = NodeAttrs::Zero(static_cast<Eigen::Index>(n), 2);
  g.adjacency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  g.modality = modality;
  g.period = period;
  g.null_mask.assign(n, false);
  return g;
}

bool operator==(const MobilityGraph& a, const MobilityGraph& b) {
  return a.node_ids == b.node_ids && a.modality == b.modality && a.period == b.period &&
         a.null_mask == b.null_mask && a.node_attrs.rows() == b.node_attrs.rows() &&
         a.node_attrs == b.node_attrs && a.adjacency.rows() == b.adjacency.rows() &&
         a.adjacency.cols() == b.adjacency.cols() && a.adjacency == b.adjacency;
}

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (std::size_t i = 0; i < mapping_.size(); ++i) {
    const std::size_t j = mapping_[i];
    if (j >= mapping_.size() || seen[j]) {
      throw DataError("permutation is not a bijection: entry " + std::to_string(i) + " = " +
                      std::to_string(j));
    }
    seen[j] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = i;
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
  return Permutation(std::move(inv));
}

Permutation Permutation::then(const Permutation& b) const {
  if (b.size() != size()) {
    throw DimensionError("cannot compose permutations of size " + std::to_string(size()) +
                         " and " + std::to_string(b.size()));
  }
  std::vector<std::size_t> c(size());
  for (std::size_t i = 0; i < size(); ++i) c[i] = mapping_[b[i]];
  return Permutation(std::move(c));
}

Eigen::MatrixXd Permutation::matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(i, static_cast<Eigen::Index>(mapping_[i])) = 1.0;
  return p;
}

MobilityGraph permute_graph(const MobilityGraph& g, const Permutation& p) {
  if (p.size() != g.size()) {
    throw DimensionError("permutation of size " + std::to_string(p.size()) +
                         " applied to graph with " + std::to_string(g.size()) + " nodes");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  MobilityGraph out;
  out.modality = g.modality;
  out.period = g.period;
  out.node_ids.resize(g.size());
  out.null_mask.resize(g.size());
  out.node_attrs.resize(n, 2);
  out.adjacency.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto pi = static_cast<Eigen::Index>(p[static_cast<std::size_t>(i)]);
    out.node_ids[i] = g.node_ids[pi];
    out.null_mask[i] = g.null_mask[pi];
    out.node_attrs.row(i) = g.node_attrs.row(pi);
    for (Eigen::Index k = 0; k < n; ++k) {
      out.adjacency(i, k) = g.adjacency(pi, static_cast<Eigen::Index>(p[static_cast<std::size_t>(k)]));
    }
  }
  return out;
}

double graph_distance(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2) {
  if (a1.rows() != a2.rows() || a1.cols() != a2.cols()) {
    throw DimensionError("graph_distance: " + std::to_string(a1.rows()) + "x" +
                         std::to_string(a1.cols()) + " vs " + std::to_string(a2.rows()) + "x" +
                         std::to_string(a2.cols()));
  }
  return (a1 - a2).norm();
}

InterpolationPath interpolate(const MobilityGraph& g1, const MobilityGraph& g2_registered,
                              int num_steps) {
  if (num_steps < 2) {
    throw DataError("interpolate: num_steps must be >= 2, got " + std::to_string(num_steps));
  }
  if (g1.size() != g2_registered.size()) {
    throw DimensionError("interpolate: graphs have " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2_registered.size()) + " nodes");
  }
  const auto& a1 = g1.adjacency;
  const auto& a2 = g2_registered.adjacency;
  InterpolationPath path;
  for (int k = 0; k < num_steps; ++k) {
    const double t = static_cast<double>(k) / (num_steps - 1);
    path.t.push_back(t);
    if (k == 0) {
      path.steps.push_back(g1);
      continue;
    }
    if (k == num_steps - 1) {
      path.steps.push_back(g2_registered);
      continue;
    }
    MobilityGraph g = g1;
    g.period = g1.period == g2_registered.period ? g1.period : Period::Unspecified;
    // std::lerp keeps every entry between its endpoints.
    g.adjacency = a1.binaryExpr(a2, [t](double x, double y) { return std::lerp(x, y, t); });
    g.node_attrs = g1.node_attrs.binaryExpr(g2_registered.node_attrs,
                                            [t](double x, double y) { return std::lerp(x, y, t); });
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.null_mask[i] = g1.null_mask[i] && g2_registered.null_mask[i];
    }
    path.steps.push_back(std::move(g));
  }
  return path;
}

std::vector<std::string> validate_graph(const MobilityGraph& g) {
  std::vector<std::string> out;
  const auto n = g.node_ids.size();
  if (static_cast<std::size_t>(g.adjacency.rows()) != n ||
      static_cast<std::size_t>(g.adjacency.cols()) != n ||
      static_cast<std::size_t>(g.node_attrs.rows()) != n || g.null_mask.size() != n) {
    std::ostringstream os;
    os << "size mismatch: node_ids " << n << ", node_attrs " << g.node_attrs.rows()
       << ", adjacency " << g.adjacency.rows() << "x" << g.adjacency.cols() << ", null_mask "
       << g.null_mask.size();
    out.push_back(os.str());
    return out;
  }
  std::vector<std::int64_t> ids = g.node_ids;
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) out.push_back("duplicate node id " + std::to_string(ids[i]));
  }
  const auto m = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (g.adjacency(i, i) != 0.0) {
      out.push_back("nonzero diagonal at (" + std::to_string(i) + "," + std::to_string(i) + ")");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const double a = g.adjacency(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        out.push_back("negative or non-finite weight at (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
      }
      if (j > i && a != g.adjacency(j, i)) {
        out.push_back("asymmetric adjacency at (" + std::to_string(i) + "," + std::to_string(j) +
                      ")");
      }
    }
    if (g.null_mask[i]) {
      if (g.adjacency.row(i).cwiseAbs().sum() != 0.0 || g.adjacency.col(i).cwiseAbs().sum() != 0.0) {
        out.push_back("null node " + std::to_string(i) + " has nonzero edges (null-mask rule)");
      }
      if (!g.node_attrs.row(i).isZero(0.0)) {
        out.push_back("null node " + std::to_string(i) + " has nonzero attributes (null-mask rule)");
      }
    }
  }
  return out;
}

}  // namespace mobigraph
