#include "mobigraph/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "mobigraph/error.hpp"
#include "mobigraph/lap.hpp"
#include "mobigraph/random.hpp"

namespace mobigraph {

using nlohmann::json;

void MatchConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(null_cost >= 0.0)) throw ConfigError("null_cost must be >= 0");
}

double DoublyStochasticMatrix::marginal_error() const {
  const double rows = (entries.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (entries.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

json match_result_to_json(const MatchResult& r) {
  json doc;
  doc["permutation"] = r.permutation.mapping();
  doc["lambda"] = r.lambda;
  doc["objective"] = r.objective;
  doc["d_pre"] = r.d_pre;
  doc["d_post"] = r.d_post;
  // Two labelling conventions for the same pair of distances circulate.
  doc["distance_aliases"] = {{"d_pre", {"d0 (before matching)", "d (original)"}},
                             {"d_post", {"d (after matching)", "d0 (after matching)"}}};
  doc["objective_trace"] = r.objective_trace;
  doc["restarts_used"] = r.restarts_used;
  return doc;
}

MatchResult match_result_from_json(const json& doc) {
  try {
    MatchResult r;
    r.permutation = Permutation(doc.at("permutation").get<std::vector<std::size_t>>());
    r.lambda = doc.value("lambda", 0.0);
    r.objective = doc.value("objective", 0.0);
    r.d_pre = doc.value("d_pre", 0.0);
    r.d_post = doc.value("d_post", 0.0);
    r.objective_trace = doc.value("objective_trace", std::vector<double>{});
    r.restarts_used = doc.value("restarts_used", 0);
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed match result: ") + e.what());
  }
}

std::pair<MobilityGraph, MobilityGraph> pad_with_null_nodes(const MobilityGraph& g1,
                                                            const MobilityGraph& g2) {
  const std::size_t n1 = g1.size();
  const std::size_t n2 = g2.size();
  auto pad = [](const MobilityGraph& g, std::size_t extra) {
    const std::size_t n = g.size();
    const auto total = static_cast<Eigen::Index>(n + extra);
    const auto m = static_cast<Eigen::Index>(n);
    MobilityGraph out = g;
    out.adjacency = Eigen::MatrixXd::Zero(total, total);
    out.adjacency.topLeftCorner(m, m) = g.adjacency;
    out.node_attrs = NodeAttrs::Zero(total, 2);
    out.node_attrs.topRows(m) = g.node_attrs;
    for (std::size_t k = 0; k < extra; ++k) {
      out.node_ids.push_back(-static_cast<std::int64_t>(k + 1));
      out.null_mask.push_back(true);
    }
    return out;
  };
  return {pad(g1, n2), pad(g2, n1)};
}

NodeCostMatrix node_cost_matrix(const MobilityGraph& g1, const MobilityGraph& g2,
                                double null_cost) {
  if (g1.size() != g2.size()) {
    throw DimensionError("node_cost_matrix: graphs have " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2.size()) + " nodes");
  }
  const auto n = static_cast<Eigen::Index>(g1.size());
  NodeCostMatrix d{Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const bool null_k = g1.null_mask[k];
    for (Eigen::Index l = 0; l < n; ++l) {
      const bool null_l = g2.null_mask[l];
      if (null_k && null_l) {
        d.entries(k, l) = 0.0;
      } else if (null_k || null_l) {
        d.entries(k, l) = null_cost;
      } else {
        d.entries(k, l) = (g1.node_attrs.row(k) - g2.node_attrs.row(l)).norm();
      }
    }
  }
  return d;
}

namespace {

void require_square_same(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2,
                         Eigen::Index n, const char* what) {
  if (a1.rows() != n || a1.cols() != n || a2.rows() != n || a2.cols() != n) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(n) + "x" +
                         std::to_string(n) + " matrices, got " + std::to_string(a1.rows()) + "x" +
                         std::to_string(a1.cols()) + " and " + std::to_string(a2.rows()) + "x" +
                         std::to_string(a2.cols()));
  }
}

}  // namespace

double matching_objective(const Permutation& p, const Eigen::MatrixXd& a1,
                          const Eigen::MatrixXd& a2, const NodeCostMatrix& d, double lambda) {
  const auto n = static_cast<Eigen::Index>(p.size());
  require_square_same(a1, a2, n, "matching_objective");
  require_square_same(d.entries, d.entries, n, "matching_objective node costs");
  double edge_sq = 0.0;
  double node = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto pi = static_cast<Eigen::Index>(p[static_cast<std::size_t>(i)]);
    node += d.entries(i, pi);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double diff = a1(i, k) - a2(pi, static_cast<Eigen::Index>(p[static_cast<std::size_t>(k)]));
      edge_sq += diff * diff;
    }
  }
  return lambda * std::sqrt(edge_sq) + (1.0 - lambda) * node;
}

double relaxed_objective(const Eigen::MatrixXd& p, const Eigen::MatrixXd& a1,
                         const Eigen::MatrixXd& a2, const Eigen::MatrixXd& c, double lambda) {
  return -lambda * (a1 * p * a2).cwiseProduct(p).sum() + (1.0 - lambda) * p.cwiseProduct(c).sum();
}

RelaxationResult frank_wolfe(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2,
                             const Eigen::MatrixXd& c, double lambda,
                             const DoublyStochasticMatrix& start, const MatchConfig& cfg,
                             const IterateObserver& observer) {
  const Eigen::Index n = start.entries.rows();
  require_square_same(a1, a2, n, "frank_wolfe");
  require_square_same(c, start.entries, n, "frank_wolfe");

  RelaxationResult res;
  Eigen::MatrixXd p = start.entries;
  // Tr(A1 P A2 P^T) = <A1 P A2, P>; keep A1 P A2 updated incrementally.
  Eigen::MatrixXd a1pa2 = a1 * p * a2;
  const Eigen::MatrixXd a1t = a1.transpose();
  const Eigen::MatrixXd a2t = a2.transpose();
  auto value = [&](const Eigen::MatrixXd& pm, const Eigen::MatrixXd& q) {
    return -lambda * q.cwiseProduct(pm).sum() + (1.0 - lambda) * pm.cwiseProduct(c).sum();
  };
  double f = value(p, a1pa2);
  res.trace.push_back(f);
  if (observer) observer(p, f);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    // grad Tr(A1 P A2 P^T) = A1^T P A2^T + A1 P A2
    const Eigen::MatrixXd grad =
        -lambda * (a1t * p * a2t + a1pa2) + (1.0 - lambda) * c;
    const Assignment dir = solve_lap(grad);
    if (std::find(res.vertices.begin(), res.vertices.end(), dir.permutation) ==
        res.vertices.end()) {
      res.vertices.push_back(dir.permutation);
    }
    Eigen::MatrixXd r = -p;
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i, static_cast<Eigen::Index>(dir.permutation[static_cast<std::size_t>(i)])) += 1.0;
    }
    const double slope = grad.cwiseProduct(r).sum();  // <grad, Q - P> <= 0
    res.final_gap = -slope;
    if (!cfg.fixed_iterations && res.final_gap < cfg.convergence_tol) break;

    // f(P + a R) = f + slope * a + curv * a^2
    const Eigen::MatrixXd a1ra2 = a1 * r * a2;
    const double curv = -lambda * a1ra2.cwiseProduct(r).sum();
    double alpha;
    if (curv > 0.0) {
      alpha = std::clamp(-slope / (2.0 * curv), 0.0, 1.0);
    } else {
      alpha = (curv + slope < 0.0) ? 1.0 : 0.0;
    }
    ++res.iterations;
    if (alpha == 0.0) {
      res.trace.push_back(f);
      if (observer) observer(p, f);
      if (!cfg.fixed_iterations) break;
      continue;
    }
    p += alpha * r;
    a1pa2 += alpha * a1ra2;
    f = value(p, a1pa2);
    if (!std::isfinite(f)) throw NumericalError("frank_wolfe: objective became non-finite");
    res.trace.push_back(f);
    if (observer) observer(p, f);
  }
  res.solution.entries = std::move(p);
  return res;
}

DoublyStochasticMatrix random_doubly_stochastic(std::size_t n, std::uint64_t seed) {
  const auto m = static_cast<Eigen::Index>(n);
  Rng rng(seed);
  Eigen::MatrixXd p(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) p(i, j) = rng.uniform(0.1, 1.0);
  }
  DoublyStochasticMatrix out{std::move(p)};
  for (int sweep = 0; sweep < 10000; ++sweep) {
    out.entries.array().colwise() /= out.entries.rowwise().sum().array();
    out.entries.array().rowwise() /= out.entries.colwise().sum().array();
    if (out.marginal_error() < 1e-13) break;
  }
  return out;
}

MatchResult faq_match(const MobilityGraph& g1, const MobilityGraph& g2, const MatchConfig& cfg,
                      const IterateObserver& observer) {
  cfg.validate();
  if (g1.size() != g2.size()) {
    throw DimensionError("faq_match: graphs have " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2.size()) + " nodes; pad them first");
  }
  const std::size_t n = g1.size();
  const auto& a1 = g1.adjacency;
  const auto& a2 = g2.adjacency;
  const NodeCostMatrix d = node_cost_matrix(g1, g2, cfg.null_cost);

  MatchResult best;
  best.lambda = cfg.lambda;
  best.permutation = Permutation::identity(n);
  best.objective = matching_objective(best.permutation, a1, a2, d, cfg.lambda);

  double best_run_objective = std::numeric_limits<double>::infinity();
  const auto m = static_cast<Eigen::Index>(n);
  for (int r = 0; r < cfg.restarts; ++r) {
    DoublyStochasticMatrix start;
    if (r == 0) {
      start.entries = Eigen::MatrixXd::Constant(m, m, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    } else {
      start = random_doubly_stochastic(n, derive_seed(cfg.seed, "faq-restart-" + std::to_string(r)));
    }
    RelaxationResult run = frank_wolfe(a1, a2, d.entries, cfg.lambda, start, cfg, observer);
    // Nearest permutation: maximize <P, Q> over permutations Q.
    const Assignment proj = solve_lap(-run.solution.entries);
    const double obj = matching_objective(proj.permutation, a1, a2, d, cfg.lambda);
    if (obj < best_run_objective) {
      best_run_objective = obj;
      best.objective_trace = std::move(run.trace);
    }
    if (obj < best.objective) {
      best.objective = obj;
      best.permutation = proj.permutation;
    }
    for (const Permutation& v : run.vertices) {
      const double vo = matching_objective(v, a1, a2, d, cfg.lambda);
      if (vo < best.objective) {
        best.objective = vo;
        best.permutation = v;
      }
    }
  }
  best.restarts_used = cfg.restarts;
  best.d_pre = graph_distance(a1, a2);
  best.d_post = graph_distance(a1, permute_graph(g2, best.permutation).adjacency);
  return best;
}

MatchResult brute_force_match(const MobilityGraph& g1, const MobilityGraph& g2, double lambda,
                              double null_cost) {
  if (g1.size() != g2.size()) {
    throw DimensionError("brute_force_match: graphs have " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2.size()) + " nodes");
  }
  if (g1.size() > 8) {
    throw ConfigError("brute_force_match refuses n = " + std::to_string(g1.size()) +
                      " (limit 8)");
  }
  const NodeCostMatrix d = node_cost_matrix(g1, g2, null_cost);
  std::vector<std::size_t> perm(g1.size());
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best;
  best.lambda = lambda;
  best.objective = std::numeric_limits<double>::infinity();
  do {
    const Permutation p(perm);
    const double obj = matching_objective(p, g1.adjacency, g2.adjacency, d, lambda);
    if (obj < best.objective) {
      best.objective = obj;
      best.permutation = p;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.d_pre = graph_distance(g1.adjacency, g2.adjacency);
  best.d_post = graph_distance(g1.adjacency, permute_graph(g2, best.permutation).adjacency);
  return best;
}

RegisteredPair match_graphs(const MobilityGraph& g1, const MobilityGraph& g2,
                            const MatchConfig& cfg) {
  RegisteredPair out;
  MobilityGraph h2;
  if (g1.size() == g2.size()) {
    out.g1 = g1;
    h2 = g2;
  } else {
    std::tie(out.g1, h2) = pad_with_null_nodes(g1, g2);
  }
  out.result = faq_match(out.g1, h2, cfg);
  out.g2_registered = permute_graph(h2, out.result.permutation);
  return out;
}

}  // namespace mobigraph
