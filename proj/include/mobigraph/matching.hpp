#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mobigraph/graph.hpp"

namespace mobigraph {

struct MatchConfig {
  double lambda = 0.5;          // edge term weight; node term gets 1 - lambda
  int max_iterations = 100;
  double convergence_tol = 1e-6;  // Frank-Wolfe gap threshold
  int restarts = 5;             // Frank-Wolfe runs; the first starts at the barycenter
  std::uint64_t seed = 0;
  double null_cost = 0.0;       // attribute cost of pairing a real node with a null node
  bool fixed_iterations = false;  // ignore the gap test and spend the whole budget

  // Throws ConfigError.
  void validate() const;
};

struct DoublyStochasticMatrix {
  Eigen::MatrixXd entries;

  // Largest |row sum - 1| or |column sum - 1|.
  double marginal_error() const;
};

// D(k, l) = ||v1_k - v2_l||; null_cost when exactly one side is null, 0 when
// both are.
struct NodeCostMatrix {
  Eigen::MatrixXd entries;
};

struct MatchResult {
  Permutation permutation;
  double lambda = 0.0;
  double objective = 0.0;  // unsquared edge norm plus node cost at `permutation`
  double d_pre = 0.0;      // ||A1 - A2||
  double d_post = 0.0;     // ||A1 - P A2 P^T||
  std::vector<double> objective_trace;  // relaxed objective per Frank-Wolfe iterate
  int restarts_used = 0;
};

nlohmann::json match_result_to_json(const MatchResult& r);
MatchResult match_result_from_json(const nlohmann::json& doc);

// Appends n2 null nodes to g1 and n1 to g2, so both have n1 + n2 nodes.
std::pair<MobilityGraph, MobilityGraph> pad_with_null_nodes(const MobilityGraph& g1,
                                                            const MobilityGraph& g2);

NodeCostMatrix node_cost_matrix(const MobilityGraph& g1, const MobilityGraph& g2,
                                double null_cost);

// lambda * ||A1 - P A2 P^T||_F + (1 - lambda) * sum_i D(i, p(i))
double matching_objective(const Permutation& p, const Eigen::MatrixXd& a1,
                          const Eigen::MatrixXd& a2, const NodeCostMatrix& d, double lambda);

// Smooth relaxation minimized over the Birkhoff polytope:
//   f(P) = -lambda * Tr(A1 P A2 P^T) + (1 - lambda) * <P, C>
double relaxed_objective(const Eigen::MatrixXd& p, const Eigen::MatrixXd& a1,
                         const Eigen::MatrixXd& a2, const Eigen::MatrixXd& c, double lambda);

struct RelaxationResult {
  DoublyStochasticMatrix solution;
  std::vector<double> trace;  // f at the start point and after every step
  int iterations = 0;
  double final_gap = 0.0;
  std::vector<Permutation> vertices;  // distinct LAP directions, in visit order
};

// Called with every iterate (including the start point) and its objective.
using IterateObserver = std::function<void(const Eigen::MatrixXd&, double)>;

// Frank-Wolfe with LAP direction finding and exact line search.
RelaxationResult frank_wolfe(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2,
                             const Eigen::MatrixXd& c, double lambda,
                             const DoublyStochasticMatrix& start, const MatchConfig& cfg,
                             const IterateObserver& observer = {});

// Positive noise balanced by alternating row/column normalization until the
// marginals are within 1e-13 of one.
DoublyStochasticMatrix random_doubly_stochastic(std::size_t n, std::uint64_t seed);

// FAQ: Frank-Wolfe restarts, each projected to a permutation, plus the identity
// and every vertex the runs stepped toward; returns the candidate with the
// lowest objective.
// Graphs must already have equal size (see pad_with_null_nodes).
MatchResult faq_match(const MobilityGraph& g1, const MobilityGraph& g2, const MatchConfig& cfg,
                      const IterateObserver& observer = {});

// Exhaustive search, n <= 8.
MatchResult brute_force_match(const MobilityGraph& g1, const MobilityGraph& g2, double lambda,
                              double null_cost = 0.0);

struct RegisteredPair {
  MobilityGraph g1;             // padded when the inputs differ in size
  MobilityGraph g2_registered;  // permute_graph(padded g2, result.permutation)
  MatchResult result;
};

// Pads only when the node counts differ, then runs faq_match.
RegisteredPair match_graphs(const MobilityGraph& g1, const MobilityGraph& g2,
                            const MatchConfig& cfg);

}  // namespace mobigraph
