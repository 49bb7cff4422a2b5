#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mobigraph {

enum class Modality { AvgTravelTime, TripCount };
enum class Period { AM, PM, Unspecified };

std::string_view to_string(Modality m);
std::string_view to_string(Period p);
Modality parse_modality(std::string_view s);
Period parse_period(std::string_view s);

using NodeAttrs = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// An annotated mobility graph: symmetric weighted adjacency plus one 2-D
// attribute row per node. Null nodes are zero-padding used for matching
// graphs of different sizes; they carry negative ids.
struct MobilityGraph {
  std::vector<std::int64_t> node_ids;
  NodeAttrs node_attrs;
  Eigen::MatrixXd adjacency;
  Modality modality = Modality::AvgTravelTime;
  Period period = Period::Unspecified;
  std::vector<bool> null_mask;

  std::size_t size() const { return node_ids.size(); }
  std::size_t real_node_count() const;

  // Zero adjacency and attributes, ids 0..n-1, no nulls.
  static MobilityGraph empty(std::size_t n, Modality modality = Modality::AvgTravelTime,
                             Period period = Period::Unspecified);

  friend bool operator==(const MobilityGraph& a, const MobilityGraph& b);
};

// Bijection on {0..n-1}. mapping[i] = j registers node j of the second graph
// to node i of the first.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> mapping);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return mapping_.size(); }
  std::size_t operator[](std::size_t i) const { return mapping_[i]; }
  const std::vector<std::size_t>& mapping() const { return mapping_; }

  Permutation inverse() const;
  // (a.then(b))[i] = a[b[i]]: permuting by a and then by b equals permuting
  // by a.then(b).
  Permutation then(const Permutation& b) const;

  // P with P(i, mapping[i]) = 1.
  Eigen::MatrixXd matrix() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> mapping_;
};

struct InterpolationPath {
  std::vector<double> t;
  std::vector<MobilityGraph> steps;
};

// Adjacency P A P^T with node rows reordered to match.
MobilityGraph permute_graph(const MobilityGraph& g, const Permutation& p);

// sqrt(sum_ij |a1_ij - a2_ij|^2): the Frobenius norm of the difference, i.e.
// the graph-space distance with the absolute difference as the edge metric.
double graph_distance(const Eigen::MatrixXd& a1, const Eigen::MatrixXd& a2);

// Straight-line walk between g1 and a g2 already registered to g1's order.
InterpolationPath interpolate(const MobilityGraph& g1, const MobilityGraph& g2_registered,
                              int num_steps);

// Empty iff every MobilityGraph invariant holds.
std::vector<std::string> validate_graph(const MobilityGraph& g);

}  // namespace mobigraph
