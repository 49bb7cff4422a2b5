#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mobigraph/graph.hpp"

namespace mobigraph {

// Node states, one row per node.
using FeatureMatrix = Eigen::MatrixXd;

struct NodePair {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const NodePair&, const NodePair&) = default;
};

struct LabeledPair {
  NodePair pair;
  double label = 0.0;  // 1 for an edge, 0 for a non-edge
};

// Rows [x, y, degree / max_degree]. Degree counts nonzero adjacency entries.
FeatureMatrix build_features(const MobilityGraph& g);

// Undirected edge list (i < j) of nonzero, real-to-real adjacency entries.
std::vector<NodePair> graph_edges(const MobilityGraph& g);

// Mean-over-neighbours operator: M = S H with S(i, j) = 1 / |N(i)| for each
// neighbour j. Nodes without neighbours aggregate to zero.
class MeanAggregator {
 public:
  MeanAggregator(std::size_t n, std::span<const NodePair> edges);

  FeatureMatrix aggregate(const FeatureMatrix& h) const { return op_ * h; }
  // Adjoint, used by the backward pass.
  FeatureMatrix scatter(const FeatureMatrix& g) const { return op_.transpose() * g; }
  std::size_t size() const { return static_cast<std::size_t>(op_.rows()); }

 private:
  Eigen::MatrixXd op_;
};

// One GraphSAGE-mean layer: h' = h W_self + mean_{N(i)}(h) W_neigh + bias.
struct SageLayer {
  Eigen::MatrixXd w_self;   // f_in x f_out
  Eigen::MatrixXd w_neigh;  // f_in x f_out
  Eigen::RowVectorXd bias;  // f_out

  static SageLayer zeros(Eigen::Index f_in, Eigen::Index f_out);
  Eigen::Index in_dim() const { return w_self.rows(); }
  Eigen::Index out_dim() const { return w_self.cols(); }
};

struct LayerOptions {
  bool training = false;
  bool final_layer = false;  // no relu, no dropout
  double dropout_rate = 0.0;
  std::uint64_t dropout_seed = 0;
};

// relu and inverted dropout are applied after the linear part unless this is
// the final layer. The dropout mask depends only on dropout_seed.
FeatureMatrix sage_forward(const SageLayer& layer, const FeatureMatrix& h,
                           const MeanAggregator& agg, const LayerOptions& opts);

// dot(h_u, h_v)
double edge_score(const FeatureMatrix& h, NodePair pair);

double sigmoid(double x);

// Summed binary cross-entropy of sigmoid(logit), clamped to [1e-12, 1 - 1e-12].
double bce_loss(std::span<const double> logits, std::span<const double> labels);

struct ModelConfig {
  Eigen::Index in_dim = 3;
  Eigen::Index hidden_dim = 16;
  Eigen::Index out_dim = 16;
  int depth = 2;
  double dropout_rate = 0.5;
};

// 2 layers up to 32 nodes, 3 beyond.
int default_depth(std::size_t n_nodes);

struct AdamState {
  std::vector<SageLayer> m;
  std::vector<SageLayer> v;
  long step = 0;
};

struct LinkPredictor {
  std::vector<SageLayer> layers;
  double dropout_rate = 0.5;
  AdamState adam;
  std::uint64_t seed = 0;

  // Weights uniform in [-1/sqrt(f_in), 1/sqrt(f_in)], zero bias.
  static LinkPredictor init(const ModelConfig& cfg, std::uint64_t seed);
};

nlohmann::json model_to_json(const LinkPredictor& model);
LinkPredictor model_from_json(const nlohmann::json& doc);

// Full stack forward. In training mode layer l uses dropout seed
// derive_seed(dropout_seed, "layer-l").
FeatureMatrix model_forward(const LinkPredictor& model, const FeatureMatrix& x,
                            const MeanAggregator& agg, bool training,
                            std::uint64_t dropout_seed = 0);

struct GradientResult {
  double loss = 0.0;
  std::vector<SageLayer> grads;  // same shapes as model.layers
};

// Exact reverse-mode gradients of bce_loss over `batch`.
GradientResult gradients(const LinkPredictor& model, const FeatureMatrix& x,
                         const MeanAggregator& agg, std::span<const LabeledPair> batch,
                         bool training, std::uint64_t dropout_seed = 0);

// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
void adam_step(LinkPredictor& model, const std::vector<SageLayer>& grads, double lr = 0.01);

struct EdgeSplit {
  std::vector<NodePair> train_pos;
  std::vector<NodePair> test_pos;
  std::vector<NodePair> train_neg;  // epoch-0 sample
  std::vector<NodePair> test_neg;
  std::vector<NodePair> negative_pool;  // non-edges not used as test negatives
  std::uint64_t seed = 0;

  // |train_pos| non-edges drawn uniformly (with replacement) for `epoch`.
  std::vector<NodePair> train_negatives(int epoch) const;
};

// Null nodes never appear in any pair.
EdgeSplit split_edges(const MobilityGraph& g, double test_fraction, std::uint64_t seed);

// g with the split's test positives removed.
MobilityGraph training_structure(const MobilityGraph& g, const EdgeSplit& split);

struct TrainConfig {
  int epochs = 5000;
  double lr = 0.01;
  std::uint64_t seed = 0;
  ModelConfig model;
};

struct TrainResult {
  LinkPredictor model;
  std::vector<double> loss_history;
};

// Full-batch training on the training structure of g.
TrainResult train_link_predictor(const MobilityGraph& g, const EdgeSplit& split,
                                 const TrainConfig& cfg);

// Inference-mode likelihoods for each candidate, in order.
std::vector<double> predict_links(const LinkPredictor& model, const MobilityGraph& structure,
                                  std::span<const NodePair> candidates);

}  // namespace mobigraph
