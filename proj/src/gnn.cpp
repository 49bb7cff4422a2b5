#include "mobigraph/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobigraph/error.hpp"
#include "mobigraph/random.hpp"

namespace mobigraph {

using nlohmann::json;

namespace {

constexpr double kProbClamp = 1e-12;

void check_pair(const FeatureMatrix& h, NodePair p) {
  const auto n = static_cast<std::size_t>(h.rows());
  if (p.u >= n || p.v >= n) {
    throw DimensionError("node pair (" + std::to_string(p.u) + "," + std::to_string(p.v) +
                         ") out of range for " + std::to_string(n) + " nodes");
  }
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             std::uint64_t seed) {
  Eigen::MatrixXd mask(rows, cols);
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

struct LayerCache {
  FeatureMatrix input;
  FeatureMatrix aggregated;
  Eigen::MatrixXd pre_activation;
  Eigen::MatrixXd mask;  // empty unless dropout was applied
};

struct ForwardPass {
  std::vector<LayerCache> layers;
  FeatureMatrix output;
};

LayerCache run_layer(const SageLayer& layer, const FeatureMatrix& h, const MeanAggregator& agg,
                     const LayerOptions& opts, FeatureMatrix& out) {
  if (h.cols() != layer.in_dim() || static_cast<std::size_t>(h.rows()) != agg.size()) {
    throw DimensionError("sage layer: input is " + std::to_string(h.rows()) + "x" +
                         std::to_string(h.cols()) + ", layer expects " +
                         std::to_string(layer.in_dim()) + " features on " +
                         std::to_string(agg.size()) + " nodes");
  }
  LayerCache c;
  c.input = h;
  c.aggregated = agg.aggregate(h);
  c.pre_activation = (h * layer.w_self + c.aggregated * layer.w_neigh).rowwise() + layer.bias;
  if (opts.final_layer) {
    out = c.pre_activation;
    return c;
  }
  out = c.pre_activation.cwiseMax(0.0);
  if (opts.training && opts.dropout_rate > 0.0) {
    c.mask = dropout_mask(out.rows(), out.cols(), opts.dropout_rate, opts.dropout_seed);
    out = out.cwiseProduct(c.mask);
  }
  return c;
}

ForwardPass forward_with_cache(const LinkPredictor& model, const FeatureMatrix& x,
                               const MeanAggregator& agg, bool training,
                               std::uint64_t dropout_seed) {
  ForwardPass pass;
  FeatureMatrix h = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    LayerOptions opts;
    opts.training = training;
    opts.final_layer = l + 1 == model.layers.size();
    opts.dropout_rate = model.dropout_rate;
    opts.dropout_seed = derive_seed(dropout_seed, "layer-" + std::to_string(l));
    FeatureMatrix next;
    pass.layers.push_back(run_layer(model.layers[l], h, agg, opts, next));
    h = std::move(next);
  }
  pass.output = std::move(h);
  return pass;
}

}  // namespace

FeatureMatrix build_features(const MobilityGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  FeatureMatrix x = FeatureMatrix::Zero(n, 3);
  x.leftCols(2) = g.node_attrs;
  Eigen::VectorXd degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    degree(i) = static_cast<double>((g.adjacency.row(i).array() != 0.0).count());
  }
  const double max_deg = n > 0 ? degree.maxCoeff() : 0.0;
  if (max_deg > 0.0) x.col(2) = degree / max_deg;
  return x;
}

std::vector<NodePair> graph_edges(const MobilityGraph& g) {
  std::vector<NodePair> edges;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.null_mask[i]) continue;
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (g.null_mask[j]) continue;
      if (g.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
        edges.push_back({i, j});
      }
    }
  }
  return edges;
}

MeanAggregator::MeanAggregator(std::size_t n, std::span<const NodePair> edges) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(m, m);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw DimensionError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                           ") out of range for " + std::to_string(n) + " nodes");
    }
    if (e.u == e.v) continue;
    adj(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = 1.0;
    adj(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = 1.0;
  }
  const Eigen::VectorXd deg = adj.rowwise().sum();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (deg(i) > 0.0) adj.row(i) /= deg(i);
  }
  op_ = std::move(adj);
}

SageLayer SageLayer::zeros(Eigen::Index f_in, Eigen::Index f_out) {
  return {Eigen::MatrixXd::Zero(f_in, f_out), Eigen::MatrixXd::Zero(f_in, f_out),
          Eigen::RowVectorXd::Zero(f_out)};
}

FeatureMatrix sage_forward(const SageLayer& layer, const FeatureMatrix& h,
                           const MeanAggregator& agg, const LayerOptions& opts) {
  FeatureMatrix out;
  run_layer(layer, h, agg, opts, out);
  return out;
}

double edge_score(const FeatureMatrix& h, NodePair pair) {
  check_pair(h, pair);
  return h.row(static_cast<Eigen::Index>(pair.u)).dot(h.row(static_cast<Eigen::Index>(pair.v)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_loss(std::span<const double> logits, std::span<const double> labels) {
  if (logits.size() != labels.size()) {
    throw DimensionError("bce_loss: " + std::to_string(logits.size()) + " logits but " +
                         std::to_string(labels.size()) + " labels");
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double p = std::clamp(sigmoid(logits[k]), kProbClamp, 1.0 - kProbClamp);
    loss -= labels[k] * std::log(p) + (1.0 - labels[k]) * std::log(1.0 - p);
  }
  return loss;
}

int default_depth(std::size_t n_nodes) { return n_nodes <= 32 ? 2 : 3; }

LinkPredictor LinkPredictor::init(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.depth < 1) throw ConfigError("model depth must be >= 1");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  LinkPredictor model;
  model.seed = seed;
  model.dropout_rate = cfg.dropout_rate;
  Rng rng(seed);
  for (int l = 0; l < cfg.depth; ++l) {
    const Eigen::Index f_in = l == 0 ? cfg.in_dim : cfg.hidden_dim;
    const Eigen::Index f_out = l + 1 == cfg.depth ? cfg.out_dim : cfg.hidden_dim;
    SageLayer layer = SageLayer::zeros(f_in, f_out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(f_in));
    for (Eigen::Index i = 0; i < f_in; ++i) {
      for (Eigen::Index j = 0; j < f_out; ++j) layer.w_self(i, j) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index i = 0; i < f_in; ++i) {
      for (Eigen::Index j = 0; j < f_out; ++j) layer.w_neigh(i, j) = rng.uniform(-bound, bound);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return data;
}

Eigen::MatrixXd matrix_from_json(const json& data, Eigen::Index rows, Eigen::Index cols) {
  if (data.size() != static_cast<std::size_t>(rows * cols)) {
    throw DimensionError("checkpoint tensor has " + std::to_string(data.size()) +
                         " values, expected " + std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = data.at(static_cast<std::size_t>(i * cols + j)).get<double>();
    }
  }
  return m;
}

}  // namespace

json model_to_json(const LinkPredictor& model) {
  json layers = json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"in_dim", l.in_dim()},
                      {"out_dim", l.out_dim()},
                      {"w_self", matrix_to_json(l.w_self)},
                      {"w_neigh", matrix_to_json(l.w_neigh)},
                      {"bias", matrix_to_json(l.bias)}});
  }
  return {{"layers", std::move(layers)},
          {"dropout_rate", model.dropout_rate},
          {"step", model.adam.step},
          {"seed", model.seed}};
}

LinkPredictor model_from_json(const json& doc) {
  try {
    LinkPredictor model;
    model.dropout_rate = doc.at("dropout_rate").get<double>();
    model.adam.step = doc.value("step", 0L);
    model.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& l : doc.at("layers")) {
      const auto f_in = l.at("in_dim").get<Eigen::Index>();
      const auto f_out = l.at("out_dim").get<Eigen::Index>();
      SageLayer layer;
      layer.w_self = matrix_from_json(l.at("w_self"), f_in, f_out);
      layer.w_neigh = matrix_from_json(l.at("w_neigh"), f_in, f_out);
      layer.bias = matrix_from_json(l.at("bias"), 1, f_out);
      if (!model.layers.empty() && model.layers.back().out_dim() != f_in) {
        throw DimensionError("checkpoint layer shapes do not chain");
      }
      model.layers.push_back(std::move(layer));
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model checkpoint: ") + e.what());
  }
}

FeatureMatrix model_forward(const LinkPredictor& model, const FeatureMatrix& x,
                            const MeanAggregator& agg, bool training,
                            std::uint64_t dropout_seed) {
  return forward_with_cache(model, x, agg, training, dropout_seed).output;
}

GradientResult gradients(const LinkPredictor& model, const FeatureMatrix& x,
                         const MeanAggregator& agg, std::span<const LabeledPair> batch,
                         bool training, std::uint64_t dropout_seed) {
  ForwardPass pass = forward_with_cache(model, x, agg, training, dropout_seed);
  const FeatureMatrix& h = pass.output;

  GradientResult res;
  std::vector<double> logits, labels;
  logits.reserve(batch.size());
  labels.reserve(batch.size());
  FeatureMatrix d_h = FeatureMatrix::Zero(h.rows(), h.cols());
  for (const auto& s : batch) {
    const double logit = edge_score(h, s.pair);
    logits.push_back(logit);
    labels.push_back(s.label);
    const double p = sigmoid(logit);
    // The clamp is flat outside [eps, 1 - eps].
    if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
    const double g = p - s.label;
    const auto u = static_cast<Eigen::Index>(s.pair.u);
    const auto v = static_cast<Eigen::Index>(s.pair.v);
    d_h.row(u) += g * h.row(v);
    d_h.row(v) += g * h.row(u);
  }
  res.loss = bce_loss(logits, labels);

  res.grads.resize(model.layers.size());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const SageLayer& layer = model.layers[l];
    const LayerCache& c = pass.layers[l];
    Eigen::MatrixXd d_z = d_h;
    if (l + 1 != model.layers.size()) {
      if (c.mask.size() > 0) d_z = d_z.cwiseProduct(c.mask);
      d_z = d_z.cwiseProduct((c.pre_activation.array() > 0.0).cast<double>().matrix());
    }
    SageLayer& g = res.grads[l];
    g.w_self = c.input.transpose() * d_z;
    g.w_neigh = c.aggregated.transpose() * d_z;
    g.bias = d_z.colwise().sum();
    if (l > 0) d_h = d_z * layer.w_self.transpose() + agg.scatter(d_z * layer.w_neigh.transpose());
  }
  return res;
}

void adam_step(LinkPredictor& model, const std::vector<SageLayer>& grads, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  if (grads.size() != model.layers.size()) {
    throw DimensionError("adam_step: " + std::to_string(grads.size()) + " gradient layers for " +
                         std::to_string(model.layers.size()) + " model layers");
  }
  auto& st = model.adam;
  if (st.m.size() != model.layers.size()) {
    st.m.clear();
    st.v.clear();
    for (const auto& l : model.layers) {
      st.m.push_back(SageLayer::zeros(l.in_dim(), l.out_dim()));
      st.v.push_back(SageLayer::zeros(l.in_dim(), l.out_dim()));
    }
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.step));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
      throw DimensionError("adam_step: gradient shape does not match parameter shape");
    }
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].w_self, grads[l].w_self, st.m[l].w_self, st.v[l].w_self);
    update(model.layers[l].w_neigh, grads[l].w_neigh, st.m[l].w_neigh, st.v[l].w_neigh);
    update(model.layers[l].bias, grads[l].bias, st.m[l].bias, st.v[l].bias);
  }
}

std::vector<NodePair> EdgeSplit::train_negatives(int epoch) const {
  std::vector<NodePair> out;
  if (negative_pool.empty()) return out;
  Rng rng(derive_seed(seed, "train-neg-" + std::to_string(epoch)));
  out.reserve(train_pos.size());
  for (std::size_t k = 0; k < train_pos.size(); ++k) {
    out.push_back(negative_pool[rng.below(negative_pool.size())]);
  }
  return out;
}

EdgeSplit split_edges(const MobilityGraph& g, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in [0, 1)");
  }
  std::vector<NodePair> edges = graph_edges(g);
  if (edges.size() < 2) {
    throw DataError("split_edges: graph has " + std::to_string(edges.size()) +
                    " real edges, need at least 2");
  }
  std::vector<NodePair> non_edges;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.null_mask[i]) continue;
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      if (g.null_mask[j]) continue;
      if (g.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0) {
        non_edges.push_back({i, j});
      }
    }
  }
  if (non_edges.empty()) throw DataError("split_edges: graph is complete, no non-edges to sample");

  EdgeSplit split;
  split.seed = seed;
  Rng edge_rng(derive_seed(seed, "split-edges"));
  edge_rng.shuffle(edges);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(edges.size())));
  n_test = std::min(n_test, edges.size() - 1);
  split.test_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test), edges.end());

  Rng neg_rng(derive_seed(seed, "split-test-neg"));
  neg_rng.shuffle(non_edges);
  const std::size_t n_neg = std::min(n_test, non_edges.size());
  split.test_neg.assign(non_edges.begin(), non_edges.begin() + static_cast<std::ptrdiff_t>(n_neg));
  split.negative_pool.assign(non_edges.begin() + static_cast<std::ptrdiff_t>(n_neg), non_edges.end());
  if (split.negative_pool.empty()) split.negative_pool = split.test_neg;
  split.train_neg = split.train_negatives(0);
  return split;
}

MobilityGraph training_structure(const MobilityGraph& g, const EdgeSplit& split) {
  MobilityGraph out = g;
  for (const auto& e : split.test_pos) {
    out.adjacency(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = 0.0;
    out.adjacency(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = 0.0;
  }
  return out;
}

TrainResult train_link_predictor(const MobilityGraph& g, const EdgeSplit& split,
                                 const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be > 0");
  TrainResult res;
  res.model = LinkPredictor::init(cfg.model, derive_seed(cfg.seed, "gnn-init"));
  const MobilityGraph structure = training_structure(g, split);
  const FeatureMatrix x = build_features(structure);
  const MeanAggregator agg(g.size(), split.train_pos);

  std::vector<LabeledPair> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    batch.clear();
    for (const auto& e : split.train_pos) batch.push_back({e, 1.0});
    for (const auto& e : split.train_negatives(epoch)) batch.push_back({e, 0.0});
    const GradientResult gr = gradients(res.model, x, agg, batch, true,
                                        derive_seed(cfg.seed, "dropout-" + std::to_string(epoch)));
    if (!std::isfinite(gr.loss)) {
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    }
    res.loss_history.push_back(gr.loss);
    adam_step(res.model, gr.grads, cfg.lr);
  }
  return res;
}

std::vector<double> predict_links(const LinkPredictor& model, const MobilityGraph& structure,
                                  std::span<const NodePair> candidates) {
  const auto edges = graph_edges(structure);
  const MeanAggregator agg(structure.size(), edges);
  const FeatureMatrix h = model_forward(model, build_features(structure), agg, false);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(sigmoid(edge_score(h, c)));
  return out;
}

}  // namespace mobigraph
