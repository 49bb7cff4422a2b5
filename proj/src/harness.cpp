#include "mobigraph/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mobigraph/error.hpp"
#include "mobigraph/parallel.hpp"
#include "mobigraph/random.hpp"
#include "mobigraph/synthetic.hpp"

namespace mobigraph {

namespace {

// Shortest round-trip formatting, stable across platforms.
std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void McConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (bins < 1) throw ConfigError("bins must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
}

long LikelihoodHistogram::total() const {
  return std::accumulate(correct_counts.begin(), correct_counts.end(), 0L) +
         std::accumulate(incorrect_counts.begin(), incorrect_counts.end(), 0L);
}

LikelihoodHistogram bin_scores(std::span<const TrialRecord> trials, int bins) {
  if (bins < 1) throw ConfigError("bins must be >= 1");
  LikelihoodHistogram h;
  for (int b = 0; b <= bins; ++b) h.bin_edges.push_back(static_cast<double>(b) / bins);
  h.correct_counts.assign(static_cast<std::size_t>(bins), 0);
  h.incorrect_counts.assign(static_cast<std::size_t>(bins), 0);
  for (const auto& t : trials) {
    for (std::size_t k = 0; k < t.top_scores.size(); ++k) {
      const double s = std::clamp(t.top_scores[k], 0.0, 1.0);
      const auto b = std::min(static_cast<std::size_t>(s * bins), static_cast<std::size_t>(bins - 1));
      (t.top_is_edge[k] ? h.correct_counts : h.incorrect_counts)[b] += 1;
    }
  }
  return h;
}

TrialRecord run_trial(const MobilityGraph& g, const McConfig& cfg, int trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = cfg.base_seed + static_cast<std::uint64_t>(trial);
  const EdgeSplit split = split_edges(g, cfg.test_fraction, rec.seed);

  std::vector<NodePair> candidates = split.test_pos;
  candidates.insert(candidates.end(), split.test_neg.begin(), split.test_neg.end());
  if (candidates.size() < static_cast<std::size_t>(cfg.top_k)) {
    throw DataError("graph too small: " + std::to_string(candidates.size()) +
                    " test candidates for top_k = " + std::to_string(cfg.top_k));
  }

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.lr = cfg.lr;
  tc.seed = rec.seed;
  tc.model.depth = default_depth(g.real_node_count());
  const TrainResult trained = train_link_predictor(g, split, tc);
  const std::vector<double> scores =
      predict_links(trained.model, training_structure(g, split), candidates);

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (int k = 0; k < cfg.top_k; ++k) {
    const std::size_t idx = order[static_cast<std::size_t>(k)];
    const bool is_edge = idx < split.test_pos.size();
    rec.top_scores.push_back(scores[idx]);
    rec.top_is_edge.push_back(is_edge);
    (is_edge ? rec.correct : rec.incorrect) += 1;
  }
  return rec;
}

MonteCarloResult run_monte_carlo(const MobilityGraph& g, const McConfig& cfg) {
  cfg.validate();
  MonteCarloResult res;
  res.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(res.trials.size(), cfg.threads, [&](std::size_t t) {
    res.trials[t] = run_trial(g, cfg, static_cast<int>(t));
  });
  res.histogram = bin_scores(res.trials, cfg.bins);
  return res;
}

MobilityGraph unmatched_arm(const MobilityGraph& g1, const MobilityGraph& g2) {
  MobilityGraph out = g2;
  const auto shared = static_cast<Eigen::Index>(std::min(g1.size(), g2.size()));
  for (Eigen::Index i = 0; i < shared; ++i) {
    if (g2.null_mask[i] || g1.null_mask[i]) continue;
    out.node_attrs.row(i) = g1.node_attrs.row(i);
  }
  return out;
}

ComparisonRow compare_matched_unmatched(const MobilityGraph& g1, const MobilityGraph& g2,
                                        const McConfig& cfg, const MatchConfig& match_cfg) {
  const RegisteredPair reg = match_graphs(g1, g2, match_cfg);
  const MonteCarloResult matched = run_monte_carlo(reg.g2_registered, cfg);
  const MonteCarloResult unmatched = run_monte_carlo(unmatched_arm(g1, g2), cfg);

  auto average = [](const std::vector<TrialRecord>& trials, bool correct) {
    double sum = 0.0;
    for (const auto& t : trials) sum += correct ? t.correct : t.incorrect;
    return sum / static_cast<double>(trials.size());
  };
  ComparisonRow row;
  row.n_nodes = g1.real_node_count();
  row.avg_correct_matched = average(matched.trials, true);
  row.avg_incorrect_matched = average(matched.trials, false);
  row.avg_correct_unmatched = average(unmatched.trials, true);
  row.avg_incorrect_unmatched = average(unmatched.trials, false);
  row.error_reduction_pct =
      row.avg_incorrect_unmatched > 0.0
          ? 100.0 * (row.avg_incorrect_unmatched - row.avg_incorrect_matched) /
                row.avg_incorrect_unmatched
          : 0.0;
  return row;
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("fit_quadratic: x and y differ in length");
  if (x.size() < 3) {
    throw DataError("fit_quadratic needs at least 3 points, got " + std::to_string(x.size()));
  }
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    design(i, 1) = x[static_cast<std::size_t>(i)];
    design(i, 2) = 1.0;
    target(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
  QuadraticFit fit{coef(0), coef(1), coef(2), 0.0, false};
  const double mean = target.mean();
  const double ss_tot = (target.array() - mean).square().sum();
  const double ss_res = (target - design * coef).squaredNorm();
  if (ss_tot == 0.0) {
    fit.degenerate = true;
    fit.r_squared = 0.0;
  } else {
    fit.r_squared = 1.0 - ss_res / ss_tot;
  }
  return fit;
}

TimingReport timing_benchmark(const std::vector<int>& node_sizes, int repeats, std::uint64_t seed,
                              int iterations) {
  if (node_sizes.size() < 3) {
    throw DataError("timing_benchmark needs at least 3 node sizes to fit a quadratic");
  }
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  TimingReport report;
  for (int n : node_sizes) {
    if (n < 2) throw ConfigError("node sizes must be >= 2");
    std::vector<double> times;
    for (int r = 0; r < repeats; ++r) {
      const auto tag = std::to_string(n) + "-" + std::to_string(r);
      const MobilityGraph g1 = random_geometric_graph(static_cast<std::size_t>(n), 0.3,
                                                      derive_seed(seed, "bench-g1-" + tag));
      const MobilityGraph g2 = random_geometric_graph(static_cast<std::size_t>(n), 0.3,
                                                      derive_seed(seed, "bench-g2-" + tag));
      MatchConfig cfg;
      cfg.lambda = 0.5;
      cfg.restarts = 1;
      cfg.max_iterations = iterations;
      cfg.fixed_iterations = true;
      cfg.seed = derive_seed(seed, "bench-match-" + tag);
      const auto start = std::chrono::steady_clock::now();
      const MatchResult res = faq_match(g1, g2, cfg);
      const auto stop = std::chrono::steady_clock::now();
      if (res.permutation.size() != static_cast<std::size_t>(n)) {
        throw NumericalError("benchmark match returned a wrong-sized permutation");
      }
      times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    const double median = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    report.sizes.push_back(n);
    report.median_seconds.push_back(median);
  }
  std::vector<double> xs(report.sizes.begin(), report.sizes.end());
  report.fit = fit_quadratic(xs, report.median_seconds);
  return report;
}

std::vector<double> default_lambdas() { return {0.0, 0.5, 1.0}; }

std::vector<DistanceRow> distance_report(const MobilityGraph& g1, const MobilityGraph& g2,
                                         const MatchConfig& match_cfg,
                                         const std::vector<double>& lambdas) {
  std::vector<DistanceRow> rows;
  for (double lambda : lambdas) {
    MatchConfig cfg = match_cfg;
    cfg.lambda = lambda;
    const RegisteredPair reg = match_graphs(g1, g2, cfg);
    rows.push_back({lambda, reg.result.d_pre, reg.result.d_post, reg.result.objective});
  }
  return rows;
}

std::string histogram_csv(const LikelihoodHistogram& h) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,correct,incorrect\n";
  for (std::size_t b = 0; b < h.correct_counts.size(); ++b) {
    os << num(h.bin_edges[b]) << "," << num(h.bin_edges[b + 1]) << "," << h.correct_counts[b]
       << "," << h.incorrect_counts[b] << "\n";
  }
  return os.str();
}

std::string trials_csv(std::span<const TrialRecord> trials) {
  std::ostringstream os;
  os << "trial,seed,rank,likelihood,is_edge\n";
  for (const auto& t : trials) {
    for (std::size_t k = 0; k < t.top_scores.size(); ++k) {
      os << t.trial << "," << t.seed << "," << k + 1 << "," << num(t.top_scores[k]) << ","
         << (t.top_is_edge[k] ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "n_nodes,avg_correct_matched,avg_incorrect_matched,avg_correct_unmatched,"
        "avg_incorrect_unmatched,error_reduction_pct\n";
  for (const auto& r : report.rows) {
    os << r.n_nodes << "," << num(r.avg_correct_matched) << "," << num(r.avg_incorrect_matched)
       << "," << num(r.avg_correct_unmatched) << "," << num(r.avg_incorrect_unmatched) << ","
       << num(r.error_reduction_pct) << "\n";
  }
  return os.str();
}

std::string timing_csv(const TimingReport& report) {
  std::ostringstream os;
  os << "n_nodes,median_seconds,fitted_seconds\n";
  for (std::size_t i = 0; i < report.sizes.size(); ++i) {
    const double n = report.sizes[i];
    const double fitted = report.fit.a * n * n + report.fit.b * n + report.fit.c;
    os << report.sizes[i] << "," << num(report.median_seconds[i]) << "," << num(fitted) << "\n";
  }
  return os.str();
}

std::string timing_fit_csv(const TimingReport& report) {
  std::ostringstream os;
  os << "a,b,c,r_squared,degenerate\n"
     << num(report.fit.a) << "," << num(report.fit.b) << "," << num(report.fit.c) << ","
     << num(report.fit.r_squared) << "," << (report.fit.degenerate ? 1 : 0) << "\n";
  return os.str();
}

std::string distance_csv(std::span<const DistanceRow> rows) {
  std::ostringstream os;
  // d_pre is also published as d0 (before matching) or d (original distance);
  // d_post as d (after matching) or d0 (after matching).
  os << "# aliases: d_pre=d0|d d_post=d|d0\n";
  os << "lambda,d_pre,d_post,objective\n";
  for (const auto& r : rows) {
    os << num(r.lambda) << "," << num(r.d_pre) << "," << num(r.d_post) << "," << num(r.objective)
       << "\n";
  }
  return os.str();
}

}  // namespace mobigraph
