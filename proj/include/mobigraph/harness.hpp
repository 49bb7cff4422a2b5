#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mobigraph/gnn.hpp"
#include "mobigraph/graph.hpp"
#include "mobigraph/matching.hpp"

namespace mobigraph {

struct McConfig {
  int trials = 100;
  int top_k = 10;
  int bins = 10;
  int epochs = 10000;
  double lr = 0.01;
  double test_fraction = 0.2;
  std::vector<int> node_sizes{16, 32, 64, 128};
  std::uint64_t base_seed = 0;
  int threads = 1;

  // Throws ConfigError.
  void validate() const;
};

struct LikelihoodHistogram {
  std::vector<double> bin_edges;  // bins + 1 values from 0 to 1
  std::vector<long> correct_counts;
  std::vector<long> incorrect_counts;

  long total() const;
  friend bool operator==(const LikelihoodHistogram&, const LikelihoodHistogram&) = default;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int correct = 0;
  int incorrect = 0;
  std::vector<double> top_scores;  // descending
  std::vector<bool> top_is_edge;
};

struct MonteCarloResult {
  LikelihoodHistogram histogram;
  std::vector<TrialRecord> trials;
};

// Equal-width bins over [0, 1]; a score of exactly 1 lands in the last bin.
LikelihoodHistogram bin_scores(std::span<const TrialRecord> trials, int bins);

// One trial: split with seed base_seed + t, train, score held-out positives
// plus sampled negatives, keep the top_k by likelihood.
TrialRecord run_trial(const MobilityGraph& g, const McConfig& cfg, int trial);

MonteCarloResult run_monte_carlo(const MobilityGraph& g, const McConfig& cfg);

struct ComparisonRow {
  std::size_t n_nodes = 0;
  double avg_correct_matched = 0.0;
  double avg_incorrect_matched = 0.0;
  double avg_correct_unmatched = 0.0;
  double avg_incorrect_unmatched = 0.0;
  double error_reduction_pct = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

// The unmatched arm keeps g2's node order but takes node attributes from g1,
// row for row, so its features live in g1's frame like the matched arm's.
MobilityGraph unmatched_arm(const MobilityGraph& g1, const MobilityGraph& g2);

// Matched arm: permute_graph(g2, P) from faq_match(g1, g2). Unmatched arm:
// unmatched_arm(g1, g2). Both run run_monte_carlo with the same seeds.
ComparisonRow compare_matched_unmatched(const MobilityGraph& g1, const MobilityGraph& g2,
                                        const McConfig& cfg, const MatchConfig& match_cfg);

struct QuadraticFit {
  double a = 0.0, b = 0.0, c = 0.0;  // y = a x^2 + b x + c
  double r_squared = 0.0;
  bool degenerate = false;  // y has zero variance; r_squared reported as 0
};

// Least squares; needs at least 3 points.
QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

struct TimingReport {
  std::vector<int> sizes;
  std::vector<double> median_seconds;
  QuadraticFit fit;
};

// Median wall time of a single faq_match run (one start, fixed iteration
// budget) on seeded random pairs.
TimingReport timing_benchmark(const std::vector<int>& node_sizes, int repeats, std::uint64_t seed,
                              int iterations = 30);

struct DistanceRow {
  double lambda = 0.0;
  double d_pre = 0.0;
  double d_post = 0.0;
  double objective = 0.0;
};

// {0, 0.5, 1}
std::vector<double> default_lambdas();

// One faq_match per lambda; match_cfg.lambda is overridden.
std::vector<DistanceRow> distance_report(const MobilityGraph& g1, const MobilityGraph& g2,
                                         const MatchConfig& match_cfg,
                                         const std::vector<double>& lambdas = default_lambdas());

std::string histogram_csv(const LikelihoodHistogram& h);
std::string trials_csv(std::span<const TrialRecord> trials);
std::string comparison_csv(const ComparisonReport& report);
std::string timing_csv(const TimingReport& report);
std::string timing_fit_csv(const TimingReport& report);
std::string distance_csv(std::span<const DistanceRow> rows);

}  // namespace mobigraph
