#include "mobigraph/cli.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "mobigraph/error.hpp"
#include "mobigraph/gnn.hpp"
#include "mobigraph/graph_io.hpp"
#include "mobigraph/harness.hpp"
#include "mobigraph/matching.hpp"
#include "mobigraph/random.hpp"
#include "mobigraph/trips.hpp"

namespace mobigraph {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "info";
};

struct IngestOptions {
  std::string trips;
  std::string out = "out";
  std::string period = "both";
  std::string modality = "avg-time";
  int layout_iterations = 50;
  IngestConfig cfg;
  CsvColumns columns;
};

struct MatchOptions {
  std::string g1, g2, out = "out";
  MatchConfig cfg;
};

struct InterpolateOptions {
  std::string g1, g2, match, out = "out";
  int steps = 5;
};

struct PredictOptions {
  std::string graph, out = "out";
  double test_fraction = 0.2;
  int epochs = 5000;
  double lr = 0.01;
};

struct McOptions {
  std::string graph, out = "out";
  McConfig cfg;
};

struct CompareOptions {
  std::string g1, g2, trips, out = "out";
  std::string modality = "avg-time";
  double min_duration = 1.0, max_duration = 180.0;
  McConfig mc;
  MatchConfig match;
};

struct BenchmarkOptions {
  std::vector<int> sizes{16, 32, 64, 128};
  int repeats = 5;
  int iterations = 30;
  std::string out = "out";
};

struct ReportOptions {
  std::string g1, g2, out = "out";
  std::vector<double> lambdas = default_lambdas();
  MatchConfig cfg;
};

void add_match_flags(CLI::App* sub, MatchConfig& cfg) {
  sub->add_option("--lambda", cfg.lambda, "Edge-vs-node balance in [0,1]")
      ->capture_default_str();
  sub->add_option("--restarts", cfg.restarts, "Frank-Wolfe runs (first from the barycenter)")
      ->capture_default_str();
  sub->add_option("--tol", cfg.convergence_tol, "Frank-Wolfe gap tolerance")->capture_default_str();
  sub->add_option("--max-iters", cfg.max_iterations, "Frank-Wolfe iteration cap")
      ->capture_default_str();
  sub->add_option("--null-cost", cfg.null_cost, "Attribute cost of a real-to-null match")
      ->capture_default_str();
}

void add_mc_flags(CLI::App* sub, McConfig& cfg) {
  sub->add_option("--trials", cfg.trials, "Monte-Carlo trials")->capture_default_str();
  sub->add_option("--top-k", cfg.top_k, "Top likelihoods kept per trial")->capture_default_str();
  sub->add_option("--bins", cfg.bins, "Histogram bins over [0,1]")->capture_default_str();
  sub->add_option("--epochs", cfg.epochs, "Training epochs per trial")->capture_default_str();
  sub->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--test-fraction", cfg.test_fraction, "Share of edges held out")
      ->capture_default_str();
}

void add_out(CLI::App* sub, std::string& out) {
  sub->add_option("--out", out, "Output directory (all artifacts are written here)")
      ->capture_default_str();
}

std::vector<TripRecord> load_trips(const std::string& path, const CsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  ParsedTrips parsed = parse_trips(in, columns);
  spdlog::info("parsed {} trips from {}, rejected {} rows", parsed.trips.size(), path,
               parsed.rejected.size());
  return std::move(parsed.trips);
}

void write_graph_pair(const fs::path& dir, const std::string& stem, const MobilityGraph& g) {
  write_graph(dir / (stem + ".json"), g);
  std::ostringstream ml;
  write_graphml(ml, g);
  write_text(dir / (stem + ".graphml"), ml.str());
}

int run_ingest(const IngestOptions& o, const GlobalOptions& global) {
  std::ifstream in(o.trips);
  if (!in) throw DataError("cannot open " + o.trips);
  const ParsedTrips parsed = parse_trips(in, o.columns);
  IngestConfig cfg = o.cfg;
  cfg.modality = parse_modality(o.modality);
  cfg.seed = derive_seed(global.seed, "ingest");
  const AmPmGraphs graphs = build_am_pm_graphs(parsed.trips, cfg, o.layout_iterations);

  const fs::path dir(o.out);
  if (o.period == "both" || o.period == "am") write_graph_pair(dir, "graph_am", graphs.am);
  if (o.period == "both" || o.period == "pm") write_graph_pair(dir, "graph_pm", graphs.pm);
  std::ostringstream diag;
  diag << "row,message\n";
  for (const auto& r : parsed.rejected) diag << r.row << "," << r.message << "\n";
  write_text(dir / "ingest_rejected.csv", diag.str());
  spdlog::info("ingest: {} trips, {} rejected rows, {} nodes", parsed.trips.size(),
               parsed.rejected.size(), graphs.am.size());
  return kExitOk;
}

int run_match(const MatchOptions& o, const GlobalOptions& global) {
  MatchConfig cfg = o.cfg;
  cfg.seed = derive_seed(global.seed, "match");
  cfg.validate();
  const RegisteredPair reg = match_graphs(read_graph(o.g1), read_graph(o.g2), cfg);
  const fs::path dir(o.out);
  write_json(dir / "match.json", match_result_to_json(reg.result));
  write_graph(dir / "g1_matched.json", reg.g1);
  write_graph(dir / "g2_registered.json", reg.g2_registered);
  spdlog::info("match: lambda={} objective={} d_pre={} d_post={}", cfg.lambda,
               reg.result.objective, reg.result.d_pre, reg.result.d_post);
  return kExitOk;
}

int run_interpolate(const InterpolateOptions& o) {
  MobilityGraph g1 = read_graph(o.g1);
  MobilityGraph g2 = read_graph(o.g2);
  if (!o.match.empty()) {
    const MatchResult m = match_result_from_json(read_json(o.match));
    if (g1.size() != g2.size()) std::tie(g1, g2) = pad_with_null_nodes(g1, g2);
    g2 = permute_graph(g2, m.permutation);
  }
  write_json(fs::path(o.out) / "interpolation.json", path_to_json(interpolate(g1, g2, o.steps)));
  return kExitOk;
}

int run_predict(const PredictOptions& o, const GlobalOptions& global) {
  const MobilityGraph g = read_graph(o.graph);
  const std::uint64_t seed = derive_seed(global.seed, "predict");
  const EdgeSplit split = split_edges(g, o.test_fraction, seed);
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.lr = o.lr;
  tc.seed = seed;
  tc.model.depth = default_depth(g.real_node_count());
  const TrainResult trained = train_link_predictor(g, split, tc);

  std::vector<NodePair> candidates = split.test_pos;
  candidates.insert(candidates.end(), split.test_neg.begin(), split.test_neg.end());
  const auto scores = predict_links(trained.model, training_structure(g, split), candidates);

  std::ostringstream sc;
  sc << "u,v,label,likelihood\n";
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    sc << g.node_ids[candidates[k].u] << "," << g.node_ids[candidates[k].v] << ","
       << (k < split.test_pos.size() ? 1 : 0) << "," << nlohmann::json(scores[k]).dump() << "\n";
  }
  std::ostringstream loss;
  loss << "epoch,loss\n";
  for (std::size_t e = 0; e < trained.loss_history.size(); ++e) {
    loss << e << "," << nlohmann::json(trained.loss_history[e]).dump() << "\n";
  }
  const fs::path dir(o.out);
  write_text(dir / "scores.csv", sc.str());
  write_text(dir / "loss.csv", loss.str());
  write_json(dir / "model.json", model_to_json(trained.model));
  return kExitOk;
}

int run_montecarlo(const McOptions& o, const GlobalOptions& global) {
  McConfig cfg = o.cfg;
  cfg.base_seed = derive_seed(global.seed, "montecarlo");
  cfg.threads = global.threads;
  const MonteCarloResult res = run_monte_carlo(read_graph(o.graph), cfg);
  const fs::path dir(o.out);
  write_text(dir / "histogram.csv", histogram_csv(res.histogram));
  write_text(dir / "trials.csv", trials_csv(res.trials));
  spdlog::info("montecarlo: {} scores binned", res.histogram.total());
  return kExitOk;
}

int run_compare(CompareOptions o, const GlobalOptions& global) {
  o.mc.base_seed = derive_seed(global.seed, "compare-mc");
  o.mc.threads = global.threads;
  o.match.seed = derive_seed(global.seed, "compare-match");
  ComparisonReport report;
  if (!o.trips.empty()) {
    const auto trips = load_trips(o.trips, CsvColumns{});
    for (int n : o.mc.node_sizes) {
      IngestConfig ic;
      ic.n_nodes = n;
      ic.modality = parse_modality(o.modality);
      ic.min_duration_minutes = o.min_duration;
      ic.max_duration_minutes = o.max_duration;
      ic.seed = derive_seed(global.seed, "compare-ingest-" + std::to_string(n));
      const AmPmGraphs graphs = build_am_pm_graphs(trips, ic);
      report.rows.push_back(compare_matched_unmatched(graphs.am, graphs.pm, o.mc, o.match));
      spdlog::info("compare: N={} done", n);
    }
  } else {
    if (o.g1.empty() || o.g2.empty()) {
      throw ConfigError("compare needs either --trips or both --g1 and --g2");
    }
    report.rows.push_back(
        compare_matched_unmatched(read_graph(o.g1), read_graph(o.g2), o.mc, o.match));
  }
  write_text(fs::path(o.out) / "comparison.csv", comparison_csv(report));
  return kExitOk;
}

int run_benchmark(const BenchmarkOptions& o, const GlobalOptions& global) {
  const TimingReport report =
      timing_benchmark(o.sizes, o.repeats, derive_seed(global.seed, "benchmark"), o.iterations);
  const fs::path dir(o.out);
  write_text(dir / "timing.csv", timing_csv(report));
  write_text(dir / "timing_fit.csv", timing_fit_csv(report));
  spdlog::info("benchmark: r^2 = {}", report.fit.r_squared);
  return kExitOk;
}

int run_report(const ReportOptions& o, const GlobalOptions& global) {
  MatchConfig cfg = o.cfg;
  cfg.seed = derive_seed(global.seed, "report");
  const auto rows = distance_report(read_graph(o.g1), read_graph(o.g2), cfg, o.lambdas);
  write_text(fs::path(o.out) / "distance_report.csv", distance_csv(rows));
  return kExitOk;
}

void configure_logging(const std::string& level) {
  static const auto logger = [] {
    auto l = std::make_shared<spdlog::logger>(
        "mobigraph", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    spdlog::set_default_logger(l);
    return l;
  }();
  logger->set_level(spdlog::level::from_str(level));
}

// Flags that no command recognizes, so parse errors can name them even when
// CLI11 reports a missing requirement first.
std::vector<std::string> unknown_flags(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> unknown;
  for (const auto& a : args) {
    if (a.size() < 2 || a[0] != '-' || std::isdigit(static_cast<unsigned char>(a[1])) || a[1] == '.') {
      continue;
    }
    const std::string name = a.substr(0, a.find('='));
    bool known = app.get_option_no_throw(name) != nullptr;
    for (const CLI::App* sub : app.get_subcommands({})) {
      known = known || sub->get_option_no_throw(name) != nullptr;
    }
    if (!known) unknown.push_back(name);
  }
  return unknown;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mobility graph matching and link prediction", "mobigraph"};
  app.set_config("--config", "", "INI/TOML config file; sections mirror subcommands");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and flag");

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Single source of randomness for every stage")
      ->envname("MOBIGRAPH_SEED")
      ->capture_default_str();
  app.add_option("--threads", global.threads, "Worker cap for parallel trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--log-level", global.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();

  IngestOptions ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Build AM/PM mobility graphs from a trip CSV");
  s_ingest->add_option("--trips", ingest.trips, "Trip CSV")->required()->check(CLI::ExistingFile);
  s_ingest->add_option("--n-nodes", ingest.cfg.n_nodes, "Zones to select")->capture_default_str();
  s_ingest->add_option("--modality", ingest.modality, "Edge quantity")
      ->check(CLI::IsMember({"avg-time", "trip-count"}))
      ->capture_default_str();
  s_ingest->add_option("--period", ingest.period, "Graphs to write")
      ->check(CLI::IsMember({"am", "pm", "both"}))
      ->capture_default_str();
  s_ingest->add_option("--min-duration", ingest.cfg.min_duration_minutes, "Minutes")
      ->capture_default_str();
  s_ingest->add_option("--max-duration", ingest.cfg.max_duration_minutes, "Minutes")
      ->capture_default_str();
  s_ingest->add_option("--layout-iters", ingest.layout_iterations, "Layout iterations")
      ->capture_default_str();
  s_ingest->add_option("--pickup-time-col", ingest.columns.pickup_time, "Pickup timestamp column")->capture_default_str();
  s_ingest->add_option("--dropoff-time-col", ingest.columns.dropoff_time, "Dropoff timestamp column")->capture_default_str();
  s_ingest->add_option("--pickup-zone-col", ingest.columns.pickup_zone, "Pickup zone column")->capture_default_str();
  s_ingest->add_option("--dropoff-zone-col", ingest.columns.dropoff_zone, "Dropoff zone column")->capture_default_str();
  add_out(s_ingest, ingest.out);

  MatchOptions match;
  auto* s_match = app.add_subcommand("match", "Register g2 onto g1 with FAQ");
  s_match->add_option("--g1", match.g1, "First graph JSON")->required()->check(CLI::ExistingFile);
  s_match->add_option("--g2", match.g2, "Second graph JSON")->required()->check(CLI::ExistingFile);
  add_match_flags(s_match, match.cfg);
  add_out(s_match, match.out);

  InterpolateOptions interp;
  auto* s_interp = app.add_subcommand("interpolate", "Straight-line walk between matched graphs");
  s_interp->add_option("--g1", interp.g1, "First graph JSON")->required()->check(CLI::ExistingFile);
  s_interp->add_option("--g2", interp.g2, "Second graph JSON (registered unless --match)")
      ->required()
      ->check(CLI::ExistingFile);
  s_interp->add_option("--match", interp.match, "match.json whose permutation registers g2")
      ->check(CLI::ExistingFile);
  s_interp->add_option("--steps", interp.steps, "Snapshots including both ends (>= 2)")
      ->capture_default_str();
  add_out(s_interp, interp.out);

  PredictOptions predict;
  auto* s_predict = app.add_subcommand("predict", "Train a link predictor and score held-out pairs");
  s_predict->add_option("--graph", predict.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  s_predict->add_option("--test-fraction", predict.test_fraction, "Share of edges held out")->capture_default_str();
  s_predict->add_option("--epochs", predict.epochs, "Training epochs")->capture_default_str();
  s_predict->add_option("--lr", predict.lr, "Adam learning rate")->capture_default_str();
  add_out(s_predict, predict.out);

  McOptions mc;
  auto* s_mc = app.add_subcommand("montecarlo", "Repeated split/train/score likelihood histogram");
  s_mc->add_option("--graph", mc.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  add_mc_flags(s_mc, mc.cfg);
  add_out(s_mc, mc.out);

  CompareOptions compare;
  auto* s_compare = app.add_subcommand("compare", "Matched vs unmatched link prediction");
  s_compare->add_option("--g1", compare.g1, "First graph JSON")->check(CLI::ExistingFile);
  s_compare->add_option("--g2", compare.g2, "Second graph JSON")->check(CLI::ExistingFile);
  s_compare->add_option("--trips", compare.trips, "Trip CSV; compares AM vs PM at each --sizes")
      ->check(CLI::ExistingFile);
  s_compare->add_option("--sizes", compare.mc.node_sizes, "Node counts for --trips")
      ->delimiter(',')
      ->capture_default_str();
  s_compare->add_option("--modality", compare.modality, "Edge quantity for --trips")
      ->check(CLI::IsMember({"avg-time", "trip-count"}))
      ->capture_default_str();
  s_compare->add_option("--min-duration", compare.min_duration, "Minutes")->capture_default_str();
  s_compare->add_option("--max-duration", compare.max_duration, "Minutes")->capture_default_str();
  add_mc_flags(s_compare, compare.mc);
  add_match_flags(s_compare, compare.match);
  add_out(s_compare, compare.out);

  BenchmarkOptions bench;
  auto* s_bench = app.add_subcommand("benchmark", "Matching time vs node count, quadratic fit");
  s_bench->add_option("--sizes", bench.sizes, "Node counts, comma separated")->delimiter(',')->capture_default_str();
  s_bench->add_option("--repeats", bench.repeats, "Timed runs per size; the median is kept")->capture_default_str();
  s_bench->add_option("--iters", bench.iterations, "Fixed Frank-Wolfe iteration budget")
      ->capture_default_str();
  add_out(s_bench, bench.out);

  ReportOptions report;
  auto* s_report = app.add_subcommand("report", "Distances before/after matching across lambdas");
  s_report->add_option("--g1", report.g1, "First graph JSON")->required()->check(CLI::ExistingFile);
  s_report->add_option("--g2", report.g2, "Second graph JSON")->required()->check(CLI::ExistingFile);
  s_report->add_option("--lambdas", report.lambdas, "Lambda values, comma separated")->delimiter(',')->capture_default_str();
  add_match_flags(s_report, report.cfg);
  add_out(s_report, report.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto unknown = unknown_flags(app, args);
    if (!unknown.empty()) {
      err << "error: unrecognized option";
      for (const auto& u : unknown) err << " " << u;
      err << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  configure_logging(global.log_level);
  try {
    if (*s_ingest) return run_ingest(ingest, global);
    if (*s_match) return run_match(match, global);
    if (*s_interp) return run_interpolate(interp);
    if (*s_predict) return run_predict(predict, global);
    if (*s_mc) return run_montecarlo(mc, global);
    if (*s_compare) return run_compare(compare, global);
    if (*s_bench) return run_benchmark(bench, global);
    if (*s_report) return run_report(report, global);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace mobigraph
