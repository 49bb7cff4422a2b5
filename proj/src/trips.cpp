#include "mobigraph/trips.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <set>
#include <unordered_map>

#include "mobigraph/error.hpp"
#include "mobigraph/layout.hpp"
#include "mobigraph/random.hpp"

namespace mobigraph {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == ',' && !quoted)) {
      auto f = line.substr(start, i - start);
      if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
      fields.push_back(f);
      start = i + 1;
    }
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

void IngestConfig::validate() const {
  if (n_nodes < 2) throw ConfigError("n_nodes must be >= 2, got " + std::to_string(n_nodes));
  if (!(min_duration_minutes < max_duration_minutes)) {
    throw ConfigError("min_duration must be below max_duration");
  }
}

bool parse_timestamp(std::string_view text, Timestamp& out) {
  text = trim(text);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' ||
      text[13] != ':' || text[16] != ':') {
    return false;
  }
  int y, mo, d, h, mi, s;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
      !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return false;
  out = std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
        std::chrono::seconds{s};
  return true;
}

ParsedTrips parse_trips(std::istream& in, const CsvColumns& columns) {
  ParsedTrips result;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("trip CSV is empty (missing header row)");
  }
  const auto header = split_csv(line);
  auto find_column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw DataError("trip CSV header is missing required column '" + name + "'");
  };
  const std::size_t c_pu_t = find_column(columns.pickup_time);
  const std::size_t c_do_t = find_column(columns.dropoff_time);
  const std::size_t c_pu_z = find_column(columns.pickup_zone);
  const std::size_t c_do_z = find_column(columns.dropoff_zone);
  const std::size_t needed = std::max({c_pu_t, c_do_t, c_pu_z, c_do_z}) + 1;

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    auto reject = [&](std::string msg) { result.rejected.push_back({row, std::move(msg)}); };
    if (fields.size() < needed) {
      reject("too few fields (" + std::to_string(fields.size()) + ")");
      continue;
    }
    TripRecord t;
    if (!parse_timestamp(fields[c_pu_t], t.pickup_time)) {
      reject("unparseable pickup timestamp");
      continue;
    }
    if (!parse_timestamp(fields[c_do_t], t.dropoff_time)) {
      reject("unparseable dropoff timestamp");
      continue;
    }
    if (!parse_int(fields[c_pu_z], t.pickup_zone)) {
      reject("missing pickup zone");
      continue;
    }
    if (!parse_int(fields[c_do_z], t.dropoff_zone)) {
      reject("missing dropoff zone");
      continue;
    }
    if (t.pickup_zone <= 0 || t.dropoff_zone <= 0) {
      reject("non-positive zone id");
      continue;
    }
    if (t.dropoff_time < t.pickup_time) {
      reject("negative duration");
      continue;
    }
    result.trips.push_back(t);
  }
  return result;
}

double trip_duration_minutes(const TripRecord& t) {
  return std::chrono::duration<double, std::ratio<60>>(t.dropoff_time - t.pickup_time).count();
}

Period trip_period(const TripRecord& t) {
  const auto day = std::chrono::floor<std::chrono::days>(t.pickup_time);
  const auto hour = std::chrono::duration_cast<std::chrono::hours>(t.pickup_time - day).count();
  return hour < 12 ? Period::AM : Period::PM;
}

std::vector<TripRecord> filter_trips(const std::vector<TripRecord>& trips, double min_minutes,
                                     double max_minutes) {
  std::vector<TripRecord> out;
  for (const auto& t : trips) {
    if (t.pickup_zone == t.dropoff_zone) continue;
    const double d = trip_duration_minutes(t);
    if (d >= min_minutes && d <= max_minutes) out.push_back(t);
  }
  return out;
}

std::vector<std::int64_t> select_common_nodes(const std::vector<TripRecord>& trips, int n,
                                              std::uint64_t seed) {
  if (trips.empty()) throw DataError("select_common_nodes: no trips");
  if (n < 1) throw ConfigError("select_common_nodes: n must be positive");
  std::set<std::int64_t> am, pm;
  for (const auto& t : trips) {
    auto& s = trip_period(t) == Period::AM ? am : pm;
    s.insert(t.pickup_zone);
    s.insert(t.dropoff_zone);
  }
  std::vector<std::int64_t> common;
  std::set_intersection(am.begin(), am.end(), pm.begin(), pm.end(), std::back_inserter(common));
  if (common.size() < static_cast<std::size_t>(n)) {
    throw DataError("only " + std::to_string(common.size()) +
                    " zones have both AM and PM trips; cannot select " + std::to_string(n));
  }
  // Partial Fisher-Yates over the sorted candidates.
  Rng rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    std::swap(common[i], common[i + rng.below(common.size() - i)]);
  }
  common.resize(static_cast<std::size_t>(n));
  return common;
}

MobilityGraph build_mobility_graph(const std::vector<TripRecord>& trips,
                                   const std::vector<std::int64_t>& zones, Modality modality,
                                   Period period) {
  std::vector<std::int64_t> sorted = zones;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DataError("build_mobility_graph: duplicate zone ids");
  }
  std::unordered_map<std::int64_t, Eigen::Index> index;
  for (std::size_t i = 0; i < sorted.size(); ++i) index[sorted[i]] = static_cast<Eigen::Index>(i);

  const auto n = static_cast<Eigen::Index>(sorted.size());
  Eigen::MatrixXd minutes = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : trips) {
    if (t.pickup_zone == t.dropoff_zone) continue;
    if (period != Period::Unspecified && trip_period(t) != period) continue;
    auto a = index.find(t.pickup_zone);
    auto b = index.find(t.dropoff_zone);
    if (a == index.end() || b == index.end()) continue;
    const auto i = std::min(a->second, b->second);
    const auto j = std::max(a->second, b->second);
    minutes(i, j) += trip_duration_minutes(t);
    counts(i, j) += 1.0;
  }

  MobilityGraph g = MobilityGraph::empty(sorted.size(), modality, period);
  g.node_ids = sorted;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (counts(i, j) == 0.0) continue;
      const double w =
          modality == Modality::AvgTravelTime ? minutes(i, j) / counts(i, j) : counts(i, j);
      g.adjacency(i, j) = w;
      g.adjacency(j, i) = w;
    }
  }
  return g;
}

AmPmGraphs build_am_pm_graphs(const std::vector<TripRecord>& trips, const IngestConfig& cfg,
                              int layout_iterations) {
  cfg.validate();
  const auto kept = filter_trips(trips, cfg.min_duration_minutes, cfg.max_duration_minutes);
  const auto zones = select_common_nodes(kept, cfg.n_nodes, derive_seed(cfg.seed, "ingest-select"));
  AmPmGraphs out;
  out.am = layout_fruchterman_reingold(build_mobility_graph(kept, zones, cfg.modality, Period::AM),
                                       derive_seed(cfg.seed, "ingest-layout"), layout_iterations);
  out.pm = build_mobility_graph(kept, zones, cfg.modality, Period::PM);
  out.pm.node_attrs = out.am.node_attrs;
  return out;
}

}  // namespace mobigraph
