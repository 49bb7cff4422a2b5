#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mobigraph/graph.hpp"

namespace mobigraph {

using Timestamp = std::chrono::sys_seconds;

struct TripRecord {
  Timestamp pickup_time;
  Timestamp dropoff_time;
  std::int64_t pickup_zone = 0;
  std::int64_t dropoff_zone = 0;
};

struct IngestConfig {
  int n_nodes = 16;
  std::uint64_t seed = 0;
  Modality modality = Modality::AvgTravelTime;
  double min_duration_minutes = 1.0;
  double max_duration_minutes = 180.0;

  // Throws ConfigError.
  void validate() const;
};

struct CsvColumns {
  std::string pickup_time = "tpep_pickup_datetime";
  std::string dropoff_time = "tpep_dropoff_datetime";
  std::string pickup_zone = "PULocationID";
  std::string dropoff_zone = "DOLocationID";
};

struct RowDiagnostic {
  std::size_t row = 0;  // 1-based line number in the input, header is line 1
  std::string message;
};

struct ParsedTrips {
  std::vector<TripRecord> trips;
  std::vector<RowDiagnostic> rejected;
};

// "YYYY-MM-DD HH:MM:SS". Returns false on malformed or out-of-range input.
bool parse_timestamp(std::string_view text, Timestamp& out);

// Malformed rows are reported in `rejected`, never fatal. A missing header
// column throws DataError naming the column.
ParsedTrips parse_trips(std::istream& in, const CsvColumns& columns = {});

double trip_duration_minutes(const TripRecord& t);

// Pickup hour < 12 is AM.
Period trip_period(const TripRecord& t);

// Keeps inter-zone trips whose duration lies in [min, max] minutes.
std::vector<TripRecord> filter_trips(const std::vector<TripRecord>& trips, double min_minutes,
                                     double max_minutes);

// n distinct zones, each touched by at least one AM and one PM trip, drawn
// uniformly without replacement. Returned in draw order.
std::vector<std::int64_t> select_common_nodes(const std::vector<TripRecord>& trips, int n,
                                              std::uint64_t seed);

// Nodes in ascending zone id; both trip directions pool into one edge. Only
// trips in `period` (unless Unspecified) with both ends in `zones` count.
// node_attrs are left zero.
MobilityGraph build_mobility_graph(const std::vector<TripRecord>& trips,
                                   const std::vector<std::int64_t>& zones, Modality modality,
                                   Period period);

struct AmPmGraphs {
  MobilityGraph am;
  MobilityGraph pm;
};

// Duration filter, common-node selection, AM and PM aggregation, then one
// force-directed layout on the AM graph whose coordinates both graphs share.
// Selection and layout seeds derive from cfg.seed.
AmPmGraphs build_am_pm_graphs(const std::vector<TripRecord>& trips, const IngestConfig& cfg,
                              int layout_iterations = 50);

}  // namespace mobigraph
