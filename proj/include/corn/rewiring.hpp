#pragma once

// Edge rewiring: confine care to bubbles, plus the cost metrics of doing so.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "corn/core_model.hpp"
#include "corn/optimizer.hpp"
#include "corn/spatial.hpp"
#include "corn/weights.hpp"

namespace corn {

struct RewiredGraph {
  VisitGraph graph;                  // same rosters as the source
  std::vector<std::size_t> source;   // graph.visits()[i] came from source visit source[i]
  std::vector<std::size_t> dropped;  // source visits with no available HCP, in processing order
};

struct RewireOptions {
  /// Keep the original HCP on a same-bubble visit when it is free instead of redrawing.
  bool keep_same_bubble_hcp = false;
};

/// Visits touching P_ns or L_ns are copied; every other visit goes, in start order, to a uniformly
/// chosen free HCP of the same group in the location's bubble, or is dropped.
/// Throws ClusteringMismatch when `c` misses a substitutable location or HCP.
RewiredGraph rewire(const VisitGraph& g, const BubbleClustering& c, std::uint64_t seed,
                    const RewireOptions& options = {});

/// Uniform balanced random bubbles, independently per entity class. Throws InvalidK.
BubbleClustering random_clustering(const HcpRoster& roster, const LocationRoster& locs, std::size_t k,
                                   std::uint64_t seed, const WeightMatrix* weights = nullptr);

struct CostReport {
  std::map<HcpId, double> load;             // hours/day in the rewired graph
  std::map<HcpId, double> excess_load;      // hours/day
  std::map<LocationId, double> demand;      // hours/day in the source graph, L_s only
  std::map<LocationId, double> unmet_demand;
  std::map<HcpId, double> footsteps;        // meters/day in the rewired graph
  std::map<HcpId, double> excess_footsteps;
  std::map<std::size_t, double> bubble_diameters;  // 0-based bubble
};

/// Meters/day walked between consecutive visits of each HCP; pairs missing from `dist` count 0.
std::vector<double> footsteps_per_day(const VisitGraph& g, const DistanceMatrix& dist, std::int64_t days);

CostReport compute_costs(const VisitGraph& g, const RewiredGraph& gr, const BubbleClustering& c,
                         const DistanceMatrix& dist);

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  double total = 0.0;
};
MetricSummary summarize(const std::vector<double>& values);

/// Writes hcp_costs.csv, location_costs.csv, bubble_costs.csv and costs_summary.json into `dir`.
void write_cost_report(const CostReport& r, const std::filesystem::path& dir);

}  // namespace corn
