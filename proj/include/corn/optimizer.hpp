#pragma once

// Bubble clustering ILP: model construction, exact branch-and-bound, brute-force oracle, export.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corn/core_model.hpp"
#include "corn/spatial.hpp"
#include "corn/weights.hpp"

namespace corn {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct LinearTerm {
  std::size_t var = 0;
  double coef = 0.0;
};

enum class RowSense { Le, Ge, Eq };

struct IlpVariable {
  enum class Kind { E, X, Z };
  Kind kind = Kind::X;
  std::string name;
  double objective = 0.0;
};

struct IlpConstraint {
  std::string tag;  // connect1, connect2, oneBubble, equalSizes, diameter, hcpEqual, hcpExactlyOne, boundLoad
  std::string name;
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::Le;
  double rhs = 0.0;
};

/// The ILP plus the dense problem data the solver works from.
struct IlpModel {
  std::size_t k = 1;
  double d_star = kUnbounded;
  double y_star = kUnbounded;

  std::vector<LocationId> locations;    // L_s, sorted by id
  std::vector<HcpId> hcps;              // substitutable HCPs, sorted by id
  std::vector<int> hcp_group;           // group of hcps[i]
  std::vector<std::string> group_labels;
  std::vector<double> weight;           // n*n, symmetric
  std::vector<double> dist;             // n*n
  std::vector<std::vector<double>> group_demand;  // [group][location]
  std::vector<double> hcp_load;         // room load of hcps[i], hours/day

  std::vector<std::pair<std::size_t, std::size_t>> e_pairs;
  std::vector<IlpVariable> variables;
  std::vector<IlpConstraint> constraints;

  std::size_t x_var(std::size_t l, std::size_t b) const { return e_pairs.size() + l * k + b; }
  std::size_t z_var(std::size_t p, std::size_t b) const { return e_pairs.size() + locations.size() * k + p * k + b; }
  double w(std::size_t a, std::size_t b) const { return weight[a * locations.size() + b]; }
  double d(std::size_t a, std::size_t b) const { return dist[a * locations.size() + b]; }
};

struct ModelCounts {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  bool operator==(const ModelCounts&) const = default;
};

/// Bubble indices are 0-based here and 1-based in files and model names.
struct BubbleClustering {
  std::size_t k = 1;
  std::map<LocationId, std::size_t> location_bubble;
  std::map<HcpId, std::size_t> hcp_bubble;
  std::optional<double> objective_value;

  bool operator==(const BubbleClustering&) const = default;
};

struct SolveOutcome {
  enum class Status { Optimal, Infeasible, TimedOut };
  Status status = Status::Infeasible;
  std::optional<BubbleClustering> clustering;  // set for Optimal; best-so-far for TimedOut
  double bound = 0.0;                          // proven lower bound on the objective
  std::uint64_t nodes = 0;
};

std::string to_string(SolveOutcome::Status s);

/// Throws InvalidK unless 1 <= k <= n and k fits every HCP group.
void check_k(std::size_t k, std::size_t n, const HcpRoster& roster);

struct SolveOptions {
  double time_limit_s = kUnbounded;
  std::uint64_t node_limit = 0;  // 0 = unlimited; a node budget keeps limited runs deterministic
  std::uint64_t seed = 0;              // drives the randomized warm starts
  std::size_t restarts = 8;
  std::size_t lp_bound_max_unassigned = 6;
};

IlpModel build_model(const WeightMatrix& weights, const DistanceMatrix& dist, const LoadDemandTable& ld,
                     const HcpRoster& roster, const LocationRoster& locs, std::size_t k, double d_star,
                     double y_star);

ModelCounts count_vars_constraints(const IlpModel& m);

/// Closed-form counts for a model shape. `far_pairs` counts location pairs more than D* apart.
ModelCounts closed_form_counts(std::size_t n_locations, const std::vector<std::size_t>& group_sizes,
                               std::size_t e_vars, std::size_t k, bool finite_d_star, bool finite_y_star,
                               std::size_t far_pairs);

/// Location pairs of `m` more than D* apart.
std::size_t far_pairs(const IlpModel& m);

SolveOutcome solve(const IlpModel& m, const SolveOptions& options = {});

/// Enumerates every balanced partition and HCP assignment. Throws TooLarge beyond 10 locations.
SolveOutcome brute_force_solve(const WeightMatrix& weights, const DistanceMatrix& dist, const LoadDemandTable& ld,
                               const HcpRoster& roster, const LocationRoster& locs, std::size_t k, double d_star,
                               double y_star);

/// Sum of weights over pairs placed in different bubbles.
double cut_weight(const BubbleClustering& c, const WeightMatrix& weights);

/// Checks the clustering against the raw inputs; returns one message per violated condition.
std::vector<std::string> verify_clustering(const BubbleClustering& c, const DistanceMatrix& dist,
                                           const LoadDemandTable& ld, const HcpRoster& roster,
                                           const LocationRoster& locs, double d_star, double y_star,
                                           double tol = 1e-9);

/// Relabels bubbles so they are ordered by their smallest location id.
BubbleClustering canonicalize(BubbleClustering c);

/// Maximum pairwise distance within each bubble.
std::vector<double> bubble_diameters(const BubbleClustering& c, const DistanceMatrix& dist);

/// Per (bubble, group) gap: group demand of the bubble's rooms minus the room load of its group members.
std::vector<std::vector<double>> load_gaps(const BubbleClustering& c, const LoadDemandTable& ld,
                                           const HcpRoster& roster, const LocationRoster& locs);

enum class ModelFormat { Lp, Mps };
std::string export_model(const IlpModel& m, ModelFormat format);

void write_clustering_json(const BubbleClustering& c, const std::filesystem::path& path);
BubbleClustering load_clustering_json(const std::filesystem::path& path);

}  // namespace corn
