#pragma once

// Full pipeline: calibrate, cluster for each K, rewire, cost, simulate baseline / CoRN / RANDOM arms.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corn/episim.hpp"
#include "corn/optimizer.hpp"
#include "corn/rewiring.hpp"
#include "corn/spatial.hpp"
#include "corn/weights.hpp"

namespace corn {

struct ExperimentConfig {
  std::vector<std::size_t> ks{1, 3, 5};
  std::optional<double> rho;  // unset: calibrate against target_r0
  double target_r0 = 2.86;
  /// The bounded-cost arm runs when either bound is finite.
  double d_star_m = kUnbounded;
  double y_star_h = kUnbounded;
  std::int64_t unit_s = 60;
  std::optional<double> z;  // unset: rho * unit minutes (peak shedding)
  HcpScope scope = HcpScope::All;
  SimConfig sim;
  SolveOptions solve{kUnbounded, 2'000'000, 0, 8, 6};
  bool random_arm = true;
  bool transmissions = false;
  std::size_t bootstrap_resamples = 2000;

  bool bounded() const { return std::isfinite(d_star_m) || std::isfinite(y_star_h); }
  void validate() const;  // throws ConfigError
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void write_experiment_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// One clustering method at one K.
struct ArmResult {
  std::string method;  // corn, corn_bounded, random
  std::size_t k = 1;
  std::optional<SolveOutcome> outcome;  // unset for random
  std::optional<CostReport> costs;
  std::optional<RewiredGraph> rewired;
  std::optional<SimSummary> sim;  // unset when no clustering was found
};

struct ExperimentResult {
  double rho = 0.0;
  double z = 0.0;
  std::optional<Calibration> calibration;
  SimSummary baseline;
  std::vector<ArmResult> arms;  // K-major, then corn / corn_bounded / random
  ComparisonReport comparison;

  const ArmResult* find(const std::string& method, std::size_t k) const;
};

/// Throws InvalidK, ConfigError, NotBracketed.
ExperimentResult run_experiment(const VisitGraph& g, const DistanceMatrix& dist, const ExperimentConfig& cfg);

/// Writes per-arm directories plus the summary tables:
/// infections.csv, transmission.csv, costs.csv, unmet_demand.csv, differences.csv, plot_long.csv.
void write_experiment(const ExperimentResult& r, const VisitGraph& g, const ExperimentConfig& cfg,
                      const std::filesystem::path& dir);

}  // namespace corn
