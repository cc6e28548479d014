#pragma once

// Stochastic epidemic replay over visit graphs: shedding, contacts, replicates, calibration.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corn/core_model.hpp"
#include "corn/optimizer.hpp"

namespace corn {

struct DiseaseParams {
  double rho = 1e-3;  // per minute of contact
  int incubation_days = 6;
  int recovery_days = 10;
  /// Per-day exponents; negative means "derive so that beta(1) = beta(W + T) = 0.05".
  double ramp_up_rate = -1.0;
  double ramp_down_rate = -1.0;
  double cross_bubble_scale = 0.75;

  double up_rate() const;
  double down_rate() const;
};

/// Random mixing outside rooms: each on-duty HCP starts Poisson(rate) contacts per day
/// with uniformly chosen on-duty partners.
struct CasualContactModel {
  double rate_per_day = 1.0;
  double minutes = 5.0;
};

struct SimConfig {
  DiseaseParams disease;
  std::size_t replicates = 500;
  std::uint64_t seed = 0;
  std::size_t horizon_days = 0;  // 0 = length of the mobility log; longer horizons replay it cyclically
  CasualContactModel casual;
  std::string seed_group = "nurse";  // HCP group the index case is drawn from
  bool keep_transmissions = true;

  void validate() const;  // throws ConfigError
};

SimConfig load_sim_config(const std::filesystem::path& path);
void write_sim_config(const SimConfig& cfg, const std::filesystem::path& path);

double shedding(int day_since_infection, const DiseaseParams& p);
double contact_infection_prob(double minutes, double beta, double rho);

/// Agents are the HCPs in roster order followed by one resident per substitutable room.
struct Transmission {
  std::size_t source = 0;
  std::size_t target = 0;
  std::optional<std::size_t> location;  // unset for casual contacts
  std::int64_t day = 0;
  std::int64_t time = 0;     // seconds since the start of the simulation
  bool casual = false;
};

struct ReplicateResult {
  std::size_t infections = 0;  // seed included
  std::size_t seed_agent = 0;
  bool leave = false;
  bool reach = false;
  std::vector<std::size_t> new_per_day;
  std::vector<Transmission> transmissions;
};

struct Quantiles {
  double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
};

struct SimSummary {
  std::string label;
  bool bubbles = false;  // leave/reach are meaningful only when a clustering was applied
  std::vector<std::string> agents;
  std::vector<ReplicateResult> replicates;

  double mean_infections() const;
  double mean_secondary() const;  // seed excluded
  double median_infections() const;
  Quantiles quantiles() const;
  double leave_fraction() const;
  double reach_fraction() const;
  std::vector<double> infections() const;
};

/// Replays `g` day by day. With a clustering, cross-bubble HCP contacts outside rooms are kept
/// with probability cross_bubble_scale and leave/reach are tracked. Throws ConfigError.
SimSummary simulate(const VisitGraph& g, const BubbleClustering* clustering, const SimConfig& cfg,
                    std::string label = {});

/// RANDOM arm: every replicate draws its own balanced clustering and rewires with it.
SimSummary simulate_random_bubbles(const VisitGraph& g, std::size_t k, const SimConfig& cfg, std::string label = {});

struct R0Estimate {
  double rho = 0.0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Secondary cases of the index case alone, others infected but silent.
R0Estimate estimate_r0(const VisitGraph& g, double rho, const SimConfig& cfg);

struct Calibration {
  double rho = 0.0;
  R0Estimate achieved;
  std::vector<R0Estimate> trace;  // every evaluation, in order
  bool monotone = true;
};

/// Bisection on rho until the estimate is within 5% of `target_r0`. Throws NotBracketed.
Calibration calibrate_rho(const VisitGraph& g, double target_r0, const SimConfig& cfg);

struct ArmStats {
  std::string label;
  std::size_t replicates = 0;
  double mean = 0, ci_low = 0, ci_high = 0;
  double median = 0;
  Quantiles q;
  std::optional<double> leave_pct;
  std::optional<double> reach_pct;
  std::optional<double> reach_ci_low, reach_ci_high;
};

struct PairedDifference {
  std::string a, b;
  double mean_diff = 0, ci_low = 0, ci_high = 0;  // mean(a) - mean(b)
  bool paired = false;
};

struct ComparisonReport {
  std::vector<ArmStats> arms;
  std::vector<PairedDifference> differences;
};

ComparisonReport compare_runs(const std::vector<SimSummary>& summaries, std::uint64_t seed,
                              std::size_t resamples = 2000);

void write_sim_summary(const SimSummary& s, const std::filesystem::path& dir, bool with_transmissions);
void write_comparison(const ComparisonReport& r, const std::filesystem::path& dir);

}  // namespace corn
