#pragma once

// Pairwise room-to-room transmission weights carried by shared HCP visits.

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "corn/core_model.hpp"

namespace corn {

enum class HcpScope { All, NonSubstitutableOnly };

/// Symmetric weights over substitutable locations; absent pairs weigh 0.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::vector<LocationId> locations, double z);

  const std::vector<LocationId>& locations() const noexcept { return locations_; }
  double z() const noexcept { return z_; }

  void set(const LocationId& a, const LocationId& b, double w);
  double get(const LocationId& a, const LocationId& b) const;

  /// Non-zero pairs, each once with `first < second` in id order.
  const std::map<std::pair<LocationId, LocationId>, double>& entries() const noexcept { return entries_; }

 private:
  std::vector<LocationId> locations_;
  double z_ = 0.0;
  std::map<std::pair<LocationId, LocationId>, double> entries_;
};

/// Probability that room `from` infects room `to` through one HCP's visit sequence.
/// `sequence` lists, in time order, whether each unit interval is at `from` (true) or `to` (false).
double chain_probability(const std::vector<bool>& sequence, double z);

/// Directed weight from `from` to `to`; `g` must be chopped into uniform intervals.
double directed_weight(const VisitGraph& g, const LocationId& from, const LocationId& to, double z,
                       HcpScope scope = HcpScope::All);

/// Chops `g` with `unit` and returns the symmetrised weights over substitutable locations.
WeightMatrix weight_matrix(const VisitGraph& g, double z, std::int64_t unit, HcpScope scope = HcpScope::All);

/// Monte-Carlo estimate of directed_weight, for cross-checking.
double mc_directed_weight(const VisitGraph& g, const LocationId& from, const LocationId& to, double z,
                          std::uint64_t samples, std::uint64_t seed, HcpScope scope = HcpScope::All);

void write_weights_csv(const WeightMatrix& w, const std::filesystem::path& path);
WeightMatrix load_weights_csv(const std::filesystem::path& path, const LocationRoster& locations, double z = 0.0);

}  // namespace corn
