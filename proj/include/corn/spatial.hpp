#pragma once

// Facility spatial graph and the walking-distance metric over locations.

#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "corn/core_model.hpp"

namespace corn {

struct SpatialEdge {
  std::string u;
  std::string v;
  double length_m = 0.0;
};

class SpatialGraph {
 public:
  /// Validates lengths, node references, and connectivity of mapped locations.
  /// Throws ParseError or DisconnectedError.
  static SpatialGraph create(std::vector<std::string> nodes, std::vector<SpatialEdge> edges,
                             std::map<LocationId, std::string> location_map);

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<SpatialEdge>& edges() const noexcept { return edges_; }
  const std::map<LocationId, std::string>& location_map() const noexcept { return location_map_; }

  /// Distances (meters) from node `source` to every node, by node index.
  std::vector<double> distances_from(std::size_t source) const;
  std::size_t node_index(const std::string& node) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<SpatialEdge> edges_;
  std::map<LocationId, std::string> location_map_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

SpatialGraph load_spatial_graph(const std::filesystem::path& path);
void write_spatial_graph(const SpatialGraph& g, const std::filesystem::path& path);

/// Symmetric metric over a set of locations (meters).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// Throws ValidationError if the matrix is not a finite metric.
  DistanceMatrix(std::vector<LocationId> locations, std::vector<double> dist);

  std::size_t size() const noexcept { return locations_.size(); }
  const std::vector<LocationId>& locations() const noexcept { return locations_; }
  bool contains(const LocationId& id) const { return index_.count(id) != 0; }
  std::size_t index(const LocationId& id) const;

  double at(std::size_t a, std::size_t b) const { return dist_[a * locations_.size() + b]; }
  double operator()(const LocationId& a, const LocationId& b) const { return at(index(a), index(b)); }

  /// Empty when all metric invariants hold; otherwise one message per failure.
  std::vector<std::string> check_metric(double tol = 1e-9) const;

 private:
  std::vector<LocationId> locations_;
  std::vector<double> dist_;
  std::map<LocationId, std::size_t> index_;
};

DistanceMatrix shortest_path_metric(const SpatialGraph& g);

}  // namespace corn
