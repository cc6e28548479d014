#include "corn/spatial.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include <json.hpp>

#include "corn/csv.hpp"

namespace corn {

SpatialGraph SpatialGraph::create(std::vector<std::string> nodes, std::vector<SpatialEdge> edges,
                                  std::map<LocationId, std::string> location_map) {
  SpatialGraph g;
  g.nodes_ = std::move(nodes);
  g.edges_ = std::move(edges);
  g.location_map_ = std::move(location_map);
  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    if (!g.index_.emplace(g.nodes_[i], i).second) throw ParseError("duplicate spatial node '" + g.nodes_[i] + "'");
  }
  g.adjacency_.resize(g.nodes_.size());
  for (const auto& e : g.edges_) {
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m)) {
      throw ParseError("edge " + e.u + "-" + e.v + " must have positive finite length");
    }
    auto u = g.index_.find(e.u);
    auto v = g.index_.find(e.v);
    if (u == g.index_.end() || v == g.index_.end()) {
      throw ParseError("edge " + e.u + "-" + e.v + " references an unknown node");
    }
    g.adjacency_[u->second].emplace_back(v->second, e.length_m);
    g.adjacency_[v->second].emplace_back(u->second, e.length_m);
  }
  for (const auto& [loc, node] : g.location_map_) {
    if (!g.index_.count(node)) throw ParseError("location '" + loc.str() + "' maps to unknown node '" + node + "'");
  }
  if (!g.location_map_.empty()) {
    const auto& [first_loc, first_node] = *g.location_map_.begin();
    const auto d = g.distances_from(g.index_.at(first_node));
    for (const auto& [loc, node] : g.location_map_) {
      if (!std::isfinite(d[g.index_.at(node)])) {
        throw DisconnectedError("locations '" + first_loc.str() + "' and '" + loc.str() + "' are not connected");
      }
    }
  }
  return g;
}

std::size_t SpatialGraph::node_index(const std::string& node) const {
  auto it = index_.find(node);
  if (it == index_.end()) throw ParseError("unknown spatial node '" + node + "'");
  return it->second;
}

std::vector<double> SpatialGraph::distances_from(std::size_t source) const {
  std::vector<double> dist(nodes_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (auto [v, len] : adjacency_[u]) {
      if (d + len < dist[v]) {
        dist[v] = d + len;
        heap.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

SpatialGraph load_spatial_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
  try {
    auto nodes = j.at("nodes").get<std::vector<std::string>>();
    std::vector<SpatialEdge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw ParseError("edge must be [u, v, length_m]");
      edges.push_back({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<double>()});
    }
    std::map<LocationId, std::string> location_map;
    for (const auto& [loc, node] : j.at("location_map").items()) location_map.emplace(LocationId(loc), node.get<std::string>());
    return SpatialGraph::create(std::move(nodes), std::move(edges), std::move(location_map));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

void write_spatial_graph(const SpatialGraph& g, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["nodes"] = g.nodes();
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) j["edges"].push_back({e.u, e.v, e.length_m});
  j["location_map"] = nlohmann::ordered_json::object();
  for (const auto& [loc, node] : g.location_map()) j["location_map"][loc.str()] = node;
  auto out = csv::open_for_write(path);
  out << j.dump(1) << '\n';
}

DistanceMatrix::DistanceMatrix(std::vector<LocationId> locations, std::vector<double> dist)
    : locations_(std::move(locations)), dist_(std::move(dist)) {
  if (dist_.size() != locations_.size() * locations_.size()) throw ValidationError("distance matrix shape mismatch");
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    if (!index_.emplace(locations_[i], i).second) throw ValidationError("duplicate location in distance matrix");
  }
  auto problems = check_metric();
  if (!problems.empty()) throw ValidationError("not a metric: " + problems.front());
}

std::size_t DistanceMatrix::index(const LocationId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("no distance for location '" + id.str() + "'");
  return it->second;
}

std::vector<std::string> DistanceMatrix::check_metric(double tol) const {
  std::vector<std::string> out;
  const std::size_t n = locations_.size();
  for (std::size_t a = 0; a < n; ++a) {
    if (at(a, a) != 0.0) out.push_back("dist(" + locations_[a].str() + ", self) != 0");
    for (std::size_t b = 0; b < n; ++b) {
      const double d = at(a, b);
      if (!std::isfinite(d) || d < 0.0) out.push_back("dist(" + locations_[a].str() + ", " + locations_[b].str() + ") invalid");
      if (std::abs(d - at(b, a)) > tol) out.push_back("asymmetric at " + locations_[a].str() + ", " + locations_[b].str());
      for (std::size_t c = 0; c < n; ++c) {
        if (at(a, c) > at(a, b) + at(b, c) + tol * (1.0 + at(a, c))) {
          out.push_back("triangle inequality fails for " + locations_[a].str() + ", " + locations_[b].str() + ", " +
                        locations_[c].str());
        }
      }
    }
  }
  return out;
}

DistanceMatrix shortest_path_metric(const SpatialGraph& g) {
  std::vector<LocationId> locations;
  std::vector<std::size_t> nodes;
  for (const auto& [loc, node] : g.location_map()) {
    locations.push_back(loc);
    nodes.push_back(g.node_index(node));
  }
  const std::size_t n = locations.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto from = g.distances_from(nodes[a]);
    for (std::size_t b = 0; b < n; ++b) dist[a * n + b] = from[nodes[b]];
  }
  // Dijkstra sums in different orders; take the smaller direction so the matrix is exactly symmetric.
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = std::min(dist[a * n + b], dist[b * n + a]);
      dist[a * n + b] = dist[b * n + a] = d;
    }
  }
  return DistanceMatrix(std::move(locations), std::move(dist));
}

}  // namespace corn
