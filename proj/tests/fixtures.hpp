#pragma once

#include <string>
#include <utility>
#include <vector>

#include "corn/core_model.hpp"
#include "corn/spatial.hpp"

namespace fixtures {

using namespace corn;

inline constexpr std::int64_t kHour = 3600;

struct Hcp {
  std::string id;
  std::string group;  // empty = non-substitutable
};

struct Loc {
  std::string id;
  bool substitutable = true;
};

inline VisitGraph make_graph(const std::vector<Hcp>& hcps, const std::vector<Loc>& locs,
                             const std::vector<RawVisit>& visits) {
  std::vector<std::pair<HcpId, std::string>> he;
  for (const auto& h : hcps) he.emplace_back(HcpId(h.id), h.group);
  std::vector<std::pair<LocationId, LocationKind>> le;
  for (const auto& l : locs) {
    le.emplace_back(LocationId(l.id), l.substitutable ? LocationKind::Substitutable : LocationKind::NonSubstitutable);
  }
  return VisitGraph::create(HcpRoster::from_entries(he), LocationRoster::from_entries(le),
                            std::span<const RawVisit>(visits));
}

/// The worked example: five group-1 HCPs, one non-substitutable HCP, four rooms; times in hours.
/// Bubble 1 = {l1, l2; p1, p2, p3}, bubble 2 = {l3, l4; p5, p6}.
inline VisitGraph worked_example() {
  auto h = [](std::int64_t t) { return t * kHour; };
  return make_graph({{"p1", "1"}, {"p2", "1"}, {"p3", "1"}, {"p4", ""}, {"p5", "1"}, {"p6", "1"}},
                    {{"l1"}, {"l2"}, {"l3"}, {"l4"}},
                    {
                        {"p1", "l1", h(0), h(2)},
                        {"p2", "l2", h(0), h(2)},
                        {"p5", "l3", h(0), h(3)},
                        {"p6", "l4", h(0), h(3)},
                        {"p3", "l4", h(1), h(3)},
                        {"p4", "l1", h(1), h(2)},
                        {"p1", "l2", h(2), h(4)},
                        {"p2", "l3", h(3), h(4)},
                        {"p3", "l4", h(3), h(4)},
                        {"p3", "l1", h(4), h(5)},
                        {"p4", "l3", h(5), h(6)},
                    });
}

/// Symmetric distance matrix from an explicit upper triangle (row-major pairs).
inline DistanceMatrix matrix(const std::vector<std::string>& ids, const std::vector<double>& upper) {
  const std::size_t n = ids.size();
  std::vector<double> d(n * n, 0.0);
  std::size_t t = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) d[a * n + b] = d[b * n + a] = upper.at(t++);
  }
  std::vector<LocationId> locs;
  for (const auto& id : ids) locs.emplace_back(id);
  return DistanceMatrix(std::move(locs), std::move(d));
}

/// Locations on a line, `spacing` meters apart.
inline DistanceMatrix line_metric(const std::vector<std::string>& ids, double spacing) {
  std::vector<double> upper;
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) upper.push_back(spacing * static_cast<double>(b - a));
  }
  return matrix(ids, upper);
}

}  // namespace fixtures
