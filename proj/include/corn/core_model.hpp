#pragma once

// Visit graph: HCPs, locations, and the timed visits between them.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corn/error.hpp"

namespace corn {

template <class Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const StrongId&) const = default;

 private:
  std::string value_;
};

using HcpId = StrongId<struct HcpIdTag>;
using LocationId = StrongId<struct LocationIdTag>;

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// HCP type tag: `group < 0` means non-substitutable, otherwise 0-based group index.
struct HcpType {
  int group = -1;
  bool substitutable() const noexcept { return group >= 0; }
  bool operator==(const HcpType&) const = default;
};

class HcpRoster {
 public:
  HcpRoster() = default;

  /// Builds a roster from `(id, label)` pairs; an empty label marks a non-substitutable HCP.
  /// Group labels are numbered in order of first appearance.
  static HcpRoster from_entries(const std::vector<std::pair<HcpId, std::string>>& entries);

  std::size_t size() const noexcept { return ids_.size(); }
  const HcpId& id(std::size_t i) const { return ids_.at(i); }
  HcpType type(std::size_t i) const { return types_.at(i); }
  std::optional<std::size_t> find(const HcpId& id) const;
  std::size_t index(const HcpId& id) const;

  std::size_t group_count() const noexcept { return group_labels_.size(); }
  const std::string& group_label(std::size_t g) const { return group_labels_.at(g); }
  std::optional<std::size_t> find_group(const std::string& label) const;
  /// Members of group `g` in roster order.
  const std::vector<std::size_t>& group_members(std::size_t g) const { return members_.at(g); }
  const std::vector<std::size_t>& non_substitutable() const noexcept { return ns_; }

 private:
  std::vector<HcpId> ids_;
  std::vector<HcpType> types_;
  std::vector<std::string> group_labels_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> ns_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class LocationKind { Substitutable, NonSubstitutable };

class LocationRoster {
 public:
  LocationRoster() = default;
  static LocationRoster from_entries(const std::vector<std::pair<LocationId, LocationKind>>& entries);

  std::size_t size() const noexcept { return ids_.size(); }
  const LocationId& id(std::size_t i) const { return ids_.at(i); }
  LocationKind kind(std::size_t i) const { return kinds_.at(i); }
  bool substitutable(std::size_t i) const { return kinds_.at(i) == LocationKind::Substitutable; }
  std::optional<std::size_t> find(const LocationId& id) const;
  std::size_t index(const LocationId& id) const;
  /// Substitutable locations in roster order.
  const std::vector<std::size_t>& substitutable_locations() const noexcept { return subs_; }

 private:
  std::vector<LocationId> ids_;
  std::vector<LocationKind> kinds_;
  std::vector<std::size_t> subs_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Visit by roster index; times are seconds from study start, half-open [start, end).
struct Visit {
  std::uint32_t hcp = 0;
  std::uint32_t location = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t duration() const noexcept { return end - start; }
  bool operator==(const Visit&) const = default;
};

/// Unresolved visit row, as read from a mobility log.
struct RawVisit {
  std::string hcp;
  std::string location;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct Violation {
  enum class Rule { Overlap, UnknownHcp, UnknownLocation, EmptyInterval };
  Rule rule;
  std::string entity;
  std::vector<std::size_t> visits;  // indices into the checked sequence

  std::string describe() const;
};

class VisitGraph {
 public:
  VisitGraph() = default;

  /// Validates and sorts visits by start time (stable). Throws ValidationError.
  static VisitGraph create(HcpRoster hcps, LocationRoster locations, std::vector<Visit> visits);
  static VisitGraph create(HcpRoster hcps, LocationRoster locations, std::span<const RawVisit> visits);

  const HcpRoster& hcps() const noexcept { return hcps_; }
  const LocationRoster& locations() const noexcept { return locations_; }
  const std::vector<Visit>& visits() const noexcept { return visits_; }

  /// Set when every visit was produced by chop_intervals with this unit.
  std::optional<std::int64_t> chop_unit() const noexcept { return chop_unit_; }

  /// ceil(max end / 86400), at least 1.
  std::int64_t day_count() const noexcept;

 private:
  friend VisitGraph chop_intervals(const VisitGraph& g, std::int64_t unit);
  HcpRoster hcps_;
  LocationRoster locations_;
  std::vector<Visit> visits_;
  std::optional<std::int64_t> chop_unit_;
};

struct LoadDemandTable {
  std::int64_t days = 1;
  std::vector<std::int64_t> load_seconds;    // per HCP, all visits
  std::vector<std::int64_t> demand_seconds;  // per location, all visits
  std::vector<double> load;                  // hours/day
  std::vector<double> demand;                // hours/day
  /// Hours/day of an HCP's visits to substitutable locations.
  std::vector<double> room_load;
  /// group_demand[g][l]: hours/day of visits to location l by HCPs of group g.
  std::vector<std::vector<double>> group_demand;

  double load_of(const VisitGraph& g, const HcpId& id) const { return load.at(g.hcps().index(id)); }
  double demand_of(const VisitGraph& g, const LocationId& id) const {
    return demand.at(g.locations().index(id));
  }
};

HcpRoster load_hcp_roster(const std::filesystem::path& path);
LocationRoster load_location_roster(const std::filesystem::path& path);
std::vector<RawVisit> load_raw_visits(const std::filesystem::path& path);

VisitGraph load_mobility_log(const std::filesystem::path& visits_file,
                             const std::filesystem::path& hcp_roster_file,
                             const std::filesystem::path& location_roster_file);

void write_visits_csv(const VisitGraph& g, const std::filesystem::path& path);
void write_hcp_roster_csv(const HcpRoster& r, const std::filesystem::path& path);
void write_location_roster_csv(const LocationRoster& r, const std::filesystem::path& path);

std::vector<Violation> validate(const HcpRoster& hcps, const LocationRoster& locations,
                                std::span<const RawVisit> visits);
std::vector<Violation> validate(const VisitGraph& g);

LoadDemandTable compute_loads_demands(const VisitGraph& g);

/// Splits every visit into `unit`-second pieces; a trailing piece shorter than
/// unit/2 is merged into its predecessor, a lone visit shorter than `unit` stays whole.
VisitGraph chop_intervals(const VisitGraph& g, std::int64_t unit);

}  // namespace corn

template <class Tag>
struct std::hash<corn::StrongId<Tag>> {
  std::size_t operator()(const corn::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
