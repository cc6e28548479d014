#pragma once

// Synthetic facilities and mobility logs: a corridor with rooms on stubs, HCPs with home zones.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "corn/core_model.hpp"
#include "corn/spatial.hpp"

namespace corn {

struct FacilitySpec {
  std::size_t rooms = 30;
  std::size_t hallway_nodes = 15;
  std::vector<std::pair<std::string, std::size_t>> hcp_groups{{"nurse", 12}};
  std::size_t non_substitutable = 6;
  double corridor_length_m = 56.0;
  double room_stub_m = 2.0;
  std::size_t zones = 5;              // contiguous room runs used as home zones
  double shift_start_h = 7.0;
  double shift_length_h = 8.0;
  double visits_per_hcp_per_day = 16.0;
  double visit_duration_min = 10.0;
  /// Visit profile of non-substitutable HCPs (therapists and the like): fewer, longer visits.
  double ns_visits_per_day = 6.0;
  double ns_visit_duration_min = 20.0;
  double walking_speed_mps = 1.0;
  double locality = 0.3;
  std::size_t days = 30;
  std::uint64_t seed = 0;

  void validate() const;  // throws SpecError
};

FacilitySpec load_facility_spec(const std::filesystem::path& path);
void write_facility_spec(const FacilitySpec& spec, const std::filesystem::path& path);

struct Facility {
  SpatialGraph spatial;
  HcpRoster hcps;
  LocationRoster locations;
  std::vector<std::size_t> room_zone;  // per room, in room order
  std::vector<std::size_t> home_zone;  // per HCP, roster order
  std::vector<std::size_t> room_hall;  // hallway node each room hangs off
};

/// Rooms are named room_NN, hallway nodes hall_NN; both become locations (rooms substitutable).
Facility generate_facility(const FacilitySpec& spec);

/// One day of visits per HCP, repeated for spec.days days. Each room visit is preceded by a
/// short hallway visit at the room's corridor node.
VisitGraph generate_mobility(const Facility& f, const FacilitySpec& spec);

}  // namespace corn
