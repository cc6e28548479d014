#include "corn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "corn/csv.hpp"
#include "corn/rng.hpp"

namespace corn {

namespace {

std::string numbered(const std::string& prefix, std::size_t i, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  std::string n = std::to_string(i + 1);
  return prefix + "_" + std::string(width - n.size(), '0') + n;
}

double hall_spacing(const FacilitySpec& s) {
  return s.hallway_nodes > 1 ? s.corridor_length_m / static_cast<double>(s.hallway_nodes - 1) : 0.0;
}

}  // namespace

void FacilitySpec::validate() const {
  auto fail = [](const std::string& m) { throw SpecError(m); };
  if (rooms < 1) fail("rooms must be >= 1");
  if (hallway_nodes < 1) fail("hallway_nodes must be >= 1");
  std::set<std::string> labels;
  std::size_t staff = non_substitutable;
  for (const auto& [label, count] : hcp_groups) {
    if (label.empty()) fail("HCP group labels must be non-empty");
    if (!labels.insert(label).second) fail("duplicate HCP group '" + label + "'");
    if (count < 1) fail("HCP group '" + label + "' must have at least one member");
    staff += count;
  }
  if (staff < 1) fail("the facility needs at least one HCP");
  if (hallway_nodes > 1 && !(corridor_length_m > 0.0)) fail("corridor_length_m must be > 0");
  if (!(room_stub_m > 0.0)) fail("room_stub_m must be > 0");
  if (zones < 1 || zones > rooms) fail("zones must lie in 1..rooms");
  if (!(shift_length_h > 0.0) || !(shift_start_h >= 0.0) || shift_start_h + shift_length_h > 24.0) {
    fail("the shift must fit inside one day");
  }
  if (!(visits_per_hcp_per_day >= 0.0)) fail("visits_per_hcp_per_day must be >= 0");
  if (!(visit_duration_min > 0.0)) fail("visit_duration_min must be > 0");
  if (!(ns_visits_per_day >= 0.0)) fail("ns_visits_per_day must be >= 0");
  if (!(ns_visit_duration_min > 0.0)) fail("ns_visit_duration_min must be > 0");
  if (!(walking_speed_mps > 0.0)) fail("walking_speed_mps must be > 0");
  if (!(locality >= 0.0 && locality <= 1.0)) fail("locality must lie in [0, 1]");
  if (days < 1) fail("days must be >= 1");
}

FacilitySpec load_facility_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path.string());
  FacilitySpec s;
  try {
    const auto j = nlohmann::json::parse(in);
    static const std::set<std::string> keys{"rooms", "hallway_nodes", "hcp_groups", "non_substitutable",
                                            "corridor_length_m", "room_stub_m", "zones", "shift_start_h",
                                            "shift_length_h", "visits_per_hcp_per_day", "visit_duration_min",
                                            "ns_visits_per_day", "ns_visit_duration_min",
                                            "walking_speed_mps", "locality", "days", "seed"};
    for (const auto& [k, v] : j.items()) {
      if (!keys.count(k)) throw SpecError("unknown key '" + k + "' in " + path.string());
    }
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    read("rooms", s.rooms);
    read("hallway_nodes", s.hallway_nodes);
    if (j.contains("hcp_groups")) {
      s.hcp_groups.clear();
      for (const auto& g : j.at("hcp_groups")) s.hcp_groups.emplace_back(g.at("label").get<std::string>(), g.at("count").get<std::size_t>());
    }
    read("non_substitutable", s.non_substitutable);
    read("corridor_length_m", s.corridor_length_m);
    read("room_stub_m", s.room_stub_m);
    read("zones", s.zones);
    read("shift_start_h", s.shift_start_h);
    read("shift_length_h", s.shift_length_h);
    read("visits_per_hcp_per_day", s.visits_per_hcp_per_day);
    read("visit_duration_min", s.visit_duration_min);
    read("ns_visits_per_day", s.ns_visits_per_day);
    read("ns_visit_duration_min", s.ns_visit_duration_min);
    read("walking_speed_mps", s.walking_speed_mps);
    read("locality", s.locality);
    read("days", s.days);
    read("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  s.validate();
  return s;
}

void write_facility_spec(const FacilitySpec& s, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["rooms"] = s.rooms;
  j["hallway_nodes"] = s.hallway_nodes;
  j["hcp_groups"] = nlohmann::ordered_json::array();
  for (const auto& [label, count] : s.hcp_groups) j["hcp_groups"].push_back({{"label", label}, {"count", count}});
  j["non_substitutable"] = s.non_substitutable;
  j["corridor_length_m"] = s.corridor_length_m;
  j["room_stub_m"] = s.room_stub_m;
  j["zones"] = s.zones;
  j["shift_start_h"] = s.shift_start_h;
  j["shift_length_h"] = s.shift_length_h;
  j["visits_per_hcp_per_day"] = s.visits_per_hcp_per_day;
  j["visit_duration_min"] = s.visit_duration_min;
  j["ns_visits_per_day"] = s.ns_visits_per_day;
  j["ns_visit_duration_min"] = s.ns_visit_duration_min;
  j["walking_speed_mps"] = s.walking_speed_mps;
  j["locality"] = s.locality;
  j["days"] = s.days;
  j["seed"] = s.seed;
  csv::open_for_write(path) << j.dump(2) << '\n';
}

Facility generate_facility(const FacilitySpec& spec) {
  spec.validate();
  Facility f;
  std::vector<std::string> nodes;
  std::vector<SpatialEdge> edges;
  std::map<LocationId, std::string> map;
  std::vector<std::pair<LocationId, LocationKind>> locs;
  const double spacing = hall_spacing(spec);
  for (std::size_t h = 0; h < spec.hallway_nodes; ++h) {
    nodes.push_back(numbered("hall", h, spec.hallway_nodes));
    if (h > 0) edges.push_back({nodes[h - 1], nodes[h], spacing});
  }
  for (std::size_t r = 0; r < spec.rooms; ++r) {
    const auto name = numbered("room", r, spec.rooms);
    const std::size_t hall = r * spec.hallway_nodes / spec.rooms;
    nodes.push_back(name);
    edges.push_back({name, nodes[hall], spec.room_stub_m});
    map[LocationId(name)] = name;
    locs.emplace_back(LocationId(name), LocationKind::Substitutable);
    f.room_zone.push_back(r * spec.zones / spec.rooms);
    f.room_hall.push_back(hall);
  }
  for (std::size_t h = 0; h < spec.hallway_nodes; ++h) {
    map[LocationId(nodes[h])] = nodes[h];
    locs.emplace_back(LocationId(nodes[h]), LocationKind::NonSubstitutable);
  }
  f.spatial = SpatialGraph::create(nodes, edges, map);
  f.locations = LocationRoster::from_entries(locs);

  std::vector<std::pair<HcpId, std::string>> staff;
  for (const auto& [label, count] : spec.hcp_groups) {
    for (std::size_t i = 0; i < count; ++i) {
      staff.emplace_back(HcpId(numbered(label, i, count)), label);
      f.home_zone.push_back(i % spec.zones);
    }
  }
  for (std::size_t i = 0; i < spec.non_substitutable; ++i) {
    staff.emplace_back(HcpId(numbered("other", i, spec.non_substitutable)), "");
    f.home_zone.push_back(i % spec.zones);
  }
  f.hcps = HcpRoster::from_entries(staff);
  return f;
}

VisitGraph generate_mobility(const Facility& f, const FacilitySpec& spec) {
  spec.validate();
  const std::size_t rooms = f.room_zone.size();
  std::vector<std::vector<std::size_t>> zone_rooms(spec.zones);
  for (std::size_t r = 0; r < rooms; ++r) zone_rooms[f.room_zone[r]].push_back(r);
  const auto& locs = f.locations;
  std::vector<std::uint32_t> room_loc(rooms), hall_loc(spec.hallway_nodes);
  for (std::size_t r = 0; r < rooms; ++r) room_loc[r] = static_cast<std::uint32_t>(locs.index(LocationId(numbered("room", r, rooms))));
  for (std::size_t h = 0; h < spec.hallway_nodes; ++h) {
    hall_loc[h] = static_cast<std::uint32_t>(locs.index(LocationId(numbered("hall", h, spec.hallway_nodes))));
  }

  const double spacing = hall_spacing(spec);
  const auto shift_start = static_cast<std::int64_t>(std::llround(spec.shift_start_h * 3600.0));
  const auto shift_len = static_cast<std::int64_t>(std::llround(spec.shift_length_h * 3600.0));
  std::vector<Visit> day;
  for (std::size_t p = 0; p < f.hcps.size(); ++p) {
    auto e = rng::stream(spec.seed, rng::domain::kSynthMobility, p);
    const bool ns = !f.hcps.type(p).substitutable();
    const double rate = ns ? spec.ns_visits_per_day : spec.visits_per_hcp_per_day;
    const double mean_s = (ns ? spec.ns_visit_duration_min : spec.visit_duration_min) * 60.0;
    std::poisson_distribution<int> count(rate > 0 ? rate : 1.0);
    const int n = rate > 0 ? count(e) : 0;
    const auto& home = zone_rooms[f.home_zone[p]];
    std::vector<std::size_t> room(static_cast<std::size_t>(n));
    std::vector<std::int64_t> dur(room.size()), walk(room.size());
    std::int64_t busy = 0;
    std::size_t prev_hall = f.room_hall.empty() ? 0 : f.room_hall[home.front()];
    for (std::size_t i = 0; i < room.size(); ++i) {
      // Every visit consumes the same draws, whichever branch is taken.
      const double u = rng::uniform01(e);
      const std::size_t local = home[rng::below(e, home.size())];
      const std::size_t global = rng::below(e, rooms);
      const double x = -std::log1p(-rng::uniform01(e)) * mean_s;
      room[i] = u < spec.locality ? local : global;
      dur[i] = static_cast<std::int64_t>(std::llround(std::clamp(x, 60.0, 4.0 * mean_s)));
      const double meters = std::abs(static_cast<double>(f.room_hall[room[i]]) - static_cast<double>(prev_hall)) * spacing +
                            2.0 * spec.room_stub_m;
      walk[i] = std::max<std::int64_t>(15, std::llround(meters / spec.walking_speed_mps));
      prev_hall = f.room_hall[room[i]];
      busy += dur[i] + walk[i];
    }
    std::size_t kept = room.size();
    while (kept > 0 && busy > shift_len) {
      --kept;
      busy -= dur[kept] + walk[kept];
    }
    // Gaps: exponential draws rescaled to fill the free part of the shift.
    std::vector<double> gap(kept + 1);
    double total = 0.0;
    for (auto& g : gap) total += (g = -std::log1p(-rng::uniform01(e)));
    const double free_s = static_cast<double>(shift_len - busy);
    std::int64_t t = shift_start;
    for (std::size_t i = 0; i < kept; ++i) {
      t += static_cast<std::int64_t>(std::floor(gap[i] / total * free_s));
      day.push_back({static_cast<std::uint32_t>(p), hall_loc[f.room_hall[room[i]]], t, t + walk[i]});
      t += walk[i];
      day.push_back({static_cast<std::uint32_t>(p), room_loc[room[i]], t, t + dur[i]});
      t += dur[i];
    }
  }

  std::vector<Visit> all;
  all.reserve(day.size() * spec.days);
  for (std::size_t d = 0; d < spec.days; ++d) {
    for (auto v : day) {
      v.start += static_cast<std::int64_t>(d) * kSecondsPerDay;
      v.end += static_cast<std::int64_t>(d) * kSecondsPerDay;
      all.push_back(v);
    }
  }
  return VisitGraph::create(f.hcps, f.locations, std::move(all));
}

}  // namespace corn
