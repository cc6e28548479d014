#include "corn/core_model.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "corn/csv.hpp"

namespace corn {

// ---------------------------------------------------------------- rosters

HcpRoster HcpRoster::from_entries(const std::vector<std::pair<HcpId, std::string>>& entries) {
  HcpRoster r;
  for (const auto& [id, label] : entries) {
    if (id.empty()) throw ValidationError("empty HCP id");
    if (!r.index_.emplace(id.str(), r.ids_.size()).second) {
      throw ValidationError("duplicate HCP id '" + id.str() + "'");
    }
    HcpType type;
    if (!label.empty()) {
      auto g = r.find_group(label);
      if (!g) {
        g = r.group_labels_.size();
        r.group_labels_.push_back(label);
        r.members_.emplace_back();
      }
      type.group = static_cast<int>(*g);
      r.members_[*g].push_back(r.ids_.size());
    } else {
      r.ns_.push_back(r.ids_.size());
    }
    r.ids_.push_back(id);
    r.types_.push_back(type);
  }
  return r;
}

std::optional<std::size_t> HcpRoster::find(const HcpId& id) const {
  auto it = index_.find(id.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t HcpRoster::index(const HcpId& id) const {
  auto i = find(id);
  if (!i) throw ValidationError("unknown HCP '" + id.str() + "'");
  return *i;
}

std::optional<std::size_t> HcpRoster::find_group(const std::string& label) const {
  auto it = std::find(group_labels_.begin(), group_labels_.end(), label);
  if (it == group_labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - group_labels_.begin());
}

LocationRoster LocationRoster::from_entries(const std::vector<std::pair<LocationId, LocationKind>>& entries) {
  LocationRoster r;
  for (const auto& [id, kind] : entries) {
    if (id.empty()) throw ValidationError("empty location id");
    if (!r.index_.emplace(id.str(), r.ids_.size()).second) {
      throw ValidationError("duplicate location id '" + id.str() + "'");
    }
    if (kind == LocationKind::Substitutable) r.subs_.push_back(r.ids_.size());
    r.ids_.push_back(id);
    r.kinds_.push_back(kind);
  }
  if (r.subs_.empty()) throw ValidationError("location roster has no substitutable locations");
  return r;
}

std::optional<std::size_t> LocationRoster::find(const LocationId& id) const {
  auto it = index_.find(id.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LocationRoster::index(const LocationId& id) const {
  auto i = find(id);
  if (!i) throw ValidationError("unknown location '" + id.str() + "'");
  return *i;
}

// ---------------------------------------------------------------- validation

std::string Violation::describe() const {
  std::ostringstream os;
  switch (rule) {
    case Rule::Overlap: os << "Overlap"; break;
    case Rule::UnknownHcp: os << "UnknownHcp"; break;
    case Rule::UnknownLocation: os << "UnknownLocation"; break;
    case Rule::EmptyInterval: os << "EmptyInterval"; break;
  }
  os << "(" << entity;
  for (auto v : visits) os << ", visit#" << v;
  os << ")";
  return os.str();
}

namespace {

struct Timed {
  std::int64_t start;
  std::int64_t end;
  std::size_t index;
};

// Overlaps among one HCP's visits, reported between consecutive (by start) visits.
void find_overlaps(const std::string& hcp, std::vector<Timed>& timed, std::vector<Violation>& out) {
  std::sort(timed.begin(), timed.end(), [](const Timed& a, const Timed& b) {
    return a.start != b.start ? a.start < b.start : a.index < b.index;
  });
  std::int64_t reach = std::numeric_limits<std::int64_t>::min();
  std::size_t reach_index = 0;
  for (const auto& t : timed) {
    if (t.start < reach) {
      out.push_back({Violation::Rule::Overlap, hcp, {std::min(reach_index, t.index), std::max(reach_index, t.index)}});
    }
    if (t.end > reach) {
      reach = t.end;
      reach_index = t.index;
    }
  }
}

}  // namespace

std::vector<Violation> validate(const HcpRoster& hcps, const LocationRoster& locations,
                                std::span<const RawVisit> visits) {
  std::vector<Violation> out;
  std::map<std::size_t, std::vector<Timed>> per_hcp;
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const auto& v = visits[i];
    const auto h = hcps.find(HcpId(v.hcp));
    if (!h) out.push_back({Violation::Rule::UnknownHcp, v.hcp, {i}});
    if (!locations.find(LocationId(v.location))) out.push_back({Violation::Rule::UnknownLocation, v.location, {i}});
    if (v.start < 0 || v.start >= v.end) {
      out.push_back({Violation::Rule::EmptyInterval, v.hcp, {i}});
      continue;
    }
    if (h) per_hcp[*h].push_back({v.start, v.end, i});
  }
  for (auto& [h, timed] : per_hcp) find_overlaps(hcps.id(h).str(), timed, out);
  return out;
}

std::vector<Violation> validate(const VisitGraph& g) {
  std::vector<Violation> out;
  std::map<std::size_t, std::vector<Timed>> per_hcp;
  const auto& visits = g.visits();
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const auto& v = visits[i];
    if (v.hcp >= g.hcps().size()) out.push_back({Violation::Rule::UnknownHcp, std::to_string(v.hcp), {i}});
    if (v.location >= g.locations().size()) {
      out.push_back({Violation::Rule::UnknownLocation, std::to_string(v.location), {i}});
    }
    if (v.start < 0 || v.start >= v.end) {
      out.push_back({Violation::Rule::EmptyInterval, std::to_string(v.hcp), {i}});
      continue;
    }
    if (v.hcp < g.hcps().size()) per_hcp[v.hcp].push_back({v.start, v.end, i});
  }
  for (auto& [h, timed] : per_hcp) find_overlaps(g.hcps().id(h).str(), timed, out);
  return out;
}

// ---------------------------------------------------------------- graph

VisitGraph VisitGraph::create(HcpRoster hcps, LocationRoster locations, std::vector<Visit> visits) {
  VisitGraph g;
  g.hcps_ = std::move(hcps);
  g.locations_ = std::move(locations);
  g.visits_ = std::move(visits);
  std::stable_sort(g.visits_.begin(), g.visits_.end(),
                   [](const Visit& a, const Visit& b) { return a.start < b.start; });
  auto violations = validate(g);
  if (!violations.empty()) throw ValidationError(violations.front().describe());
  return g;
}

VisitGraph VisitGraph::create(HcpRoster hcps, LocationRoster locations, std::span<const RawVisit> visits) {
  auto violations = validate(hcps, locations, visits);
  if (!violations.empty()) {
    std::string msg = violations.front().describe();
    if (violations.size() > 1) msg += " (+" + std::to_string(violations.size() - 1) + " more)";
    throw ValidationError(msg);
  }
  std::vector<Visit> resolved;
  resolved.reserve(visits.size());
  for (const auto& v : visits) {
    resolved.push_back({static_cast<std::uint32_t>(hcps.index(HcpId(v.hcp))),
                        static_cast<std::uint32_t>(locations.index(LocationId(v.location))), v.start, v.end});
  }
  return create(std::move(hcps), std::move(locations), std::move(resolved));
}

std::int64_t VisitGraph::day_count() const noexcept {
  std::int64_t max_end = 0;
  for (const auto& v : visits_) max_end = std::max(max_end, v.end);
  return std::max<std::int64_t>(1, (max_end + kSecondsPerDay - 1) / kSecondsPerDay);
}

// ---------------------------------------------------------------- I/O

HcpRoster load_hcp_roster(const std::filesystem::path& path) {
  std::vector<std::pair<HcpId, std::string>> entries;
  csv::read(path, "hcp_id,type", [&](const std::vector<std::string>& f, std::size_t line) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) throw ParseError("expected 'hcp_id,type'", line);
    entries.emplace_back(HcpId(f[0]), f[1] == "ns" ? std::string() : f[1]);
  });
  return HcpRoster::from_entries(entries);
}

LocationRoster load_location_roster(const std::filesystem::path& path) {
  std::vector<std::pair<LocationId, LocationKind>> entries;
  csv::read(path, "location_id,kind", [&](const std::vector<std::string>& f, std::size_t line) {
    if (f.size() != 2 || f[0].empty()) throw ParseError("expected 'location_id,kind'", line);
    if (f[1] == "s") {
      entries.emplace_back(LocationId(f[0]), LocationKind::Substitutable);
    } else if (f[1] == "ns") {
      entries.emplace_back(LocationId(f[0]), LocationKind::NonSubstitutable);
    } else {
      throw ParseError("location kind must be 's' or 'ns', got '" + f[1] + "'", line);
    }
  });
  return LocationRoster::from_entries(entries);
}

std::vector<RawVisit> load_raw_visits(const std::filesystem::path& path) {
  std::vector<RawVisit> visits;
  csv::read(path, "hcp_id,location_id,start_s,end_s", [&](const std::vector<std::string>& f, std::size_t line) {
    if (f.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(f.size()), line);
    visits.push_back({f[0], f[1], csv::parse_int(f[2], line), csv::parse_int(f[3], line)});
  });
  return visits;
}

VisitGraph load_mobility_log(const std::filesystem::path& visits_file,
                             const std::filesystem::path& hcp_roster_file,
                             const std::filesystem::path& location_roster_file) {
  auto hcps = load_hcp_roster(hcp_roster_file);
  auto locations = load_location_roster(location_roster_file);
  auto raw = load_raw_visits(visits_file);
  return VisitGraph::create(std::move(hcps), std::move(locations), std::span<const RawVisit>(raw));
}

void write_visits_csv(const VisitGraph& g, const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << "hcp_id,location_id,start_s,end_s\n";
  for (const auto& v : g.visits()) {
    out << g.hcps().id(v.hcp).str() << ',' << g.locations().id(v.location).str() << ',' << v.start << ','
        << v.end << '\n';
  }
}

void write_hcp_roster_csv(const HcpRoster& r, const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << "hcp_id,type\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto t = r.type(i);
    out << r.id(i).str() << ',' << (t.substitutable() ? r.group_label(t.group) : std::string("ns")) << '\n';
  }
}

void write_location_roster_csv(const LocationRoster& r, const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << "location_id,kind\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << r.id(i).str() << ',' << (r.substitutable(i) ? "s" : "ns") << '\n';
  }
}

// ---------------------------------------------------------------- loads

LoadDemandTable compute_loads_demands(const VisitGraph& g) {
  LoadDemandTable t;
  const auto& hcps = g.hcps();
  const auto& locs = g.locations();
  t.days = g.day_count();
  t.load_seconds.assign(hcps.size(), 0);
  t.demand_seconds.assign(locs.size(), 0);
  std::vector<std::int64_t> room_seconds(hcps.size(), 0);
  std::vector<std::vector<std::int64_t>> group_seconds(hcps.group_count(), std::vector<std::int64_t>(locs.size(), 0));
  for (const auto& v : g.visits()) {
    t.load_seconds[v.hcp] += v.duration();
    t.demand_seconds[v.location] += v.duration();
    if (locs.substitutable(v.location)) room_seconds[v.hcp] += v.duration();
    const auto type = hcps.type(v.hcp);
    if (type.substitutable()) group_seconds[type.group][v.location] += v.duration();
  }
  const double scale = 1.0 / (3600.0 * static_cast<double>(t.days));
  auto to_hours = [&](const std::vector<std::int64_t>& s) {
    std::vector<double> h(s.size());
    std::transform(s.begin(), s.end(), h.begin(), [&](std::int64_t x) { return static_cast<double>(x) * scale; });
    return h;
  };
  t.load = to_hours(t.load_seconds);
  t.demand = to_hours(t.demand_seconds);
  t.room_load = to_hours(room_seconds);
  for (const auto& gs : group_seconds) t.group_demand.push_back(to_hours(gs));
  return t;
}

// ---------------------------------------------------------------- chopping

VisitGraph chop_intervals(const VisitGraph& g, std::int64_t unit) {
  if (unit <= 0) throw ValidationError("chop unit must be positive");
  std::vector<Visit> out;
  out.reserve(g.visits().size());
  for (const auto& v : g.visits()) {
    const std::int64_t d = v.duration();
    if (d <= unit) {
      out.push_back(v);
      continue;
    }
    std::int64_t pieces = d / unit;
    const std::int64_t rem = d % unit;
    const bool tail_alone = rem != 0 && 2 * rem >= unit;
    std::int64_t t = v.start;
    for (std::int64_t k = 0; k < pieces; ++k) {
      const bool last_full = k + 1 == pieces;
      std::int64_t e = t + unit;
      if (last_full && rem != 0 && !tail_alone) e = v.end;  // short tail merges backward
      out.push_back({v.hcp, v.location, t, e});
      t = e;
    }
    if (tail_alone) out.push_back({v.hcp, v.location, t, v.end});
  }
  VisitGraph c;
  c.hcps_ = g.hcps_;
  c.locations_ = g.locations_;
  c.visits_ = std::move(out);
  std::stable_sort(c.visits_.begin(), c.visits_.end(),
                   [](const Visit& a, const Visit& b) { return a.start < b.start; });
  c.chop_unit_ = unit;
  return c;
}

}  // namespace corn
