#include "corn/rewiring.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "corn/csv.hpp"
#include "corn/rng.hpp"

namespace corn {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Membership {
  std::vector<std::size_t> location;  // bubble per location, kNone for L_ns
  std::vector<std::size_t> hcp;       // bubble per HCP, kNone for P_ns
};

Membership membership(const VisitGraph& g, const BubbleClustering& c) {
  const auto& hcps = g.hcps();
  const auto& locs = g.locations();
  Membership m{std::vector<std::size_t>(locs.size(), kNone), std::vector<std::size_t>(hcps.size(), kNone)};
  for (const auto& [id, b] : c.location_bubble) {
    auto i = locs.find(id);
    if (!i) throw ClusteringMismatch("clustering names unknown location '" + id.str() + "'");
    if (!locs.substitutable(*i)) throw ClusteringMismatch("location '" + id.str() + "' is not substitutable");
    if (b >= c.k) throw ClusteringMismatch("location '" + id.str() + "' has bubble outside 1..K");
    m.location[*i] = b;
  }
  for (const auto& [id, b] : c.hcp_bubble) {
    auto i = hcps.find(id);
    if (!i) throw ClusteringMismatch("clustering names unknown HCP '" + id.str() + "'");
    if (!hcps.type(*i).substitutable()) throw ClusteringMismatch("HCP '" + id.str() + "' is not substitutable");
    if (b >= c.k) throw ClusteringMismatch("HCP '" + id.str() + "' has bubble outside 1..K");
    m.hcp[*i] = b;
  }
  for (std::size_t l = 0; l < locs.size(); ++l) {
    if (locs.substitutable(l) && m.location[l] == kNone) {
      throw ClusteringMismatch("location '" + locs.id(l).str() + "' is not in any bubble");
    }
  }
  for (std::size_t p = 0; p < hcps.size(); ++p) {
    if (hcps.type(p).substitutable() && m.hcp[p] == kNone) {
      throw ClusteringMismatch("HCP '" + hcps.id(p).str() + "' is not in any bubble");
    }
  }
  return m;
}

class Schedule {
 public:
  explicit Schedule(std::size_t hcps) : busy_(hcps) {}

  bool free(std::size_t p, std::int64_t s, std::int64_t e) const {
    const auto& b = busy_[p];
    auto it = b.lower_bound(e);
    return it == b.begin() || std::prev(it)->second <= s;
  }
  void take(std::size_t p, std::int64_t s, std::int64_t e) { busy_[p].emplace(s, e); }

 private:
  std::vector<std::map<std::int64_t, std::int64_t>> busy_;
};

std::vector<double> per_day(const std::vector<std::int64_t>& seconds, std::int64_t days) {
  std::vector<double> out(seconds.size());
  for (std::size_t i = 0; i < seconds.size(); ++i) {
    out[i] = static_cast<double>(seconds[i]) / 3600.0 / static_cast<double>(days);
  }
  return out;
}

}  // namespace

RewiredGraph rewire(const VisitGraph& g, const BubbleClustering& c, std::uint64_t seed,
                    const RewireOptions& options) {
  const auto m = membership(g, c);
  const auto& hcps = g.hcps();
  const auto& visits = g.visits();

  // pool[group][bubble]: members in roster order
  std::vector<std::vector<std::vector<std::size_t>>> pool(hcps.group_count(),
                                                          std::vector<std::vector<std::size_t>>(c.k));
  for (std::size_t grp = 0; grp < hcps.group_count(); ++grp) {
    for (auto p : hcps.group_members(grp)) pool[grp][m.hcp[p]].push_back(p);
  }

  Schedule schedule(hcps.size());
  std::vector<std::size_t> assigned(visits.size(), kNone);
  auto fixed = [&](const Visit& v) { return !hcps.type(v.hcp).substitutable() || m.location[v.location] == kNone; };
  for (std::size_t i = 0; i < visits.size(); ++i) {
    if (!fixed(visits[i])) continue;
    assigned[i] = visits[i].hcp;
    schedule.take(visits[i].hcp, visits[i].start, visits[i].end);
  }

  RewiredGraph out;
  auto engine = rng::stream(seed, rng::domain::kRewire);
  std::vector<std::size_t> free_hcps;
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const auto& v = visits[i];
    if (fixed(v)) continue;
    const std::size_t bubble = m.location[v.location];
    if (options.keep_same_bubble_hcp && m.hcp[v.hcp] == bubble && schedule.free(v.hcp, v.start, v.end)) {
      assigned[i] = v.hcp;
    } else {
      free_hcps.clear();
      for (auto p : pool[static_cast<std::size_t>(hcps.type(v.hcp).group)][bubble]) {
        if (schedule.free(p, v.start, v.end)) free_hcps.push_back(p);
      }
      if (free_hcps.empty()) {
        out.dropped.push_back(i);
        continue;
      }
      assigned[i] = free_hcps[rng::below(engine, free_hcps.size())];
    }
    schedule.take(assigned[i], v.start, v.end);
  }

  std::vector<Visit> kept;
  for (std::size_t i = 0; i < visits.size(); ++i) {
    if (assigned[i] == kNone) continue;
    Visit v = visits[i];
    v.hcp = static_cast<std::uint32_t>(assigned[i]);
    kept.push_back(v);
    out.source.push_back(i);
  }
  // Source visits are sorted by start, so the stable sort in create() keeps `source` aligned.
  out.graph = VisitGraph::create(g.hcps(), g.locations(), std::move(kept));
  return out;
}

BubbleClustering random_clustering(const HcpRoster& roster, const LocationRoster& locs, std::size_t k,
                                   std::uint64_t seed, const WeightMatrix* weights) {
  std::vector<LocationId> ids;
  for (auto l : locs.substitutable_locations()) ids.push_back(locs.id(l));
  std::sort(ids.begin(), ids.end());
  check_k(k, ids.size(), roster);

  auto engine = rng::stream(seed, rng::domain::kRandomClustering);
  // Shuffling a balanced label multiset is uniform over balanced labelled partitions.
  auto labels = [&](std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i % k;
    for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[rng::below(engine, i)]);
    return out;
  };

  BubbleClustering c;
  c.k = k;
  const auto lb = labels(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) c.location_bubble[ids[i]] = lb[i];
  for (std::size_t g = 0; g < roster.group_count(); ++g) {
    const auto& members = roster.group_members(g);
    const auto hb = labels(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) c.hcp_bubble[roster.id(members[i])] = hb[i];
  }
  c = canonicalize(std::move(c));
  if (weights) c.objective_value = cut_weight(c, *weights);
  return c;
}

std::vector<double> footsteps_per_day(const VisitGraph& g, const DistanceMatrix& dist, std::int64_t days) {
  const auto& locs = g.locations();
  std::vector<std::optional<std::size_t>> row(locs.size());
  for (std::size_t l = 0; l < locs.size(); ++l) {
    if (dist.contains(locs.id(l))) row[l] = dist.index(locs.id(l));
  }
  std::vector<double> meters(g.hcps().size(), 0.0);
  std::vector<std::size_t> last(g.hcps().size(), kNone);
  for (const auto& v : g.visits()) {
    const std::size_t prev = last[v.hcp];
    last[v.hcp] = v.location;
    if (prev == kNone || !row[prev] || !row[v.location]) continue;
    meters[v.hcp] += dist.at(*row[prev], *row[v.location]);
  }
  for (auto& x : meters) x /= static_cast<double>(days);
  return meters;
}

CostReport compute_costs(const VisitGraph& g, const RewiredGraph& gr, const BubbleClustering& c,
                         const DistanceMatrix& dist) {
  const auto& hcps = g.hcps();
  const auto& locs = g.locations();
  // Both graphs are normalised by the source horizon; dropped visits must not shorten it.
  const std::int64_t days = g.day_count();
  auto a = compute_loads_demands(g);
  auto b = compute_loads_demands(gr.graph);
  const auto load_g = per_day(a.load_seconds, days);
  const auto load_r = per_day(b.load_seconds, days);
  const auto dem_g = per_day(a.demand_seconds, days);
  const auto dem_r = per_day(b.demand_seconds, days);
  const auto steps_g = footsteps_per_day(g, dist, days);
  const auto steps_r = footsteps_per_day(gr.graph, dist, days);

  CostReport r;
  for (std::size_t p = 0; p < hcps.size(); ++p) {
    const auto& id = hcps.id(p);
    r.load[id] = load_r[p];
    r.excess_load[id] = std::max(0.0, load_r[p] - load_g[p]);
    r.footsteps[id] = steps_r[p];
    r.excess_footsteps[id] = std::max(0.0, steps_r[p] - steps_g[p]);
  }
  for (auto l : locs.substitutable_locations()) {
    r.demand[locs.id(l)] = dem_g[l];
    r.unmet_demand[locs.id(l)] = std::max(0.0, dem_g[l] - dem_r[l]);
  }
  const auto diam = bubble_diameters(c, dist);
  for (std::size_t k = 0; k < diam.size(); ++k) r.bubble_diameters[k] = diam[k];
  return r;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  auto v = values;
  std::sort(v.begin(), v.end());
  s.total = std::accumulate(v.begin(), v.end(), 0.0);
  s.mean = s.total / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  s.max = v.back();
  return s;
}

void write_cost_report(const CostReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  using csv::format_double;
  {
    auto os = csv::open_for_write(dir / "hcp_costs.csv");
    os << "hcp_id,load_h_per_day,excess_load_h_per_day,footsteps_m_per_day,excess_footsteps_m_per_day\n";
    for (const auto& [id, load] : r.load) {
      os << id.str() << ',' << format_double(load) << ',' << format_double(r.excess_load.at(id)) << ','
         << format_double(r.footsteps.at(id)) << ',' << format_double(r.excess_footsteps.at(id)) << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "location_costs.csv");
    os << "location_id,demand_h_per_day,unmet_demand_h_per_day\n";
    for (const auto& [id, d] : r.demand) {
      os << id.str() << ',' << format_double(d) << ',' << format_double(r.unmet_demand.at(id)) << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "bubble_costs.csv");
    os << "bubble,diameter_m\n";
    for (const auto& [b, d] : r.bubble_diameters) os << b + 1 << ',' << format_double(d) << '\n';
  }
  auto values = [](const auto& map) {
    std::vector<double> v;
    for (const auto& [k, x] : map) v.push_back(x);
    return v;
  };
  auto block = [](const MetricSummary& s) {
    return nlohmann::ordered_json{{"mean", s.mean}, {"median", s.median}, {"max", s.max}, {"total", s.total}};
  };
  nlohmann::ordered_json j;
  j["excess_load_h_per_day"] = block(summarize(values(r.excess_load)));
  j["unmet_demand_h_per_day"] = block(summarize(values(r.unmet_demand)));
  j["footsteps_m_per_day"] = block(summarize(values(r.footsteps)));
  j["excess_footsteps_m_per_day"] = block(summarize(values(r.excess_footsteps)));
  j["bubble_diameter_m"] = block(summarize(values(r.bubble_diameters)));
  csv::open_for_write(dir / "costs_summary.json") << j.dump(2) << '\n';
}

}  // namespace corn
