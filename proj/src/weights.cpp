#include "corn/weights.hpp"

#include <algorithm>
#include <cmath>

#include "corn/csv.hpp"
#include "corn/parallel.hpp"
#include "corn/rng.hpp"

namespace corn {

WeightMatrix::WeightMatrix(std::vector<LocationId> locations, double z) : locations_(std::move(locations)), z_(z) {
  std::sort(locations_.begin(), locations_.end());
}

void WeightMatrix::set(const LocationId& a, const LocationId& b, double w) {
  if (a == b) throw ValidationError("self-pair weight for '" + a.str() + "'");
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  if (w == 0.0) {
    entries_.erase(key);
  } else {
    entries_[key] = w;
  }
}

double WeightMatrix::get(const LocationId& a, const LocationId& b) const {
  auto it = entries_.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  return it == entries_.end() ? 0.0 : it->second;
}

double chain_probability(const std::vector<bool>& sequence, double z) {
  const double q = 1.0 - z;
  std::size_t to_total = std::count(sequence.begin(), sequence.end(), false);
  std::size_t pre = 0;
  std::size_t to_seen = 0;
  double p = 0.0;
  for (bool at_from : sequence) {
    if (at_from) {
      const auto suf = static_cast<double>(to_total - to_seen);
      p += std::pow(q, static_cast<double>(pre)) * z * (1.0 - std::pow(q, suf));
      ++pre;
    } else {
      ++to_seen;
    }
  }
  return p;
}

namespace {

bool in_scope(const VisitGraph& g, std::size_t hcp, HcpScope scope) {
  return scope == HcpScope::All || !g.hcps().type(hcp).substitutable();
}

void require_uniform(const VisitGraph& g) {
  if (g.chop_unit()) return;
  const auto& v = g.visits();
  for (const auto& x : v) {
    if (x.duration() != v.front().duration()) {
      throw NotChoppedError("visit intervals have non-uniform lengths; chop the graph first");
    }
  }
}

// Per in-scope HCP: time-ordered sequence restricted to `from`/`to` visits (true = from).
std::vector<std::vector<bool>> pair_sequences(const VisitGraph& g, std::size_t from, std::size_t to, HcpScope scope) {
  std::vector<std::vector<bool>> seq(g.hcps().size());
  for (const auto& v : g.visits()) {
    if ((v.location == from || v.location == to) && in_scope(g, v.hcp, scope)) seq[v.hcp].push_back(v.location == from);
  }
  return seq;
}

}  // namespace

double directed_weight(const VisitGraph& g, const LocationId& from, const LocationId& to, double z, HcpScope scope) {
  require_uniform(g);
  const auto a = g.locations().index(from);
  const auto b = g.locations().index(to);
  if (a == b) throw ValidationError("directed_weight needs two distinct locations");
  double miss = 1.0;
  for (const auto& s : pair_sequences(g, a, b, scope)) {
    if (!s.empty()) miss *= 1.0 - chain_probability(s, z);
  }
  return 1.0 - miss;
}

WeightMatrix weight_matrix(const VisitGraph& g, double z, std::int64_t unit, HcpScope scope) {
  const auto chopped = chop_intervals(g, unit);
  const auto& locs = chopped.locations();
  const auto& subs = locs.substitutable_locations();
  const std::size_t n = subs.size();
  std::vector<std::size_t> slot(locs.size(), n);
  for (std::size_t i = 0; i < n; ++i) slot[subs[i]] = i;

  // positions[h][i]: ordinals (within h's substitutable-visit sequence) of h's visits to location i.
  std::vector<std::vector<std::vector<std::uint32_t>>> positions(chopped.hcps().size());
  std::vector<std::uint32_t> ordinal(chopped.hcps().size(), 0);
  std::size_t max_count = 0;
  for (const auto& v : chopped.visits()) {
    if (slot[v.location] == n || !in_scope(chopped, v.hcp, scope)) continue;
    auto& per = positions[v.hcp];
    if (per.empty()) per.resize(n);
    per[slot[v.location]].push_back(ordinal[v.hcp]++);
    max_count = std::max(max_count, per[slot[v.location]].size());
  }
  const double q = 1.0 - z;
  std::vector<double> qpow(max_count + 1, 1.0);
  for (std::size_t k = 1; k <= max_count; ++k) qpow[k] = qpow[k - 1] * q;

  // miss[a * n + b]: product over HCPs of (1 - Pr[a -> b via h]).
  std::vector<double> miss(n * n, 1.0);
  parallel_for(n, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double miss_ab = 1.0;
      double miss_ba = 1.0;
      for (const auto& per : positions) {
        if (per.empty() || per[a].empty() || per[b].empty()) continue;
        const auto& pa = per[a];
        const auto& pb = per[b];
        // a -> b: each a-visit i with i earlier a-visits and (|pb| - b-visits before it) later b-visits.
        double p_ab = 0.0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < pa.size(); ++i) {
          while (j < pb.size() && pb[j] < pa[i]) ++j;
          p_ab += qpow[i] * z * (1.0 - qpow[pb.size() - j]);
        }
        double p_ba = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < pb.size(); ++i) {
          while (k < pa.size() && pa[k] < pb[i]) ++k;
          p_ba += qpow[i] * z * (1.0 - qpow[pa.size() - k]);
        }
        miss_ab *= 1.0 - p_ab;
        miss_ba *= 1.0 - p_ba;
      }
      miss[a * n + b] = miss_ab;
      miss[b * n + a] = miss_ba;
    }
  });

  std::vector<LocationId> ids;
  for (auto l : subs) ids.push_back(locs.id(l));
  WeightMatrix w(ids, z);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double value = ((1.0 - miss[a * n + b]) + (1.0 - miss[b * n + a])) / 2.0;
      if (value > 0.0) w.set(locs.id(subs[a]), locs.id(subs[b]), value);
    }
  }
  return w;
}

double mc_directed_weight(const VisitGraph& g, const LocationId& from, const LocationId& to, double z,
                          std::uint64_t samples, std::uint64_t seed, HcpScope scope) {
  require_uniform(g);
  const auto a = g.locations().index(from);
  const auto b = g.locations().index(to);
  std::vector<std::vector<bool>> seqs;
  for (auto& s : pair_sequences(g, a, b, scope)) {
    if (!s.empty()) seqs.push_back(std::move(s));
  }
  if (z <= 0.0 || seqs.empty()) return 0.0;
  auto engine = rng::stream(seed, rng::domain::kMonteCarloWeight);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    bool reached = false;
    for (const auto& seq : seqs) {
      bool carrier = false;
      for (bool at_from : seq) {
        if (at_from) {
          if (!carrier && rng::uniform01(engine) < z) carrier = true;
        } else if (carrier && rng::uniform01(engine) < z) {
          reached = true;
          break;
        }
      }
      if (reached) break;
    }
    hits += reached ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

void write_weights_csv(const WeightMatrix& w, const std::filesystem::path& path) {
  auto out = csv::open_for_write(path);
  out << "loc_a,loc_b,weight\n";
  for (const auto& [key, value] : w.entries()) {
    out << key.first.str() << ',' << key.second.str() << ',' << csv::format_double(value) << '\n';
  }
}

WeightMatrix load_weights_csv(const std::filesystem::path& path, const LocationRoster& locations, double z) {
  std::vector<LocationId> ids;
  for (auto l : locations.substitutable_locations()) ids.push_back(locations.id(l));
  WeightMatrix w(ids, z);
  csv::read(path, "loc_a,loc_b,weight", [&](const std::vector<std::string>& f, std::size_t line) {
    if (f.size() != 3) throw ParseError("expected 'loc_a,loc_b,weight'", line);
    for (const auto& id : {f[0], f[1]}) {
      auto l = locations.find(LocationId(id));
      if (!l || !locations.substitutable(*l)) throw ParseError("'" + id + "' is not a substitutable location", line);
    }
    const double value = csv::parse_double(f[2], line);
    if (!(value >= 0.0 && value <= 1.0)) throw ParseError("weight outside [0, 1]", line);
    w.set(LocationId(f[0]), LocationId(f[1]), value);
  });
  return w;
}

}  // namespace corn
