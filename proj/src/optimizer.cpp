#include "corn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corn/csv.hpp"

namespace corn {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// A lower-bound row is added only when the ceilings do not already force it.
bool needs_floor_rows(std::size_t n, std::size_t k) {
  const std::size_t hi = ceil_div(n, k);
  const std::size_t lo = n / k;
  return n < (k - 1) * hi + lo;
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out.empty() ? "_" : out;
}

// Sanitized names, disambiguated with a numeric suffix on collision.
template <class Id>
std::vector<std::string> model_names(const std::vector<Id>& ids) {
  std::vector<std::string> out;
  std::set<std::string> used;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::string name = sanitize(ids[i].str());
    if (!used.insert(name).second) {
      name += "_" + std::to_string(i);
      used.insert(name);
    }
    out.push_back(name);
  }
  return out;
}

}  // namespace

void check_k(std::size_t k, std::size_t n, const HcpRoster& roster) {
  if (k < 1) throw InvalidK("K must be at least 1");
  if (k > n) throw InvalidK("K=" + std::to_string(k) + " exceeds the " + std::to_string(n) + " substitutable locations");
  for (std::size_t g = 0; g < roster.group_count(); ++g) {
    if (k > roster.group_members(g).size()) {
      throw InvalidK("K=" + std::to_string(k) + " exceeds the size of HCP group '" + roster.group_label(g) + "'");
    }
  }
}

std::string to_string(SolveOutcome::Status s) {
  switch (s) {
    case SolveOutcome::Status::Optimal:
      return "Optimal";
    case SolveOutcome::Status::Infeasible:
      return "Infeasible";
    case SolveOutcome::Status::TimedOut:
      return "TimedOut";
  }
  return "?";
}

IlpModel build_model(const WeightMatrix& weights, const DistanceMatrix& dist, const LoadDemandTable& ld,
                     const HcpRoster& roster, const LocationRoster& locs, std::size_t k, double d_star,
                     double y_star) {
  IlpModel m;
  m.k = k;
  m.d_star = d_star;
  m.y_star = y_star;
  std::vector<std::size_t> loc_index;
  for (auto l : locs.substitutable_locations()) m.locations.push_back(locs.id(l));
  std::sort(m.locations.begin(), m.locations.end());
  for (const auto& id : m.locations) loc_index.push_back(locs.index(id));
  check_k(k, m.locations.size(), roster);
  if (std::isnan(d_star) || d_star < 0.0 || std::isnan(y_star)) throw ValidationError("D* must be >= 0 and Y* a number");

  std::vector<std::size_t> hcp_index;
  for (std::size_t p = 0; p < roster.size(); ++p) {
    if (roster.type(p).substitutable()) m.hcps.push_back(roster.id(p));
  }
  std::sort(m.hcps.begin(), m.hcps.end());
  for (const auto& id : m.hcps) {
    hcp_index.push_back(roster.index(id));
    m.hcp_group.push_back(roster.type(hcp_index.back()).group);
  }
  for (std::size_t g = 0; g < roster.group_count(); ++g) m.group_labels.push_back(roster.group_label(g));

  const std::size_t n = m.locations.size();
  m.weight.assign(n * n, 0.0);
  m.dist.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double w = weights.get(m.locations[a], m.locations[b]);
      double d = 0.0;
      if (dist.contains(m.locations[a]) && dist.contains(m.locations[b])) {
        d = dist(m.locations[a], m.locations[b]);
      } else if (std::isfinite(d_star)) {
        throw ValidationError("no distance between '" + m.locations[a].str() + "' and '" + m.locations[b].str() + "'");
      }
      m.weight[a * n + b] = m.weight[b * n + a] = w;
      m.dist[a * n + b] = m.dist[b * n + a] = d;
      if (w > 0.0 || d > d_star) m.e_pairs.emplace_back(a, b);
    }
  }
  m.group_demand.assign(roster.group_count(), std::vector<double>(n, 0.0));
  for (std::size_t g = 0; g < roster.group_count(); ++g) {
    for (std::size_t a = 0; a < n; ++a) {
      if (g < ld.group_demand.size()) m.group_demand[g][a] = ld.group_demand[g].at(loc_index[a]);
    }
  }
  for (auto p : hcp_index) m.hcp_load.push_back(p < ld.room_load.size() ? ld.room_load[p] : 0.0);

  const auto loc_names = model_names(m.locations);
  const auto hcp_names = model_names(m.hcps);
  for (auto [a, b] : m.e_pairs) {
    m.variables.push_back({IlpVariable::Kind::E, "e_" + loc_names[a] + "_" + loc_names[b], m.w(a, b)});
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      m.variables.push_back({IlpVariable::Kind::X, "x_" + loc_names[a] + "_" + std::to_string(b + 1), 0.0});
    }
  }
  for (std::size_t p = 0; p < m.hcps.size(); ++p) {
    for (std::size_t b = 0; b < k; ++b) {
      m.variables.push_back({IlpVariable::Kind::Z, "z_" + hcp_names[p] + "_" + std::to_string(b + 1), 0.0});
    }
  }

  auto add = [&](std::string tag, std::string name, std::vector<LinearTerm> terms, RowSense sense, double rhs) {
    m.constraints.push_back({std::move(tag), std::move(name), std::move(terms), sense, rhs});
  };
  for (const char* tag : {"connect1", "connect2"}) {
    const double sx = std::string(tag) == "connect1" ? -1.0 : 1.0;
    for (std::size_t e = 0; e < m.e_pairs.size(); ++e) {
      auto [a, b] = m.e_pairs[e];
      for (std::size_t c = 0; c < k; ++c) {
        add(tag, std::string(tag) + "_" + loc_names[a] + "_" + loc_names[b] + "_" + std::to_string(c + 1),
            {{e, 1.0}, {m.x_var(a, c), sx}, {m.x_var(b, c), -sx}}, RowSense::Ge, 0.0);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<LinearTerm> terms;
    for (std::size_t c = 0; c < k; ++c) terms.push_back({m.x_var(a, c), 1.0});
    add("oneBubble", "oneBubble_" + loc_names[a], std::move(terms), RowSense::Eq, 1.0);
  }
  auto size_rows = [&](const std::string& tag, const std::vector<std::size_t>& vars_of_bubble_0, std::size_t count,
                       const std::string& what, auto var_of) {
    const bool floors = needs_floor_rows(count, k);
    for (int pass = 0; pass < (floors ? 2 : 1); ++pass) {
      for (std::size_t c = 0; c < k; ++c) {
        std::vector<LinearTerm> terms;
        for (auto v : vars_of_bubble_0) terms.push_back({var_of(v, c), 1.0});
        if (pass == 0) {
          add(tag, tag + "_" + what + std::to_string(c + 1), std::move(terms), RowSense::Le,
              static_cast<double>(ceil_div(count, k)));
        } else {
          add(tag, tag + "_min_" + what + std::to_string(c + 1), std::move(terms), RowSense::Ge,
              static_cast<double>(count / k));
        }
      }
    }
  };
  std::vector<std::size_t> all_locs(n);
  for (std::size_t a = 0; a < n; ++a) all_locs[a] = a;
  size_rows("equalSizes", all_locs, n, "", [&](std::size_t a, std::size_t c) { return m.x_var(a, c); });
  if (std::isfinite(d_star)) {
    for (std::size_t e = 0; e < m.e_pairs.size(); ++e) {
      auto [a, b] = m.e_pairs[e];
      const double d = m.d(a, b);
      add("diameter", "diameter_" + loc_names[a] + "_" + loc_names[b], {{e, d}}, RowSense::Ge, d - d_star);
    }
    // The row above only forces e = 1; these keep a far pair out of every common bubble.
    for (auto [a, b] : m.e_pairs) {
      if (m.d(a, b) <= d_star) continue;
      for (std::size_t c = 0; c < k; ++c) {
        add("diameter", "diameter_" + loc_names[a] + "_" + loc_names[b] + "_" + std::to_string(c + 1),
            {{m.x_var(a, c), 1.0}, {m.x_var(b, c), 1.0}}, RowSense::Le, 1.0);
      }
    }
  }
  for (std::size_t g = 0; g < m.group_labels.size(); ++g) {
    std::vector<std::size_t> members;
    for (std::size_t p = 0; p < m.hcps.size(); ++p) {
      if (m.hcp_group[p] == static_cast<int>(g)) members.push_back(p);
    }
    size_rows("hcpEqual", members, members.size(), sanitize(m.group_labels[g]) + "_",
              [&](std::size_t p, std::size_t c) { return m.z_var(p, c); });
  }
  for (std::size_t p = 0; p < m.hcps.size(); ++p) {
    std::vector<LinearTerm> terms;
    for (std::size_t c = 0; c < k; ++c) terms.push_back({m.z_var(p, c), 1.0});
    add("hcpExactlyOne", "hcpExactlyOne_" + hcp_names[p], std::move(terms), RowSense::Eq, 1.0);
  }
  if (std::isfinite(y_star)) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t g = 0; g < m.group_labels.size(); ++g) {
        std::vector<LinearTerm> terms;
        for (std::size_t a = 0; a < n; ++a) {
          if (m.group_demand[g][a] != 0.0) terms.push_back({m.x_var(a, c), m.group_demand[g][a]});
        }
        for (std::size_t p = 0; p < m.hcps.size(); ++p) {
          if (m.hcp_group[p] == static_cast<int>(g) && m.hcp_load[p] != 0.0) {
            terms.push_back({m.z_var(p, c), -m.hcp_load[p]});
          }
        }
        add("boundLoad", "boundLoad_" + std::to_string(c + 1) + "_" + sanitize(m.group_labels[g]), std::move(terms),
            RowSense::Le, y_star);
      }
    }
  }
  return m;
}

ModelCounts count_vars_constraints(const IlpModel& m) { return {m.variables.size(), m.constraints.size()}; }

ModelCounts closed_form_counts(std::size_t n_locations, const std::vector<std::size_t>& group_sizes,
                               std::size_t e_vars, std::size_t k, bool finite_d_star, bool finite_y_star,
                               std::size_t far_pairs) {
  std::size_t hcps = 0;
  std::size_t hcp_rows = 0;
  for (auto s : group_sizes) {
    hcps += s;
    hcp_rows += k * (needs_floor_rows(s, k) ? 2 : 1);
  }
  ModelCounts c;
  c.variables = e_vars + n_locations * k + hcps * k;
  c.constraints = 2 * e_vars * k + n_locations + k * (needs_floor_rows(n_locations, k) ? 2 : 1) +
                  (finite_d_star ? e_vars + far_pairs * k : 0) + hcp_rows + hcps + (finite_y_star ? k * group_sizes.size() : 0);
  return c;
}

std::size_t far_pairs(const IlpModel& m) {
  std::size_t count = 0;
  for (auto [a, b] : m.e_pairs) count += m.d(a, b) > m.d_star;
  return count;
}

double cut_weight(const BubbleClustering& c, const WeightMatrix& weights) {
  double total = 0.0;
  for (const auto& [pair, w] : weights.entries()) {
    auto a = c.location_bubble.find(pair.first);
    auto b = c.location_bubble.find(pair.second);
    if (a != c.location_bubble.end() && b != c.location_bubble.end() && a->second != b->second) total += w;
  }
  return total;
}

BubbleClustering canonicalize(BubbleClustering c) {
  std::vector<std::size_t> relabel(c.k, c.k);
  std::size_t next = 0;
  for (const auto& [loc, b] : c.location_bubble) {  // map iterates in id order
    if (b < c.k && relabel[b] == c.k) relabel[b] = next++;
  }
  for (auto& r : relabel) {
    if (r == c.k) r = next++;
  }
  for (auto& [loc, b] : c.location_bubble) b = relabel.at(b);
  for (auto& [hcp, b] : c.hcp_bubble) b = relabel.at(b);
  return c;
}

std::vector<double> bubble_diameters(const BubbleClustering& c, const DistanceMatrix& dist) {
  std::vector<std::vector<LocationId>> members(c.k);
  for (const auto& [loc, b] : c.location_bubble) members.at(b).push_back(loc);
  std::vector<double> out(c.k, 0.0);
  for (std::size_t b = 0; b < c.k; ++b) {
    for (std::size_t i = 0; i < members[b].size(); ++i) {
      for (std::size_t j = i + 1; j < members[b].size(); ++j) {
        out[b] = std::max(out[b], dist(members[b][i], members[b][j]));
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> load_gaps(const BubbleClustering& c, const LoadDemandTable& ld,
                                           const HcpRoster& roster, const LocationRoster& locs) {
  std::vector<std::vector<double>> gap(c.k, std::vector<double>(roster.group_count(), 0.0));
  for (const auto& [loc, b] : c.location_bubble) {
    const auto l = locs.index(loc);
    for (std::size_t g = 0; g < roster.group_count(); ++g) gap.at(b)[g] += ld.group_demand[g][l];
  }
  for (const auto& [hcp, b] : c.hcp_bubble) {
    const auto p = roster.index(hcp);
    const int g = roster.type(p).group;
    if (g >= 0) gap.at(b)[g] -= ld.room_load[p];
  }
  return gap;
}

std::vector<std::string> verify_clustering(const BubbleClustering& c, const DistanceMatrix& dist,
                                           const LoadDemandTable& ld, const HcpRoster& roster,
                                           const LocationRoster& locs, double d_star, double y_star, double tol) {
  std::vector<std::string> out;
  const std::size_t k = c.k;
  std::vector<std::size_t> loc_count(k, 0);
  for (const auto& [loc, b] : c.location_bubble) {
    auto l = locs.find(loc);
    if (!l) {
      out.push_back("unknown location '" + loc.str() + "'");
    } else if (!locs.substitutable(*l)) {
      out.push_back("non-substitutable location '" + loc.str() + "' is assigned");
    }
    if (b >= k) {
      out.push_back("location '" + loc.str() + "' has bubble index out of range");
    } else {
      ++loc_count[b];
    }
  }
  for (auto l : locs.substitutable_locations()) {
    if (!c.location_bubble.count(locs.id(l))) out.push_back("location '" + locs.id(l).str() + "' is unassigned");
  }
  const std::size_t n = locs.substitutable_locations().size();
  for (std::size_t b = 0; b < k; ++b) {
    if (loc_count[b] > ceil_div(n, k) || loc_count[b] < n / k || loc_count[b] == 0) {
      out.push_back("bubble " + std::to_string(b + 1) + " has " + std::to_string(loc_count[b]) + " locations");
    }
  }
  std::vector<std::vector<std::size_t>> hcp_count(roster.group_count(), std::vector<std::size_t>(k, 0));
  for (const auto& [hcp, b] : c.hcp_bubble) {
    auto p = roster.find(hcp);
    if (!p) {
      out.push_back("unknown HCP '" + hcp.str() + "'");
      continue;
    }
    if (!roster.type(*p).substitutable()) {
      out.push_back("non-substitutable HCP '" + hcp.str() + "' is assigned");
      continue;
    }
    if (b >= k) {
      out.push_back("HCP '" + hcp.str() + "' has bubble index out of range");
      continue;
    }
    ++hcp_count[roster.type(*p).group][b];
  }
  for (std::size_t g = 0; g < roster.group_count(); ++g) {
    for (auto p : roster.group_members(g)) {
      if (!c.hcp_bubble.count(roster.id(p))) out.push_back("HCP '" + roster.id(p).str() + "' is unassigned");
    }
    const std::size_t size = roster.group_members(g).size();
    for (std::size_t b = 0; b < k; ++b) {
      if (hcp_count[g][b] > ceil_div(size, k) || hcp_count[g][b] < size / k) {
        out.push_back("bubble " + std::to_string(b + 1) + " has " + std::to_string(hcp_count[g][b]) +
                      " HCPs of group '" + roster.group_label(g) + "'");
      }
    }
  }
  if (!out.empty()) return out;
  if (std::isfinite(d_star)) {
    const auto diam = bubble_diameters(c, dist);
    for (std::size_t b = 0; b < k; ++b) {
      if (diam[b] > d_star + tol) {
        out.push_back("bubble " + std::to_string(b + 1) + " diameter " + csv::format_double(diam[b]) + " exceeds D*");
      }
    }
  }
  if (std::isfinite(y_star)) {
    const auto gaps = load_gaps(c, ld, roster, locs);
    for (std::size_t b = 0; b < k; ++b) {
      for (std::size_t g = 0; g < roster.group_count(); ++g) {
        if (gaps[b][g] > y_star + tol) {
          out.push_back("bubble " + std::to_string(b + 1) + " group '" + roster.group_label(g) + "' load gap " +
                        csv::format_double(gaps[b][g]) + " exceeds Y*");
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Brute force

namespace {

struct BruteGroup {
  std::vector<double> loads;
  std::size_t lo = 0, hi = 0;
};

// Tries every labelled assignment of the group's HCPs; returns one with all gaps <= y_star.
std::optional<std::vector<std::size_t>> brute_group(const BruteGroup& grp, const std::vector<double>& demand,
                                                    std::size_t k, double y_star) {
  const std::size_t m = grp.loads.size();
  std::vector<std::size_t> assign(m, 0);
  while (true) {
    std::vector<std::size_t> count(k, 0);
    std::vector<double> load(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      ++count[assign[i]];
      load[assign[i]] += grp.loads[i];
    }
    bool ok = true;
    for (std::size_t b = 0; b < k && ok; ++b) {
      ok = count[b] >= grp.lo && count[b] <= grp.hi && (!std::isfinite(y_star) || demand[b] - load[b] <= y_star + 1e-9);
    }
    if (ok) return assign;
    std::size_t i = 0;
    while (i < m && ++assign[i] == k) assign[i++] = 0;
    if (i == m) return std::nullopt;
  }
}

}  // namespace

SolveOutcome brute_force_solve(const WeightMatrix& weights, const DistanceMatrix& dist, const LoadDemandTable& ld,
                               const HcpRoster& roster, const LocationRoster& locs, std::size_t k, double d_star,
                               double y_star) {
  std::vector<LocationId> ids;
  for (auto l : locs.substitutable_locations()) ids.push_back(locs.id(l));
  std::sort(ids.begin(), ids.end());
  const std::size_t n = ids.size();
  if (n > 10) throw TooLarge("brute force is limited to 10 substitutable locations");
  check_k(k, n, roster);
  std::vector<BruteGroup> groups(roster.group_count());
  double combos = 1.0;
  for (std::size_t g = 0; g < roster.group_count(); ++g) {
    for (auto p : roster.group_members(g)) groups[g].loads.push_back(ld.room_load[p]);
    groups[g].lo = groups[g].loads.size() / k;
    groups[g].hi = ceil_div(groups[g].loads.size(), k);
    combos = std::max(combos, std::pow(static_cast<double>(k), static_cast<double>(groups[g].loads.size())));
  }
  if (combos > 2e6) throw TooLarge("brute force HCP enumeration too large");

  const std::size_t lo = n / k;
  const std::size_t hi = ceil_div(n, k);
  SolveOutcome out;
  out.status = SolveOutcome::Status::Infeasible;
  double best = kUnbounded;
  // Restricted growth strings enumerate each unlabelled partition exactly once.
  std::vector<std::size_t> a(n, 0);
  std::vector<std::size_t> size(k, 0);
  auto evaluate = [&] {
    for (std::size_t b = 0; b < k; ++b) {
      if (size[b] < lo || size[b] > hi) return;
    }
    double cut = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a[i] == a[j]) {
          if (std::isfinite(d_star) && dist(ids[i], ids[j]) > d_star) return;
        } else {
          cut += weights.get(ids[i], ids[j]);
        }
      }
    }
    if (cut >= best) return;
    std::vector<std::vector<std::size_t>> hcp_assign;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<double> demand(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) demand[a[i]] += ld.group_demand[g][locs.index(ids[i])];
      auto found = brute_group(groups[g], demand, k, y_star);
      if (!found) return;
      hcp_assign.push_back(*found);
    }
    best = cut;
    BubbleClustering c;
    c.k = k;
    for (std::size_t i = 0; i < n; ++i) c.location_bubble[ids[i]] = a[i];
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& members = roster.group_members(g);
      for (std::size_t i = 0; i < members.size(); ++i) c.hcp_bubble[roster.id(members[i])] = hcp_assign[g][i];
    }
    c.objective_value = cut;
    out.status = SolveOutcome::Status::Optimal;
    out.clustering = canonicalize(std::move(c));
    out.bound = cut;
  };
  auto recurse = [&](auto& self, std::size_t i, std::size_t blocks) -> void {
    if (i == n) {
      if (blocks == k) evaluate();
      return;
    }
    for (std::size_t b = 0; b <= std::min(blocks, k - 1); ++b) {
      a[i] = b;
      ++size[b];
      self(self, i + 1, std::max(blocks, b + 1));
      --size[b];
    }
  };
  recurse(recurse, 0, 0);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Export

namespace {

void write_terms(std::ostringstream& os, const std::vector<std::pair<double, std::string>>& terms) {
  std::size_t on_line = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& [coef, name] = terms[i];
    if (on_line == 8) {
      os << "\n   ";
      on_line = 0;
    }
    const bool neg = coef < 0.0;
    if (i > 0 || neg) os << (neg ? " - " : " + ");
    const double mag = std::abs(coef);
    if (mag != 1.0) os << csv::format_double(mag) << ' ';
    os << name;
    ++on_line;
  }
}

std::string export_lp(const IlpModel& m) {
  std::ostringstream os;
  os << "\\ bubble clustering, K=" << m.k << "\nMinimize\n obj:";
  std::vector<std::pair<double, std::string>> obj;
  for (const auto& v : m.variables) {
    if (v.objective != 0.0) obj.emplace_back(v.objective, v.name);
  }
  if (!obj.empty()) {
    os << ' ';
    write_terms(os, obj);
  }
  os << "\nSubject To\n";
  for (const auto& c : m.constraints) {
    std::vector<std::pair<double, std::string>> terms;
    for (const auto& t : c.terms) terms.emplace_back(t.coef, m.variables[t.var].name);
    os << ' ' << c.name << ": ";
    if (terms.empty()) {
      os << "0 " << m.variables.front().name;
    } else {
      write_terms(os, terms);
    }
    os << (c.sense == RowSense::Le ? " <= " : c.sense == RowSense::Ge ? " >= " : " = ") << csv::format_double(c.rhs)
       << '\n';
  }
  os << "Binaries\n";
  for (std::size_t i = 0; i < m.variables.size(); ++i) os << ' ' << m.variables[i].name << '\n';
  os << "End\n";
  return os.str();
}

std::string export_mps(const IlpModel& m) {
  std::ostringstream os;
  os << "NAME bubble_clustering\nROWS\n N obj\n";
  for (const auto& c : m.constraints) {
    os << ' ' << (c.sense == RowSense::Le ? 'L' : c.sense == RowSense::Ge ? 'G' : 'E') << ' ' << c.name << '\n';
  }
  std::vector<std::vector<std::pair<std::string, double>>> columns(m.variables.size());
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    if (m.variables[v].objective != 0.0) columns[v].emplace_back("obj", m.variables[v].objective);
  }
  for (const auto& c : m.constraints) {
    for (const auto& t : c.terms) columns[t.var].emplace_back(c.name, t.coef);
  }
  os << "COLUMNS\n    MARKER MARKER INTORG\n";
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    if (columns[v].empty()) os << "    " << m.variables[v].name << " obj 0\n";
    for (const auto& [row, coef] : columns[v]) {
      os << "    " << m.variables[v].name << ' ' << row << ' ' << csv::format_double(coef) << '\n';
    }
  }
  os << "    MARKER MARKER INTEND\nRHS\n";
  for (const auto& c : m.constraints) {
    if (c.rhs != 0.0) os << "    RHS " << c.name << ' ' << csv::format_double(c.rhs) << '\n';
  }
  os << "BOUNDS\n";
  for (const auto& v : m.variables) os << " BV BND " << v.name << '\n';
  os << "ENDATA\n";
  return os.str();
}

}  // namespace

std::string export_model(const IlpModel& m, ModelFormat format) {
  if (m.variables.empty()) throw ValidationError("model has no variables");
  return format == ModelFormat::Lp ? export_lp(m) : export_mps(m);
}

// ---------------------------------------------------------------------------------------------
// Clustering JSON

void write_clustering_json(const BubbleClustering& c, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["k"] = c.k;
  j["objective"] = c.objective_value ? nlohmann::ordered_json(*c.objective_value) : nlohmann::ordered_json();
  j["locations"] = nlohmann::ordered_json::object();
  for (const auto& [loc, b] : c.location_bubble) j["locations"][loc.str()] = b + 1;
  j["hcps"] = nlohmann::ordered_json::object();
  for (const auto& [hcp, b] : c.hcp_bubble) j["hcps"][hcp.str()] = b + 1;
  auto out = csv::open_for_write(path);
  out << j.dump(1) << '\n';
}

BubbleClustering load_clustering_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    BubbleClustering c;
    c.k = j.at("k").get<std::size_t>();
    if (c.k < 1) throw ParseError("k must be positive");
    if (j.contains("objective") && !j["objective"].is_null()) c.objective_value = j["objective"].get<double>();
    auto bubble = [&](const nlohmann::json& v, const std::string& who) {
      const auto b = v.get<std::size_t>();
      if (b < 1 || b > c.k) throw ParseError("bubble of '" + who + "' outside 1..k");
      return b - 1;
    };
    for (const auto& [loc, b] : j.at("locations").items()) c.location_bubble[LocationId(loc)] = bubble(b, loc);
    for (const auto& [hcp, b] : j.at("hcps").items()) c.hcp_bubble[HcpId(hcp)] = bubble(b, hcp);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace corn
