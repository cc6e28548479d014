// Depth-first branch-and-bound over location-to-bubble assignments.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

#include "corn/lp.hpp"
#include "corn/optimizer.hpp"
#include "corn/rng.hpp"

namespace corn {

namespace {

constexpr double kTol = 1e-12;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

/// Places one HCP group into bubbles so every bubble's gap (demand - load) stays within `limit`.
/// Counts per bubble lie in [lo, hi] with at most `max_hi` bubbles at hi.
class GroupAssigner {
 public:
  GroupAssigner(const std::vector<double>& loads, const std::vector<double>& demand, std::size_t lo, std::size_t hi,
                double limit, bool minimise, std::uint64_t node_cap)
      : loads_(loads), demand_(demand), k_(demand.size()), lo_(lo), hi_(hi), limit_(limit), minimise_(minimise),
        node_cap_(node_cap) {
    max_hi_ = loads.size() - k_ * lo;
    order_.resize(loads.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) { return loads_[a] > loads_[b]; });
    prefix_.assign(order_.size() + 1, 0.0);
    for (std::size_t j = 0; j < order_.size(); ++j) prefix_[j + 1] = prefix_[j] + loads_[order_[j]];
    load_.assign(k_, 0.0);
    count_.assign(k_, 0);
    assign_.assign(loads.size(), 0);
  }

  /// Assignment (by member index) and its largest gap, if one exists within the limit.
  std::optional<std::pair<std::vector<std::size_t>, double>> run() {
    dfs(0, kNone);
    if (!found_) return std::nullopt;
    return std::make_pair(best_, best_gap_);
  }

 private:
  std::size_t slots(std::size_t b) const {
    std::size_t cap = lo_;
    if (hi_ > lo_ && (count_[b] >= hi_ || hi_count_ < max_hi_)) cap = hi_;
    return cap > count_[b] ? cap - count_[b] : 0;
  }

  double top(std::size_t j, std::size_t r) const { return prefix_[std::min(order_.size(), j + r)] - prefix_[j]; }

  bool viable(std::size_t j) const {
    double need_total = 0.0;
    std::size_t short_total = 0;
    for (std::size_t b = 0; b < k_; ++b) {
      const double need = demand_[b] - load_[b] - limit_;
      if (need > top(j, slots(b)) + 1e-9) return false;
      need_total += std::max(0.0, need);
      short_total += count_[b] < lo_ ? lo_ - count_[b] : 0;
    }
    return need_total <= prefix_.back() - prefix_[j] + 1e-9 && short_total <= order_.size() - j;
  }

  void dfs(std::size_t j, std::size_t prev_bubble) {
    if (stop_) return;
    if (++nodes_ > node_cap_ && found_) {
      stop_ = true;
      return;
    }
    if (!viable(j)) return;
    if (j == order_.size()) {
      double gap = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < k_; ++b) gap = std::max(gap, demand_[b] - load_[b]);
      if (gap > limit_ + 1e-9) return;
      found_ = true;
      best_ = assign_;
      best_gap_ = gap;
      if (minimise_) {
        limit_ = gap - 1e-9;
      } else {
        stop_ = true;
      }
      return;
    }
    const std::size_t p = order_[j];
    const bool tied = j > 0 && loads_[order_[j - 1]] == loads_[p];
    std::vector<std::size_t> cand;
    for (std::size_t b = 0; b < k_; ++b) {
      if (tied && b < prev_bubble) continue;
      if (slots(b) == 0) continue;
      bool duplicate = false;
      for (auto c : cand) {
        duplicate = duplicate || (demand_[c] == demand_[b] && load_[c] == load_[b] && count_[c] == count_[b]);
      }
      // Identical bubble states are interchangeable, except where the tie rule pins the index.
      if (duplicate && !tied) continue;
      cand.push_back(b);
    }
    std::stable_sort(cand.begin(), cand.end(),
                     [&](auto a, auto b) { return demand_[a] - load_[a] > demand_[b] - load_[b]; });
    for (auto b : cand) {
      const bool to_hi = hi_ > lo_ && count_[b] + 1 == hi_;
      load_[b] += loads_[p];
      ++count_[b];
      hi_count_ += to_hi;
      assign_[p] = b;
      dfs(j + 1, b);
      hi_count_ -= to_hi;
      --count_[b];
      load_[b] -= loads_[p];
      if (stop_) return;
    }
  }

  const std::vector<double>& loads_;
  const std::vector<double>& demand_;
  std::size_t k_, lo_, hi_, max_hi_ = 0;
  double limit_;
  bool minimise_;
  std::uint64_t node_cap_;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> order_;
  std::vector<double> prefix_;
  std::vector<double> load_;
  std::vector<std::size_t> count_;
  std::size_t hi_count_ = 0;
  std::vector<std::size_t> assign_;
  std::vector<std::size_t> best_;
  double best_gap_ = 0.0;
  bool found_ = false;
  bool stop_ = false;
};

class BranchAndBound {
 public:
  BranchAndBound(const IlpModel& m, const SolveOptions& opt) : m_(m), opt_(opt) {
    n_ = m.locations.size();
    k_ = m.k;
    lo_ = n_ / k_;
    hi_ = (n_ + k_ - 1) / k_;
    max_hi_ = n_ - k_ * lo_;
    groups_ = m.group_labels.size();
    members_.resize(groups_);
    for (std::size_t p = 0; p < m.hcps.size(); ++p) members_[m.hcp_group[p]].push_back(p);
    group_top_.resize(groups_);
    for (std::size_t g = 0; g < groups_; ++g) {
      std::vector<double> loads;
      for (auto p : members_[g]) loads.push_back(m.hcp_load[p]);
      std::sort(loads.rbegin(), loads.rend());
      const std::size_t cap = (members_[g].size() + k_ - 1) / k_;
      group_top_[g] = std::accumulate(loads.begin(), loads.begin() + std::min(cap, loads.size()), 0.0);
    }
    far_limit_ = m.d_star;
    build_order();
    assign_.assign(n_, kNone);
    size_.assign(k_, 0);
    a_.assign(n_ * k_, 0.0);
    total_.assign(n_, 0.0);
    far_.assign(n_ * k_, 0);
    gdem_.assign(k_ * groups_, 0.0);
  }

  SolveOutcome run() {
    start_ = std::chrono::steady_clock::now();
    SolveOutcome out;
    warm_start();
    root_bound_ = std::max(0.0, bound(0));
    dfs(0);
    out.nodes = nodes_;
    if (best_assign_.empty()) {
      out.status = stopped_ ? SolveOutcome::Status::TimedOut : SolveOutcome::Status::Infeasible;
      out.bound = root_bound_;
      return out;
    }
    out.status = stopped_ ? SolveOutcome::Status::TimedOut : SolveOutcome::Status::Optimal;
    out.clustering = make_clustering(best_assign_);
    out.bound = stopped_ ? std::min(root_bound_, best_cut_) : *out.clustering->objective_value;
    return out;
  }

 private:
  double w(std::size_t a, std::size_t b) const { return m_.weight[a * n_ + b]; }
  bool far(std::size_t a, std::size_t b) const { return m_.dist[a * n_ + b] > far_limit_; }
  bool bounded_load() const { return std::isfinite(m_.y_star) && groups_ > 0; }

  void build_order() {
    std::vector<double> total(n_, 0.0);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = 0; b < n_; ++b) total[a] += a == b ? 0.0 : w(a, b);
    }
    std::vector<double> conn(n_, 0.0);
    std::vector<bool> placed(n_, false);
    for (std::size_t step = 0; step < n_; ++step) {
      std::size_t pick = kNone;
      for (std::size_t u = 0; u < n_; ++u) {
        if (placed[u]) continue;
        if (pick == kNone || conn[u] > conn[pick] || (conn[u] == conn[pick] && total[u] > total[pick])) pick = u;
      }
      placed[pick] = true;
      order_.push_back(pick);
      for (std::size_t u = 0; u < n_; ++u) conn[u] += w(u, pick);
    }
  }

  bool limits_hit() {
    if (stopped_) return true;
    ++nodes_;
    if (opt_.node_limit > 0 && nodes_ > opt_.node_limit) stopped_ = true;
    if (std::isfinite(opt_.time_limit_s) && (nodes_ & 255) == 0) {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start_;
      if (spent.count() > opt_.time_limit_s) stopped_ = true;
    }
    return stopped_;
  }

  // Upper limit on a bubble's final size given how many bubbles already sit at the larger size.
  std::size_t size_cap(std::size_t b) const {
    if (hi_ == lo_) return lo_;
    if (size_[b] >= hi_) return hi_;
    return hi_count_ < max_hi_ ? hi_ : lo_;
  }

  bool can_take(std::size_t u, std::size_t b) const {
    if (size_[b] >= size_cap(b)) return false;
    if (far_[u * k_ + b] != 0) return false;
    if (bounded_load()) {
      for (std::size_t g = 0; g < groups_; ++g) {
        if (gdem_[b * groups_ + g] + m_.group_demand[g][u] - m_.y_star > group_top_[g] + 1e-9) return false;
      }
    }
    return true;
  }

  void place(std::size_t u, std::size_t b) {
    cut_ += total_[u] - a_[u * k_ + b];
    assign_[u] = b;
    if (size_[b] == 0) ++opened_;
    ++size_[b];
    if (hi_ > lo_ && size_[b] == hi_) ++hi_count_;
    for (std::size_t v = 0; v < n_; ++v) {
      if (v == u) continue;
      a_[v * k_ + b] += w(u, v);
      total_[v] += w(u, v);
      far_[v * k_ + b] += far(u, v);
    }
    for (std::size_t g = 0; g < groups_; ++g) gdem_[b * groups_ + g] += m_.group_demand[g][u];
  }

  void unplace(std::size_t u, std::size_t b, double cut_before) {
    for (std::size_t g = 0; g < groups_; ++g) gdem_[b * groups_ + g] -= m_.group_demand[g][u];
    for (std::size_t v = 0; v < n_; ++v) {
      if (v == u) continue;
      a_[v * k_ + b] -= w(u, v);
      total_[v] -= w(u, v);
      far_[v * k_ + b] -= far(u, v);
    }
    if (hi_ > lo_ && size_[b] == hi_) --hi_count_;
    --size_[b];
    if (size_[b] == 0) --opened_;
    assign_[u] = kNone;
    cut_ = cut_before;
  }

  bool fill_possible(std::size_t remaining) const {
    std::size_t short_total = 0;
    for (std::size_t b = 0; b < k_; ++b) short_total += size_[b] < lo_ ? lo_ - size_[b] : 0;
    return short_total <= remaining;
  }

  struct Target {
    std::size_t bubble;  // kNone for the pool of unopened bubbles
    std::size_t cap;
  };

  std::vector<Target> targets(std::size_t unassigned) const {
    std::vector<Target> t;
    for (std::size_t b = 0; b < opened_; ++b) {
      const auto cap = size_cap(b) - std::min(size_cap(b), size_[b]);
      if (cap > 0) t.push_back({b, cap});
    }
    if (opened_ < k_) t.push_back({kNone, std::min(unassigned, (k_ - opened_) * (hi_count_ < max_hi_ ? hi_ : lo_))});
    return t;
  }

  double place_cost(std::size_t u, const Target& t) const {
    if (t.bubble == kNone) return total_[u];
    if (far_[u * k_ + t.bubble] != 0) return kUnbounded;
    return total_[u] - a_[u * k_ + t.bubble];
  }

  // Capacity-aware minimum cost of attaching the unassigned locations to bubbles (assigned-to-unassigned cut).
  double flow_bound(const std::vector<std::size_t>& un, const std::vector<Target>& tg) const {
    const std::size_t nt = tg.size();
    std::vector<std::vector<double>> cost(un.size(), std::vector<double>(nt));
    for (std::size_t i = 0; i < un.size(); ++i) {
      for (std::size_t t = 0; t < nt; ++t) cost[i][t] = place_cost(un[i], tg[t]);
    }
    std::vector<std::size_t> route(un.size(), kNone);
    std::vector<std::size_t> used(nt, 0);
    double total = 0.0;
    std::vector<double> dist(nt);
    std::vector<std::size_t> pred(nt), via(nt);
    std::vector<double> tr(nt * nt);
    std::vector<std::size_t> tr_who(nt * nt);
    for (std::size_t i = 0; i < un.size(); ++i) {
      std::fill(tr.begin(), tr.end(), kUnbounded);
      for (std::size_t j = 0; j < i; ++j) {
        const std::size_t from = route[j];
        for (std::size_t t = 0; t < nt; ++t) {
          if (t == from || !std::isfinite(cost[j][t])) continue;
          const double c = cost[j][t] - cost[j][from];
          if (c < tr[from * nt + t]) {
            tr[from * nt + t] = c;
            tr_who[from * nt + t] = j;
          }
        }
      }
      for (std::size_t t = 0; t < nt; ++t) {
        dist[t] = cost[i][t];
        pred[t] = kNone;
      }
      for (std::size_t iter = 0; iter < nt; ++iter) {
        bool changed = false;
        for (std::size_t s = 0; s < nt; ++s) {
          if (!std::isfinite(dist[s])) continue;
          for (std::size_t t = 0; t < nt; ++t) {
            const double c = tr[s * nt + t];
            if (std::isfinite(c) && dist[s] + c < dist[t] - kTol) {
              dist[t] = dist[s] + c;
              pred[t] = s;
              via[t] = tr_who[s * nt + t];
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      std::size_t sink = kNone;
      for (std::size_t t = 0; t < nt; ++t) {
        if (used[t] < tg[t].cap && std::isfinite(dist[t]) && (sink == kNone || dist[t] < dist[sink])) sink = t;
      }
      if (sink == kNone) return kUnbounded;
      total += dist[sink];
      ++used[sink];
      std::size_t t = sink;
      std::size_t guard = 0;
      while (pred[t] != kNone && guard++ < nt) {
        route[via[t]] = t;
        t = pred[t];
      }
      route[i] = t;
    }
    return total;
  }

  // Cut among unassigned locations: each can share a bubble with at most r - 1 of the others.
  double internal_bound(const std::vector<std::size_t>& un, const std::vector<Target>& tg) const {
    std::size_t r = 0;
    for (const auto& t : tg) r = std::max(r, t.bubble == kNone ? (hi_count_ < max_hi_ ? hi_ : lo_) : t.cap);
    r = std::min(r, un.size());
    if (r <= 1) {
      double total = 0.0;
      for (std::size_t i = 0; i < un.size(); ++i) {
        for (std::size_t j = i + 1; j < un.size(); ++j) total += w(un[i], un[j]);
      }
      return total;
    }
    double total = 0.0;
    double kept = 0.0;
    std::vector<double> row;
    for (std::size_t i = 0; i < un.size(); ++i) {
      row.clear();
      for (std::size_t j = 0; j < un.size(); ++j) {
        if (j != i) row.push_back(w(un[i], un[j]));
      }
      for (auto v : row) total += v;
      const std::size_t take = std::min(r - 1, row.size());
      std::nth_element(row.begin(), row.begin() + take, row.end(), std::greater<>());
      kept += std::accumulate(row.begin(), row.begin() + take, 0.0);
    }
    return std::max(0.0, (total - kept) / 2.0);
  }

  double lp_bound(const std::vector<std::size_t>& un, const std::vector<Target>& tg) const {
    // Unopened bubbles become individual columns here.
    std::vector<std::pair<std::size_t, std::size_t>> cols;  // (target, capacity)
    std::vector<std::size_t> col_target;
    for (std::size_t t = 0; t < tg.size(); ++t) {
      if (tg[t].bubble != kNone) {
        cols.emplace_back(t, tg[t].cap);
      } else {
        const std::size_t each = hi_count_ < max_hi_ ? hi_ : lo_;
        for (std::size_t c = 0; c < std::min(k_ - opened_, un.size()); ++c) cols.emplace_back(t, each);
      }
    }
    const std::size_t nc = cols.size();
    lp::Problem p;
    auto xv = [&](std::size_t i, std::size_t c) { return i * nc + c; };
    p.num_vars = un.size() * nc;
    p.cost.assign(p.num_vars, 0.0);
    for (std::size_t i = 0; i < un.size(); ++i) {
      lp::Row one;
      one.sense = lp::Sense::Eq;
      one.rhs = 1.0;
      for (std::size_t c = 0; c < nc; ++c) {
        const double cost = place_cost(un[i], tg[cols[c].first]);
        if (!std::isfinite(cost)) {
          p.rows.push_back({{{xv(i, c), 1.0}}, lp::Sense::Le, 0.0});
          continue;
        }
        p.cost[xv(i, c)] = cost;
        one.terms.emplace_back(xv(i, c), 1.0);
      }
      p.rows.push_back(std::move(one));
    }
    for (std::size_t c = 0; c < nc; ++c) {
      lp::Row cap;
      cap.rhs = static_cast<double>(cols[c].second);
      for (std::size_t i = 0; i < un.size(); ++i) cap.terms.emplace_back(xv(i, c), 1.0);
      p.rows.push_back(std::move(cap));
    }
    for (std::size_t i = 0; i < un.size(); ++i) {
      for (std::size_t j = i + 1; j < un.size(); ++j) {
        if (far(un[i], un[j])) {
          for (std::size_t c = 0; c < nc; ++c) p.rows.push_back({{{xv(i, c), 1.0}, {xv(j, c), 1.0}}, lp::Sense::Le, 1.0});
        }
        const double wij = w(un[i], un[j]);
        if (wij <= 0.0) continue;
        const std::size_t e = p.num_vars++;
        p.cost.push_back(wij);
        for (std::size_t c = 0; c < nc; ++c) {
          p.rows.push_back({{{e, 1.0}, {xv(i, c), -1.0}, {xv(j, c), 1.0}}, lp::Sense::Ge, 0.0});
          p.rows.push_back({{{e, 1.0}, {xv(i, c), 1.0}, {xv(j, c), -1.0}}, lp::Sense::Ge, 0.0});
        }
      }
    }
    const auto r = lp::solve(p);
    if (r.status == lp::Status::Infeasible) return kUnbounded;
    if (r.status != lp::Status::Optimal) return 0.0;
    return std::max(0.0, r.objective - 1e-9);
  }

  // Lower bound on the cut still to be added below the current node.
  double bound(std::size_t depth) const {
    std::vector<std::size_t> un(order_.begin() + static_cast<std::ptrdiff_t>(depth), order_.end());
    if (un.empty()) return 0.0;
    const auto tg = targets(un.size());
    double cheap = 0.0;
    for (auto u : un) {
      double best = kUnbounded;
      for (const auto& t : tg) best = std::min(best, place_cost(u, t));
      if (!std::isfinite(best)) return kUnbounded;
      cheap += best;
    }
    const double target = best_cut_ - cut_;
    if (cheap >= target - kTol) return cheap;
    const double flow = flow_bound(un, tg);
    const double lb = std::max(cheap, flow) + internal_bound(un, tg);
    if (lb >= target - kTol || un.size() > opt_.lp_bound_max_unassigned) return lb;
    return std::max(lb, lp_bound(un, tg));
  }

  bool loads_feasible(const std::vector<std::size_t>& assign) const {
    if (!bounded_load()) return true;
    for (std::size_t g = 0; g < groups_; ++g) {
      if (!assign_group(g, assign, m_.y_star, false, 0)) return false;
    }
    return true;
  }

  std::optional<std::vector<std::size_t>> assign_group(std::size_t g, const std::vector<std::size_t>& assign,
                                                       double limit, bool minimise, std::uint64_t cap) const {
    std::vector<double> demand(k_, 0.0);
    for (std::size_t u = 0; u < n_; ++u) demand[assign[u]] += m_.group_demand[g][u];
    std::vector<double> loads;
    for (auto p : members_[g]) loads.push_back(m_.hcp_load[p]);
    const std::size_t size = loads.size();
    GroupAssigner ga(loads, demand, size / k_, (size + k_ - 1) / k_, limit, minimise,
                     cap == 0 ? std::numeric_limits<std::uint64_t>::max() : cap);
    auto r = ga.run();
    if (!r) return std::nullopt;
    return r->first;
  }

  double cut_of(const std::vector<std::size_t>& assign) const {
    double c = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = a + 1; b < n_; ++b) {
        if (assign[a] != assign[b]) c += w(a, b);
      }
    }
    return c;
  }

  // Pairwise swaps and single moves that keep every constraint satisfied.
  void improve(std::vector<std::size_t>& assign, double& cut) const {
    std::vector<double> s(n_ * k_, 0.0);
    std::vector<std::size_t> size(k_, 0);
    auto rebuild = [&] {
      std::fill(s.begin(), s.end(), 0.0);
      std::fill(size.begin(), size.end(), 0);
      for (std::size_t a = 0; a < n_; ++a) {
        ++size[assign[a]];
        for (std::size_t b = 0; b < n_; ++b) {
          if (a != b) s[a * k_ + assign[b]] += w(a, b);
        }
      }
    };
    auto compatible = [&](std::size_t u, std::size_t bubble, std::size_t ignore) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (v != u && v != ignore && assign[v] == bubble && far(u, v)) return false;
      }
      return true;
    };
    rebuild();
    bool improved = true;
    std::size_t rounds = 0;
    while (improved && rounds++ < 200) {
      improved = false;
      for (std::size_t u = 0; u < n_ && !improved; ++u) {
        for (std::size_t v = u + 1; v < n_ && !improved; ++v) {
          const std::size_t bu = assign[u];
          const std::size_t bv = assign[v];
          if (bu == bv) continue;
          const double delta = s[u * k_ + bu] + s[v * k_ + bv] - s[u * k_ + bv] - s[v * k_ + bu] + 2.0 * w(u, v);
          if (delta >= -1e-12 || !compatible(u, bv, v) || !compatible(v, bu, u)) continue;
          std::swap(assign[u], assign[v]);
          if (loads_feasible(assign)) {
            cut += delta;
            improved = true;
          } else {
            std::swap(assign[u], assign[v]);
          }
        }
      }
      for (std::size_t u = 0; u < n_ && !improved && hi_ > lo_; ++u) {
        const std::size_t bu = assign[u];
        if (size[bu] != hi_) continue;
        for (std::size_t b = 0; b < k_ && !improved; ++b) {
          if (size[b] != lo_) continue;
          const double delta = s[u * k_ + bu] - s[u * k_ + b];
          if (delta >= -1e-12 || !compatible(u, b, kNone)) continue;
          assign[u] = b;
          if (loads_feasible(assign)) {
            cut += delta;
            improved = true;
          } else {
            assign[u] = bu;
          }
        }
      }
      if (improved) rebuild();
    }
  }

  // Randomized greedy fills polished by local search; the best feasible one seeds the incumbent.
  void warm_start() {
    const auto saved_a = a_, saved_total = total_, saved_gdem = gdem_;
    const auto saved_far = far_;
    for (std::size_t r = 0; r < opt_.restarts; ++r) {
      auto e = rng::stream(opt_.seed, rng::domain::kSolver, r);
      std::vector<std::size_t> perm(n_);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), e);
      std::vector<std::pair<std::size_t, std::size_t>> placed;
      bool ok = true;
      for (auto u : perm) {
        std::size_t pick = kNone;
        for (std::size_t b = 0; b < k_; ++b) {
          if (!can_take(u, b)) continue;
          if (pick == kNone || a_[u * k_ + b] > a_[u * k_ + pick]) pick = b;
        }
        if (pick == kNone) {
          ok = false;
          break;
        }
        place(u, pick);
        placed.emplace_back(u, pick);
      }
      std::vector<std::size_t> assign = assign_;
      for (auto it = placed.rbegin(); it != placed.rend(); ++it) unplace(it->first, it->second, 0.0);
      a_ = saved_a;
      total_ = saved_total;
      gdem_ = saved_gdem;
      far_ = saved_far;
      cut_ = 0.0;
      if (!ok || !loads_feasible(assign)) continue;
      double cut = cut_of(assign);
      improve(assign, cut);
      cut = cut_of(assign);
      if (cut < best_cut_ - kTol) {
        best_cut_ = cut;
        best_assign_ = std::move(assign);
      }
    }
  }

  void dfs(std::size_t depth) {
    if (limits_hit()) return;
    if (depth == n_) {
      if (cut_ >= best_cut_ - kTol || !loads_feasible(assign_)) return;
      std::vector<std::size_t> assign = assign_;
      double cut = cut_;
      improve(assign, cut);
      best_assign_ = std::move(assign);
      best_cut_ = cut_of(best_assign_);
      return;
    }
    if (cut_ + bound(depth) >= best_cut_ - kTol) return;
    const std::size_t u = order_[depth];
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t b = 0; b < std::min(opened_ + 1, k_); ++b) {
      if (can_take(u, b)) cand.emplace_back(total_[u] - a_[u * k_ + b], b);
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [cost, b] : cand) {
      const double before = cut_;
      place(u, b);
      if (fill_possible(n_ - depth - 1)) dfs(depth + 1);
      unplace(u, b, before);
      if (stopped_) return;
    }
  }

  BubbleClustering make_clustering(const std::vector<std::size_t>& assign) const {
    BubbleClustering c;
    c.k = k_;
    for (std::size_t u = 0; u < n_; ++u) c.location_bubble[m_.locations[u]] = assign[u];
    for (std::size_t g = 0; g < groups_; ++g) {
      auto z = assign_group(g, assign, m_.y_star, true, 200000);
      if (!z) z = assign_group(g, assign, kUnbounded, true, 200000);
      for (std::size_t i = 0; i < members_[g].size(); ++i) c.hcp_bubble[m_.hcps[members_[g][i]]] = (*z)[i];
    }
    c.objective_value = cut_of(assign);
    return canonicalize(std::move(c));
  }

  const IlpModel& m_;
  SolveOptions opt_;
  std::size_t n_ = 0, k_ = 1, lo_ = 0, hi_ = 0, max_hi_ = 0, groups_ = 0;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> group_top_;
  double far_limit_ = kUnbounded;
  std::vector<std::size_t> order_;

  std::vector<std::size_t> assign_;
  std::vector<std::size_t> size_;
  std::size_t opened_ = 0;
  std::size_t hi_count_ = 0;
  double cut_ = 0.0;
  std::vector<double> a_;
  std::vector<double> total_;
  std::vector<int> far_;
  std::vector<double> gdem_;

  double best_cut_ = kUnbounded;
  std::vector<std::size_t> best_assign_;
  double root_bound_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolveOutcome solve(const IlpModel& m, const SolveOptions& options) {
  if (m.locations.empty()) throw InvalidK("model has no substitutable locations");
  return BranchAndBound(m, options).run();
}

}  // namespace corn
