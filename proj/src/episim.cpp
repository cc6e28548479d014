#include "corn/episim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

#include "corn/csv.hpp"
#include "json_io.hpp"
#include "corn/parallel.hpp"
#include "corn/rewiring.hpp"
#include "corn/rng.hpp"

namespace corn {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kEdgeShedding = 0.05;

struct Contact {
  std::int64_t time = 0;  // seconds into the log
  std::uint32_t a = 0, b = 0;
  std::uint32_t location = 0;
  double minutes = 0.0;
  bool outside_room = false;
  bool casual = false;
};

bool contact_order(const Contact& x, const Contact& y) {
  return std::tie(x.time, x.casual, x.a, x.b, x.location) < std::tie(y.time, y.casual, y.a, y.b, y.location);
}

/// Everything a replicate needs that does not depend on its random draws.
struct Schedule {
  std::size_t hcps = 0;
  std::size_t agents = 0;
  std::int64_t log_days = 1;
  std::vector<std::vector<Contact>> days;            // per log day, sorted
  std::vector<std::vector<std::uint32_t>> on_duty;   // per log day, HCP indices
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> duty_span;  // per log day, aligned with on_duty
  std::vector<std::size_t> agent_bubble;             // empty without a clustering
  std::vector<std::size_t> seed_pool;
};

Schedule build_schedule(const VisitGraph& g, const BubbleClustering* c, const SimConfig& cfg) {
  const auto& hcps = g.hcps();
  const auto& locs = g.locations();
  Schedule s;
  s.hcps = hcps.size();
  std::vector<std::size_t> resident(locs.size(), kNone);
  for (auto l : locs.substitutable_locations()) resident[l] = s.hcps + (s.agents++);
  s.agents += s.hcps;
  s.log_days = g.day_count();
  s.days.resize(static_cast<std::size_t>(s.log_days));
  s.on_duty.resize(s.days.size());
  s.duty_span.resize(s.days.size());

  auto group = hcps.find_group(cfg.seed_group);
  if (!group) throw ConfigError("no HCP group named '" + cfg.seed_group + "' to draw the index case from");
  s.seed_pool = hcps.group_members(*group);

  if (c) {
    s.agent_bubble.assign(s.agents, kNone);
    for (const auto& [id, b] : c->hcp_bubble) {
      if (auto p = hcps.find(id)) s.agent_bubble[*p] = b;
    }
    for (const auto& [id, b] : c->location_bubble) {
      if (auto l = locs.find(id); l && resident[*l] != kNone) s.agent_bubble[resident[*l]] = b;
    }
  }

  auto day_of = [&](std::int64_t t) { return static_cast<std::size_t>(std::min<std::int64_t>(t / kSecondsPerDay, s.log_days - 1)); };
  const auto& visits = g.visits();
  std::vector<std::vector<std::size_t>> at(locs.size());
  std::vector<std::map<std::uint32_t, std::pair<std::int64_t, std::int64_t>>> spans(s.days.size());
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const auto& v = visits[i];
    at[v.location].push_back(i);
    auto [it, fresh] = spans[day_of(v.start)].try_emplace(v.hcp, v.start, v.end);
    if (!fresh) {
      it->second.first = std::min(it->second.first, v.start);
      it->second.second = std::max(it->second.second, v.end);
    }
    if (resident[v.location] != kNone) {
      s.days[day_of(v.start)].push_back({v.start, v.hcp, static_cast<std::uint32_t>(resident[v.location]), v.location,
                                         static_cast<double>(v.duration()) / 60.0, false, false});
    }
  }
  for (std::size_t l = 0; l < locs.size(); ++l) {
    const auto& list = at[l];  // already in start order
    for (std::size_t x = 0; x < list.size(); ++x) {
      const auto& u = visits[list[x]];
      for (std::size_t y = x + 1; y < list.size() && visits[list[y]].start < u.end; ++y) {
        const auto& w = visits[list[y]];
        if (w.hcp == u.hcp) continue;
        const std::int64_t from = std::max(u.start, w.start);
        const std::int64_t to = std::min(u.end, w.end);
        if (to <= from) continue;
        s.days[day_of(from)].push_back({from, std::min(u.hcp, w.hcp), std::max(u.hcp, w.hcp), static_cast<std::uint32_t>(l),
                                        static_cast<double>(to - from) / 60.0, !locs.substitutable(l), false});
      }
    }
  }
  for (std::size_t d = 0; d < s.days.size(); ++d) {
    std::sort(s.days[d].begin(), s.days[d].end(), contact_order);
    for (const auto& [p, span] : spans[d]) {
      s.on_duty[d].push_back(p);
      s.duty_span[d].push_back(span);
    }
  }
  return s;
}

double unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

struct RunMode {
  bool seed_only = false;  // R0 estimation: nobody but the index case transmits
};

ReplicateResult run_replicate(const Schedule& s, const SimConfig& cfg, std::uint64_t rep_seed, RunMode mode) {
  const auto& dp = cfg.disease;
  const int infectious_days = dp.incubation_days + dp.recovery_days;
  const std::size_t horizon = cfg.horizon_days ? cfg.horizon_days : static_cast<std::size_t>(s.log_days);
  std::vector<double> beta(static_cast<std::size_t>(infectious_days) + 1);
  for (int t = 0; t <= infectious_days; ++t) beta[static_cast<std::size_t>(t)] = shedding(t, dp);

  ReplicateResult r;
  r.new_per_day.assign(horizon, 0);
  std::vector<std::int64_t> infected_on(s.agents, -1);
  auto engine = rng::stream(rep_seed, 0);
  if (s.seed_pool.empty()) throw ConfigError("the index-case group has no members");
  r.seed_agent = s.seed_pool[rng::below(engine, s.seed_pool.size())];
  infected_on[r.seed_agent] = 0;
  r.infections = 1;
  if (horizon > 0) r.new_per_day[0] = 1;
  const bool bubbles = !s.agent_bubble.empty();
  const std::size_t seed_bubble = bubbles ? s.agent_bubble[r.seed_agent] : kNone;
  std::int64_t last_infection = 0;

  std::vector<Contact> today;
  for (std::size_t day = 1; day < horizon; ++day) {
    if (static_cast<std::int64_t>(day) > last_infection + infectious_days) break;
    const std::size_t ld = day % s.days.size();
    const std::int64_t offset = static_cast<std::int64_t>(day - ld) * kSecondsPerDay;
    today = s.days[ld];
    if (cfg.casual.rate_per_day > 0.0 && s.on_duty[ld].size() > 1) {
      auto casual = rng::stream(rep_seed, 1, day);
      std::poisson_distribution<int> count(cfg.casual.rate_per_day);
      const auto& duty = s.on_duty[ld];
      for (std::size_t i = 0; i < duty.size(); ++i) {
        const int n = count(casual);
        const auto [from, to] = s.duty_span[ld][i];
        for (int k = 0; k < n; ++k) {
          std::size_t j = rng::below(casual, duty.size() - 1);
          if (j >= i) ++j;
          const std::int64_t t = from + static_cast<std::int64_t>(rng::below(casual, static_cast<std::size_t>(to - from)));
          today.push_back({t, std::min(duty[i], duty[j]), std::max(duty[i], duty[j]), 0, cfg.casual.minutes, true, true});
        }
      }
      std::sort(today.begin(), today.end(), contact_order);
    }

    const auto stream_day = rng::derive(rep_seed, 2, day);
    for (std::size_t i = 0; i < today.size(); ++i) {
      const auto& c = today[i];
      std::size_t src = c.a, dst = c.b;
      auto shedding_day = [&](std::size_t x) {
        return infected_on[x] < 0 ? 0 : static_cast<std::int64_t>(day) - infected_on[x];
      };
      auto infectious = [&](std::size_t x) {
        const auto t = shedding_day(x);
        return infected_on[x] >= 0 && t >= 1 && t <= infectious_days && (!mode.seed_only || x == r.seed_agent);
      };
      if (infectious(c.b) && infected_on[c.a] < 0) std::swap(src, dst);
      if (!infectious(src) || infected_on[dst] >= 0) continue;
      if (bubbles && c.outside_room && src < s.hcps && dst < s.hcps) {
        const auto ba = s.agent_bubble[src], bb = s.agent_bubble[dst];
        if (ba != kNone && bb != kNone && ba != bb &&
            unit(rng::splitmix64(stream_day ^ (2 * i + 1))) >= dp.cross_bubble_scale) {
          continue;
        }
      }
      const double p = contact_infection_prob(c.minutes, beta[static_cast<std::size_t>(shedding_day(src))], dp.rho);
      if (unit(rng::splitmix64(stream_day ^ (2 * i))) >= p) continue;

      infected_on[dst] = static_cast<std::int64_t>(day);
      last_infection = static_cast<std::int64_t>(day);
      ++r.infections;
      ++r.new_per_day[day];
      if (bubbles) {
        const auto b = s.agent_bubble[dst];
        if (b != seed_bubble) r.leave = true;
        if (b != kNone && b != seed_bubble) r.reach = true;
      }
      if (cfg.keep_transmissions) {
        Transmission t;
        t.source = src;
        t.target = dst;
        if (!c.casual) t.location = c.location;
        t.day = static_cast<std::int64_t>(day);
        t.time = offset + c.time;
        t.casual = c.casual;
        r.transmissions.push_back(t);
      }
    }
  }
  return r;
}

std::vector<std::string> agent_names(const VisitGraph& g) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < g.hcps().size(); ++p) out.push_back(g.hcps().id(p).str());
  for (auto l : g.locations().substitutable_locations()) out.push_back("resident:" + g.locations().id(l).str());
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& v, std::size_t resamples, rng::Engine& e) {
  if (v.empty()) return {0.0, 0.0};
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[rng::below(e, v.size())];
    m = sum / static_cast<double>(v.size());
  }
  return {quantile(means, 0.025), quantile(means, 0.975)};
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

double DiseaseParams::up_rate() const {
  if (ramp_up_rate >= 0.0) return ramp_up_rate;
  return incubation_days > 1 ? std::log(1.0 / kEdgeShedding) / (incubation_days - 1) : std::log(1.0 / kEdgeShedding);
}

double DiseaseParams::down_rate() const {
  return ramp_down_rate >= 0.0 ? ramp_down_rate : std::log(1.0 / kEdgeShedding) / recovery_days;
}

void SimConfig::validate() const {
  if (!(disease.rho >= 0.0) || !std::isfinite(disease.rho)) throw ConfigError("rho must be a finite value >= 0");
  if (disease.incubation_days < 1) throw ConfigError("incubation_days must be >= 1");
  if (disease.recovery_days < 1) throw ConfigError("recovery_days must be >= 1");
  if (!(disease.cross_bubble_scale >= 0.0 && disease.cross_bubble_scale <= 1.0)) {
    throw ConfigError("cross_bubble_scale must lie in [0, 1]");
  }
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (!(casual.rate_per_day >= 0.0) || !(casual.minutes >= 0.0)) throw ConfigError("casual contact parameters must be >= 0");
}

SimConfig sim_config_from_json(const nlohmann::json& j, const std::string& where) {
  SimConfig cfg;
  try {
    static const std::set<std::string> top{"disease", "replicates", "seed", "horizon_days", "casual", "seed_group",
                                           "keep_transmissions"};
    for (const auto& [k, v] : j.items()) {
      if (!top.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
    if (j.contains("disease")) {
      const auto& d = j.at("disease");
      cfg.disease.rho = get_or(d, "rho", cfg.disease.rho);
      cfg.disease.incubation_days = get_or(d, "incubation_days", cfg.disease.incubation_days);
      cfg.disease.recovery_days = get_or(d, "recovery_days", cfg.disease.recovery_days);
      cfg.disease.ramp_up_rate = get_or(d, "ramp_up_rate", cfg.disease.ramp_up_rate);
      cfg.disease.ramp_down_rate = get_or(d, "ramp_down_rate", cfg.disease.ramp_down_rate);
      cfg.disease.cross_bubble_scale = get_or(d, "cross_bubble_scale", cfg.disease.cross_bubble_scale);
    }
    cfg.replicates = get_or(j, "replicates", cfg.replicates);
    cfg.seed = get_or(j, "seed", cfg.seed);
    cfg.horizon_days = get_or(j, "horizon_days", cfg.horizon_days);
    if (j.contains("casual")) {
      cfg.casual.rate_per_day = get_or(j.at("casual"), "rate_per_day", cfg.casual.rate_per_day);
      cfg.casual.minutes = get_or(j.at("casual"), "minutes", cfg.casual.minutes);
    }
    cfg.seed_group = get_or(j, "seed_group", cfg.seed_group);
    cfg.keep_transmissions = get_or(j, "keep_transmissions", cfg.keep_transmissions);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json sim_config_to_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["disease"] = {{"rho", cfg.disease.rho},
                  {"incubation_days", cfg.disease.incubation_days},
                  {"recovery_days", cfg.disease.recovery_days},
                  {"ramp_up_rate", cfg.disease.up_rate()},
                  {"ramp_down_rate", cfg.disease.down_rate()},
                  {"cross_bubble_scale", cfg.disease.cross_bubble_scale}};
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["horizon_days"] = cfg.horizon_days;
  j["casual"] = {{"rate_per_day", cfg.casual.rate_per_day}, {"minutes", cfg.casual.minutes}};
  j["seed_group"] = cfg.seed_group;
  j["keep_transmissions"] = cfg.keep_transmissions;
  return j;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return sim_config_from_json(j, path.string());
}

void write_sim_config(const SimConfig& cfg, const std::filesystem::path& path) {
  csv::open_for_write(path) << sim_config_to_json(cfg).dump(2) << '\n';
}

double shedding(int day, const DiseaseParams& p) {
  const int w = p.incubation_days;
  if (day < 0 || day > w + p.recovery_days) return 0.0;
  if (day <= w) return std::exp(-p.up_rate() * (w - day));
  return std::exp(-p.down_rate() * (day - w));
}

double contact_infection_prob(double minutes, double beta, double rho) {
  return std::clamp(rho * minutes * beta, 0.0, 1.0);
}

double SimSummary::mean_infections() const { return mean_of(infections()); }
double SimSummary::mean_secondary() const { return replicates.empty() ? 0.0 : mean_infections() - 1.0; }
double SimSummary::median_infections() const { return quantile(infections(), 0.5); }

Quantiles SimSummary::quantiles() const {
  const auto v = infections();
  return {quantile(v, 0.05), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 0.95)};
}

double SimSummary::leave_fraction() const {
  if (replicates.empty()) return 0.0;
  return static_cast<double>(std::count_if(replicates.begin(), replicates.end(), [](const auto& r) { return r.leave; })) /
         static_cast<double>(replicates.size());
}

double SimSummary::reach_fraction() const {
  if (replicates.empty()) return 0.0;
  return static_cast<double>(std::count_if(replicates.begin(), replicates.end(), [](const auto& r) { return r.reach; })) /
         static_cast<double>(replicates.size());
}

std::vector<double> SimSummary::infections() const {
  std::vector<double> v;
  for (const auto& r : replicates) v.push_back(static_cast<double>(r.infections));
  return v;
}

SimSummary simulate(const VisitGraph& g, const BubbleClustering* clustering, const SimConfig& cfg, std::string label) {
  cfg.validate();
  const auto schedule = build_schedule(g, clustering, cfg);
  SimSummary s;
  s.label = std::move(label);
  s.bubbles = clustering != nullptr;
  s.agents = agent_names(g);
  s.replicates.resize(cfg.replicates);
  parallel_for(cfg.replicates, [&](std::size_t r) {
    s.replicates[r] = run_replicate(schedule, cfg, rng::derive(cfg.seed, rng::domain::kReplicate, r), {});
  });
  return s;
}

SimSummary simulate_random_bubbles(const VisitGraph& g, std::size_t k, const SimConfig& cfg, std::string label) {
  cfg.validate();
  SimSummary s;
  s.label = std::move(label);
  s.bubbles = true;
  s.agents = agent_names(g);
  s.replicates.resize(cfg.replicates);
  parallel_for(cfg.replicates, [&](std::size_t r) {
    const auto c = random_clustering(g.hcps(), g.locations(), k, rng::derive(cfg.seed, rng::domain::kRandomClustering, r));
    const auto gr = rewire(g, c, rng::derive(cfg.seed, rng::domain::kRewire, r));
    const auto schedule = build_schedule(gr.graph, &c, cfg);
    s.replicates[r] = run_replicate(schedule, cfg, rng::derive(cfg.seed, rng::domain::kReplicate, r), {});
  });
  return s;
}

R0Estimate estimate_r0(const VisitGraph& g, double rho, const SimConfig& cfg) {
  SimConfig c = cfg;
  c.disease.rho = rho;
  c.keep_transmissions = false;
  c.validate();
  const auto schedule = build_schedule(g, nullptr, c);
  std::vector<double> secondary(c.replicates);
  parallel_for(c.replicates, [&](std::size_t r) {
    auto res = run_replicate(schedule, c, rng::derive(c.seed, rng::domain::kCalibration, r), {true});
    secondary[r] = static_cast<double>(res.infections - 1);
  });
  R0Estimate e;
  e.rho = rho;
  e.mean = mean_of(secondary);
  double var = 0.0;
  for (double x : secondary) var += (x - e.mean) * (x - e.mean);
  const double se = secondary.size() > 1 ? std::sqrt(var / static_cast<double>(secondary.size() - 1) /
                                                     static_cast<double>(secondary.size()))
                                         : 0.0;
  e.ci_low = e.mean - 1.96 * se;
  e.ci_high = e.mean + 1.96 * se;
  return e;
}

Calibration calibrate_rho(const VisitGraph& g, double target, const SimConfig& cfg) {
  Calibration out;
  auto eval = [&](double rho) {
    auto e = estimate_r0(g, rho, cfg);
    out.trace.push_back(e);
    return e;
  };
  auto finish = [&](const R0Estimate& e) {
    out.rho = e.rho;
    out.achieved = e;
    auto sorted = out.trace;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.rho < b.rho; });
    for (std::size_t i = 1; i < sorted.size(); ++i) out.monotone = out.monotone && sorted[i].mean >= sorted[i - 1].mean;
    return out;
  };
  if (!(target > 0.0)) return finish(eval(0.0));

  const double tol = 0.05 * target;
  double lo = 0.0;
  double hi = cfg.disease.rho > 0.0 ? cfg.disease.rho : 1e-3;
  R0Estimate at_hi = eval(hi);
  while (at_hi.mean < target - tol) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) {
      throw NotBracketed("R0 " + csv::format_double(target) + " is out of reach on this graph (best " +
                         csv::format_double(at_hi.mean) + ")");
    }
    at_hi = eval(hi);
  }
  if (std::abs(at_hi.mean - target) <= tol) return finish(at_hi);
  R0Estimate best = at_hi;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const auto e = eval(mid);
    if (std::abs(e.mean - target) < std::abs(best.mean - target)) best = e;
    if (std::abs(e.mean - target) <= tol) return finish(e);
    (e.mean < target ? lo : hi) = mid;
  }
  throw NotBracketed("bisection did not reach R0 " + csv::format_double(target) + " (closest " +
                     csv::format_double(best.mean) + ")");
}

ComparisonReport compare_runs(const std::vector<SimSummary>& summaries, std::uint64_t seed, std::size_t resamples) {
  ComparisonReport rep;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    auto e = rng::stream(seed, rng::domain::kBootstrap, 2 * i);
    ArmStats a;
    a.label = s.label;
    a.replicates = s.replicates.size();
    const auto v = s.infections();
    a.mean = mean_of(v);
    std::tie(a.ci_low, a.ci_high) = bootstrap_mean_ci(v, resamples, e);
    a.median = quantile(v, 0.5);
    a.q = s.quantiles();
    if (s.bubbles) {
      a.leave_pct = 100.0 * s.leave_fraction();
      a.reach_pct = 100.0 * s.reach_fraction();
      std::vector<double> reach;
      for (const auto& r : s.replicates) reach.push_back(r.reach ? 100.0 : 0.0);
      auto [lo, hi] = bootstrap_mean_ci(reach, resamples, e);
      a.reach_ci_low = lo;
      a.reach_ci_high = hi;
    }
    rep.arms.push_back(a);
  }
  std::size_t pair = 0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    for (std::size_t j = i + 1; j < summaries.size(); ++j, ++pair) {
      const auto x = summaries[i].infections();
      const auto y = summaries[j].infections();
      auto e = rng::stream(seed, rng::domain::kBootstrap, 2 * pair + 1 + 2 * summaries.size());
      PairedDifference d;
      d.a = summaries[i].label;
      d.b = summaries[j].label;
      d.mean_diff = mean_of(x) - mean_of(y);
      d.paired = x.size() == y.size();
      std::vector<double> diffs(resamples);
      for (auto& out : diffs) {
        if (d.paired) {
          double sum = 0.0;
          for (std::size_t k = 0; k < x.size(); ++k) {
            const auto idx = rng::below(e, x.size());
            sum += x[idx] - y[idx];
          }
          out = x.empty() ? 0.0 : sum / static_cast<double>(x.size());
        } else {
          double sx = 0.0, sy = 0.0;
          for (std::size_t k = 0; k < x.size(); ++k) sx += x[rng::below(e, x.size())];
          for (std::size_t k = 0; k < y.size(); ++k) sy += y[rng::below(e, y.size())];
          out = (x.empty() ? 0.0 : sx / static_cast<double>(x.size())) - (y.empty() ? 0.0 : sy / static_cast<double>(y.size()));
        }
      }
      d.ci_low = quantile(diffs, 0.025);
      d.ci_high = quantile(diffs, 0.975);
      rep.differences.push_back(d);
    }
  }
  return rep;
}

void write_sim_summary(const SimSummary& s, const std::filesystem::path& dir, bool with_transmissions) {
  std::filesystem::create_directories(dir);
  using csv::format_double;
  {
    auto os = csv::open_for_write(dir / "replicates.csv");
    os << "replicate,infections,leave,reach\n";
    for (std::size_t r = 0; r < s.replicates.size(); ++r) {
      const auto& x = s.replicates[r];
      os << r << ',' << x.infections << ',';
      if (s.bubbles) {
        os << (x.leave ? 1 : 0) << ',' << (x.reach ? 1 : 0) << '\n';
      } else {
        os << "NA,NA\n";
      }
    }
  }
  if (with_transmissions) {
    auto os = csv::open_for_write(dir / "transmissions.csv");
    os << "replicate,day,time_s,source,target,location,casual\n";
    for (std::size_t r = 0; r < s.replicates.size(); ++r) {
      for (const auto& t : s.replicates[r].transmissions) {
        os << r << ',' << t.day << ',' << t.time << ',' << s.agents[t.source] << ',' << s.agents[t.target] << ','
           << (t.location ? std::to_string(*t.location) : std::string()) << ',' << (t.casual ? 1 : 0) << '\n';
      }
    }
  }
  const auto q = s.quantiles();
  nlohmann::ordered_json j;
  j["label"] = s.label;
  j["replicates"] = s.replicates.size();
  j["mean_infections"] = s.mean_infections();
  j["mean_infections_excluding_seed"] = s.mean_secondary();
  j["median_infections"] = s.median_infections();
  j["quantiles"] = {{"q05", q.q05}, {"q25", q.q25}, {"q50", q.q50}, {"q75", q.q75}, {"q95", q.q95}};
  if (s.bubbles) {
    j["leave_fraction"] = s.leave_fraction();
    j["reach_fraction"] = s.reach_fraction();
  } else {
    j["leave_fraction"] = nullptr;
    j["reach_fraction"] = nullptr;
  }
  auto& reps = j["per_replicate"] = nlohmann::ordered_json::array();
  for (const auto& r : s.replicates) {
    nlohmann::ordered_json x;
    x["infections"] = r.infections;
    x["seed"] = s.agents[r.seed_agent];
    if (s.bubbles) {
      x["leave"] = r.leave;
      x["reach"] = r.reach;
    }
    x["new_per_day"] = r.new_per_day;
    reps.push_back(std::move(x));
  }
  csv::open_for_write(dir / "summary.json") << j.dump(2) << '\n';
}

void write_comparison(const ComparisonReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  using csv::format_double;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  {
    auto os = csv::open_for_write(dir / "arms.csv");
    os << "arm,replicates,mean,mean_ci_low,mean_ci_high,median,q05,q25,q75,q95,leave_pct,reach_pct,reach_ci_low,"
          "reach_ci_high\n";
    for (const auto& a : r.arms) {
      os << a.label << ',' << a.replicates << ',' << format_double(a.mean) << ',' << format_double(a.ci_low) << ','
         << format_double(a.ci_high) << ',' << format_double(a.median) << ',' << format_double(a.q.q05) << ','
         << format_double(a.q.q25) << ',' << format_double(a.q.q75) << ',' << format_double(a.q.q95) << ','
         << opt(a.leave_pct) << ',' << opt(a.reach_pct) << ',' << opt(a.reach_ci_low) << ',' << opt(a.reach_ci_high)
         << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "differences.csv");
    os << "arm_a,arm_b,mean_diff,ci_low,ci_high,paired\n";
    for (const auto& d : r.differences) {
      os << d.a << ',' << d.b << ',' << format_double(d.mean_diff) << ',' << format_double(d.ci_low) << ','
         << format_double(d.ci_high) << ',' << (d.paired ? 1 : 0) << '\n';
    }
  }
}

}  // namespace corn
