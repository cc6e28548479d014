#include "corn/experiment.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "corn/csv.hpp"
#include "corn/error.hpp"
#include "corn/rng.hpp"
#include "json_io.hpp"

namespace corn {

namespace {

using nlohmann::ordered_json;
using csv::format_double;

ordered_json bound_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

double bound_from(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_null()) return kUnbounded;
  if (v.is_string() && v.get<std::string>() == "inf") return kUnbounded;
  return v.get<double>();
}

std::string label_of(const std::string& method, std::size_t k) { return method + "_k" + std::to_string(k); }

std::string k_field(const ArmResult* a) { return a ? std::to_string(a->k) : std::string("NA"); }

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); }

std::vector<double> values_of(const auto& m) {
  std::vector<double> v;
  for (const auto& [key, x] : m) v.push_back(x);
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (ks.empty()) throw ConfigError("at least one K is required");
  for (auto k : ks) {
    if (k < 1) throw ConfigError("K must be >= 1");
  }
  if (rho && !(*rho >= 0.0)) throw ConfigError("rho must be >= 0");
  if (!rho && !(target_r0 >= 0.0)) throw ConfigError("target R0 must be >= 0");
  if (!(d_star_m >= 0.0) || !(y_star_h >= 0.0)) throw ConfigError("D* and Y* must be >= 0");
  if (unit_s < 1) throw ConfigError("unit must be >= 1 second");
  if (z && !(*z >= 0.0 && *z <= 1.0)) throw ConfigError("z must lie in [0, 1]");
  if (bootstrap_resamples < 1) throw ConfigError("bootstrap resamples must be >= 1");
  sim.validate();
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  ExperimentConfig cfg;
  try {
    const auto j = nlohmann::json::parse(in);
    static const std::set<std::string> keys{"ks", "rho", "target_r0", "d_star_m", "y_star_h", "unit_s", "z",
                                            "hcp_scope", "sim", "solver", "random_arm", "transmissions",
                                            "bootstrap_resamples"};
    for (const auto& [k, v] : j.items()) {
      if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + path.string());
    }
    if (j.contains("ks")) cfg.ks = j.at("ks").get<std::vector<std::size_t>>();
    if (j.contains("rho") && !j.at("rho").is_null()) cfg.rho = j.at("rho").get<double>();
    if (j.contains("target_r0")) cfg.target_r0 = j.at("target_r0").get<double>();
    cfg.d_star_m = bound_from(j, "d_star_m", cfg.d_star_m);
    cfg.y_star_h = bound_from(j, "y_star_h", cfg.y_star_h);
    if (j.contains("unit_s")) cfg.unit_s = j.at("unit_s").get<std::int64_t>();
    if (j.contains("z") && !j.at("z").is_null()) cfg.z = j.at("z").get<double>();
    if (j.contains("hcp_scope")) {
      const auto s = j.at("hcp_scope").get<std::string>();
      if (s == "all") {
        cfg.scope = HcpScope::All;
      } else if (s == "ns_only") {
        cfg.scope = HcpScope::NonSubstitutableOnly;
      } else {
        throw ConfigError("hcp_scope must be 'all' or 'ns_only'");
      }
    }
    if (j.contains("sim")) cfg.sim = sim_config_from_json(j.at("sim"), path.string());
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.solve.time_limit_s = bound_from(s, "time_limit_s", cfg.solve.time_limit_s);
      if (s.contains("node_limit")) cfg.solve.node_limit = s.at("node_limit").get<std::uint64_t>();
      if (s.contains("restarts")) cfg.solve.restarts = s.at("restarts").get<std::size_t>();
    }
    if (j.contains("random_arm")) cfg.random_arm = j.at("random_arm").get<bool>();
    if (j.contains("transmissions")) cfg.transmissions = j.at("transmissions").get<bool>();
    if (j.contains("bootstrap_resamples")) cfg.bootstrap_resamples = j.at("bootstrap_resamples").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

void write_experiment_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  ordered_json j;
  j["ks"] = cfg.ks;
  j["rho"] = cfg.rho ? ordered_json(*cfg.rho) : ordered_json();
  j["target_r0"] = cfg.target_r0;
  j["d_star_m"] = bound_json(cfg.d_star_m);
  j["y_star_h"] = bound_json(cfg.y_star_h);
  j["unit_s"] = cfg.unit_s;
  j["z"] = cfg.z ? ordered_json(*cfg.z) : ordered_json();
  j["hcp_scope"] = cfg.scope == HcpScope::All ? "all" : "ns_only";
  j["sim"] = sim_config_to_json(cfg.sim);
  j["solver"] = {{"time_limit_s", bound_json(cfg.solve.time_limit_s)},
                 {"node_limit", cfg.solve.node_limit},
                 {"restarts", cfg.solve.restarts}};
  j["random_arm"] = cfg.random_arm;
  j["transmissions"] = cfg.transmissions;
  j["bootstrap_resamples"] = cfg.bootstrap_resamples;
  csv::open_for_write(path) << j.dump(2) << '\n';
}

const ArmResult* ExperimentResult::find(const std::string& method, std::size_t k) const {
  for (const auto& a : arms) {
    if (a.method == method && a.k == k) return &a;
  }
  return nullptr;
}

ExperimentResult run_experiment(const VisitGraph& g, const DistanceMatrix& dist, const ExperimentConfig& cfg) {
  cfg.validate();
  for (auto k : cfg.ks) check_k(k, g.locations().substitutable_locations().size(), g.hcps());

  ExperimentResult r;
  SimConfig sim = cfg.sim;
  sim.keep_transmissions = cfg.transmissions;
  if (cfg.rho) {
    r.rho = *cfg.rho;
  } else {
    r.calibration = calibrate_rho(g, cfg.target_r0, sim);
    r.rho = r.calibration->rho;
  }
  sim.disease.rho = r.rho;
  r.z = cfg.z ? *cfg.z : std::min(1.0, r.rho * static_cast<double>(cfg.unit_s) / 60.0);

  r.baseline = simulate(g, nullptr, sim, "baseline");
  const auto weights = weight_matrix(g, r.z, cfg.unit_s, cfg.scope);
  const auto ld = compute_loads_demands(g);
  SolveOptions solve = cfg.solve;
  solve.seed = rng::derive(sim.seed, rng::domain::kSolver);

  auto clustered = [&](const std::string& method, std::size_t k, double d_star, double y_star) {
    ArmResult a;
    a.method = method;
    a.k = k;
    const auto model = build_model(weights, dist, ld, g.hcps(), g.locations(), k, d_star, y_star);
    a.outcome = corn::solve(model, solve);
    if (a.outcome->clustering) {
      const auto& c = *a.outcome->clustering;
      a.rewired = rewire(g, c, rng::derive(sim.seed, rng::domain::kExperimentRewire, k));
      a.costs = compute_costs(g, *a.rewired, c, dist);
      a.sim = simulate(a.rewired->graph, &c, sim, label_of(method, k));
    }
    return a;
  };

  for (auto k : cfg.ks) {
    r.arms.push_back(clustered("corn", k, kUnbounded, kUnbounded));
    if (cfg.bounded()) r.arms.push_back(clustered("corn_bounded", k, cfg.d_star_m, cfg.y_star_h));
    if (cfg.random_arm) {
      ArmResult a;
      a.method = "random";
      a.k = k;
      a.sim = simulate_random_bubbles(g, k, sim, label_of("random", k));
      r.arms.push_back(std::move(a));
    }
  }

  std::vector<SimSummary> all{r.baseline};
  for (const auto& a : r.arms) {
    if (a.sim) all.push_back(*a.sim);
  }
  r.comparison = compare_runs(all, sim.seed, cfg.bootstrap_resamples);
  return r;
}

void write_experiment(const ExperimentResult& r, const VisitGraph& g, const ExperimentConfig& cfg,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    ordered_json j;
    j["rho"] = r.rho;
    j["z"] = r.z;
    if (r.calibration) {
      const auto& c = *r.calibration;
      j["target_r0"] = cfg.target_r0;
      j["achieved_r0"] = {{"mean", c.achieved.mean}, {"ci_low", c.achieved.ci_low}, {"ci_high", c.achieved.ci_high}};
      j["monotone"] = c.monotone;
      auto& t = j["trace"] = ordered_json::array();
      for (const auto& e : c.trace) t.push_back({{"rho", e.rho}, {"r0", e.mean}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}});
    }
    csv::open_for_write(dir / "calibration.json") << j.dump(2) << '\n';
  }

  write_sim_summary(r.baseline, dir / "baseline", cfg.transmissions);
  for (const auto& a : r.arms) {
    const auto sub = dir / ("k" + std::to_string(a.k)) / a.method;
    std::filesystem::create_directories(sub);
    if (a.outcome) {
      ordered_json s;
      s["status"] = to_string(a.outcome->status);
      s["objective"] = a.outcome->clustering ? ordered_json(*a.outcome->clustering->objective_value) : ordered_json();
      s["bound"] = a.outcome->bound;
      s["nodes"] = a.outcome->nodes;
      csv::open_for_write(sub / "solve.json") << s.dump(2) << '\n';
      if (a.outcome->clustering) write_clustering_json(*a.outcome->clustering, sub / "clustering.json");
    }
    if (a.rewired) {
      write_visits_csv(a.rewired->graph, sub / "rewired_visits.csv");
      auto os = csv::open_for_write(sub / "dropped_visits.csv");
      os << "hcp,location,start,end\n";
      for (auto i : a.rewired->dropped) {
        const auto& v = g.visits()[i];
        os << g.hcps().id(v.hcp).str() << ',' << g.locations().id(v.location).str() << ',' << v.start << ',' << v.end
           << '\n';
      }
    }
    if (a.costs) write_cost_report(*a.costs, sub);
    if (a.sim) write_sim_summary(*a.sim, sub, cfg.transmissions);
  }

  // Arm statistics keyed by label.
  std::map<std::string, const ArmStats*> stats;
  for (const auto& s : r.comparison.arms) stats[s.label] = &s;
  struct Row {
    std::string method;
    const ArmResult* arm;
    const ArmStats* s;
  };
  std::vector<Row> rows{{"baseline", nullptr, stats.at("baseline")}};
  for (const auto& a : r.arms) {
    if (a.sim) rows.push_back({a.method, &a, stats.at(a.sim->label)});
  }

  {
    auto os = csv::open_for_write(dir / "infections.csv");
    os << "k,method,replicates,mean,ci_low,ci_high,median,q05,q25,q75,q95\n";
    for (const auto& row : rows) {
      const auto& s = *row.s;
      os << k_field(row.arm) << ',' << row.method << ',' << s.replicates << ',' << format_double(s.mean) << ','
         << format_double(s.ci_low) << ',' << format_double(s.ci_high) << ',' << format_double(s.median) << ','
         << format_double(s.q.q05) << ',' << format_double(s.q.q25) << ',' << format_double(s.q.q75) << ','
         << format_double(s.q.q95) << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "transmission.csv");
    os << "k,method,leave_pct,reach_pct,reach_ci_low,reach_ci_high\n";
    for (const auto& row : rows) {
      if (!row.arm) continue;
      const auto& s = *row.s;
      os << row.arm->k << ',' << row.method << ',' << opt_field(s.leave_pct) << ',' << opt_field(s.reach_pct) << ','
         << opt_field(s.reach_ci_low) << ',' << opt_field(s.reach_ci_high) << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "costs.csv");
    os << "k,method,status,objective,bound,excess_load_mean_h,excess_load_median_h,excess_load_max_h,"
          "unmet_demand_mean_h,unmet_demand_median_h,unmet_demand_max_h,unmet_demand_total_h,"
          "excess_footsteps_mean_m,excess_footsteps_median_m,excess_footsteps_max_m,max_bubble_diameter_m\n";
    for (const auto& a : r.arms) {
      if (!a.outcome) continue;
      os << a.k << ',' << a.method << ',' << to_string(a.outcome->status) << ',';
      if (!a.costs) {
        os << "NA," << format_double(a.outcome->bound) << ",NA,NA,NA,NA,NA,NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      const auto& c = *a.costs;
      const auto el = summarize(values_of(c.excess_load));
      const auto ud = summarize(values_of(c.unmet_demand));
      const auto ef = summarize(values_of(c.excess_footsteps));
      double diam = 0.0;
      for (const auto& [b, d] : c.bubble_diameters) diam = std::max(diam, d);
      os << format_double(*a.outcome->clustering->objective_value) << ',' << format_double(a.outcome->bound) << ','
         << format_double(el.mean) << ',' << format_double(el.median) << ',' << format_double(el.max) << ','
         << format_double(ud.mean) << ',' << format_double(ud.median) << ',' << format_double(ud.max) << ','
         << format_double(ud.total) << ',' << format_double(ef.mean) << ',' << format_double(ef.median) << ','
         << format_double(ef.max) << ',' << format_double(diam) << '\n';
    }
  }
  {
    auto os = csv::open_for_write(dir / "unmet_demand.csv");
    os << "k,method,location,demand_h,unmet_demand_h\n";
    for (const auto& a : r.arms) {
      if (!a.costs) continue;
      for (const auto& [loc, u] : a.costs->unmet_demand) {
        os << a.k << ',' << a.method << ',' << loc.str() << ',' << format_double(a.costs->demand.at(loc)) << ','
           << format_double(u) << '\n';
      }
    }
  }
  write_comparison(r.comparison, dir);
  {
    auto os = csv::open_for_write(dir / "plot_long.csv");
    os << "k,method,metric,value\n";
    auto put = [&](const std::string& k, const std::string& m, const char* metric, double v) {
      os << k << ',' << m << ',' << metric << ',' << format_double(v) << '\n';
    };
    for (const auto& row : rows) {
      const auto k = k_field(row.arm);
      const auto& s = *row.s;
      put(k, row.method, "mean_infections", s.mean);
      put(k, row.method, "mean_infections_ci_low", s.ci_low);
      put(k, row.method, "mean_infections_ci_high", s.ci_high);
      put(k, row.method, "median_infections", s.median);
      if (s.leave_pct) put(k, row.method, "leave_pct", *s.leave_pct);
      if (s.reach_pct) put(k, row.method, "reach_pct", *s.reach_pct);
      if (row.arm && row.arm->costs) {
        const auto& c = *row.arm->costs;
        put(k, row.method, "excess_load_mean_h", summarize(values_of(c.excess_load)).mean);
        put(k, row.method, "unmet_demand_mean_h", summarize(values_of(c.unmet_demand)).mean);
        put(k, row.method, "excess_footsteps_mean_m", summarize(values_of(c.excess_footsteps)).mean);
      }
    }
  }
}

}  // namespace corn
