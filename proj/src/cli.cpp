#include "corn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "corn/core_model.hpp"
#include "corn/csv.hpp"
#include "corn/episim.hpp"
#include "corn/error.hpp"
#include "corn/experiment.hpp"
#include "corn/optimizer.hpp"
#include "corn/rewiring.hpp"
#include "corn/rng.hpp"
#include "corn/spatial.hpp"
#include "corn/synth.hpp"
#include "corn/weights.hpp"
#include "json_io.hpp"

namespace corn::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kPathFlags{"--visits", "--hcps",       "--locations", "--spatial", "--facility",
                                       "--config", "--clustering", "--weights",   "--manifest"};

double parse_bound(const std::string& s, const char* flag) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "inf" || t == "infinity" || t == "none") return kUnbounded;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v >= 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + " expects a non-negative number or 'inf', got '" + s + "'");
  }
}

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string timestamp_now() {
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      return iso_utc(static_cast<std::time_t>(std::stoll(e)));
    } catch (const std::exception&) {
    }
  }
  return iso_utc(std::time(nullptr));
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> recorded;  // args as stored in the manifest
  std::optional<std::string> created_at;
  std::vector<fs::path> inputs;
  ordered_json config = ordered_json::object();
  std::uint64_t seed = 0;
};

struct Inputs {
  std::string visits, hcps, locations, spatial, facility;

  void add(CLI::App* app) {
    app->add_option("--visits", visits, "mobility log CSV");
    app->add_option("--hcps", hcps, "HCP roster CSV");
    app->add_option("--locations", locations, "location roster CSV");
    app->add_option("--spatial", spatial, "spatial graph JSON");
    app->add_option("--facility", facility, "synthetic facility spec JSON (replaces the four files above)");
  }
};

struct Loaded {
  VisitGraph graph;
  std::optional<SpatialGraph> spatial;
  std::optional<Facility> facility;
  std::optional<FacilitySpec> spec;
};

Loaded load_inputs(const Inputs& in, Context& ctx, bool need_spatial) {
  Loaded l;
  if (!in.facility.empty()) {
    ctx.inputs.push_back(in.facility);
    l.spec = load_facility_spec(in.facility);
    l.facility = generate_facility(*l.spec);
    l.graph = generate_mobility(*l.facility, *l.spec);
    l.spatial = l.facility->spatial;
    return l;
  }
  if (in.visits.empty() || in.hcps.empty() || in.locations.empty()) {
    throw ConfigError("either --facility or all of --visits, --hcps, --locations are required");
  }
  for (const auto& p : {in.visits, in.hcps, in.locations}) ctx.inputs.push_back(p);
  l.graph = load_mobility_log(in.visits, in.hcps, in.locations);
  if (!in.spatial.empty()) {
    ctx.inputs.push_back(in.spatial);
    l.spatial = load_spatial_graph(in.spatial);
  } else if (need_spatial) {
    throw ConfigError("--spatial is required for this command");
  }
  return l;
}

DistanceMatrix distances(const Loaded& l) { return shortest_path_metric(*l.spatial); }

std::string hex(const unsigned char* p, std::size_t n) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(p[i]);
  return os.str();
}

void write_manifest(const Context& ctx, const std::string& command, const fs::path& dir) {
  ordered_json j;
  j["tool"] = "corn";
  j["version"] = kVersion;
  j["command"] = command;
  j["args"] = ctx.recorded;
  auto& in = j["inputs"] = ordered_json::array();
  for (const auto& p : ctx.inputs) in.push_back({{"path", fs::absolute(p).lexically_normal().string()}, {"sha256", sha256_file(p)}});
  j["config"] = ctx.config;
  j["seed"] = ctx.seed;
  j["created_at"] = ctx.created_at ? *ctx.created_at : timestamp_now();
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel != "manifest.json") files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  auto& outs = j["outputs"] = ordered_json::array();
  for (const auto& f : files) outs.push_back({{"path", f}, {"sha256", sha256_file(dir / f)}});
  csv::open_for_write(dir / "manifest.json") << j.dump(2) << '\n';
}

/// Input paths become absolute; --out and its value are dropped.
std::vector<std::string> record_args(const std::vector<std::string>& args) {
  std::vector<std::string> r;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    const auto eq = a.find('=');
    const std::string flag = a.substr(0, eq);
    if (flag == "--out") {
      if (eq == std::string::npos) ++i;
      continue;
    }
    if (kPathFlags.count(flag)) {
      if (eq != std::string::npos) {
        r.push_back(flag + "=" + fs::absolute(a.substr(eq + 1)).lexically_normal().string());
      } else {
        r.push_back(a);
        if (i + 1 < args.size()) r.push_back(fs::absolute(args[++i]).lexically_normal().string());
      }
      continue;
    }
    r.push_back(a);
  }
  return r;
}

int status_exit(SolveOutcome::Status s) {
  switch (s) {
    case SolveOutcome::Status::Optimal:
      return kOk;
    case SolveOutcome::Status::Infeasible:
      return kInfeasible;
    case SolveOutcome::Status::TimedOut:
      return kTimedOut;
  }
  return kFailure;
}

HcpScope parse_scope(const std::string& s) {
  if (s == "all") return HcpScope::All;
  if (s == "ns_only") return HcpScope::NonSubstitutableOnly;
  throw ConfigError("--hcp-scope must be 'all' or 'ns_only'");
}

struct ModelFlags {
  std::size_t k = 1;
  std::string d_star = "inf";
  std::string y_star = "inf";
  std::optional<double> z;
  double rho = DiseaseParams{}.rho;
  std::int64_t unit_s = 60;
  std::string scope = "all";
  std::string weights;

  void add(CLI::App* app) {
    app->add_option("--k", k, "number of bubbles")->required();
    app->add_option("--d-star-m", d_star, "bubble diameter bound in meters, or inf");
    app->add_option("--y-star-h", y_star, "load-gap bound in hours/day, or inf");
    app->add_option("--z", z, "per-interval transmission probability");
    app->add_option("--rho", rho, "infectivity per minute; z defaults to rho * unit minutes");
    app->add_option("--unit-s", unit_s, "interval length for weights");
    app->add_option("--hcp-scope", scope, "HCPs that carry weight: all or ns_only");
    app->add_option("--weights", weights, "precomputed weights CSV");
  }

  double z_value() const { return z ? *z : std::min(1.0, rho * static_cast<double>(unit_s) / 60.0); }
};

IlpModel model_from(const ModelFlags& f, const Loaded& l, Context& ctx) {
  const double z = f.z_value();
  WeightMatrix w;
  if (!f.weights.empty()) {
    ctx.inputs.push_back(f.weights);
    w = load_weights_csv(f.weights, l.graph.locations(), z);
  } else {
    w = weight_matrix(l.graph, z, f.unit_s, parse_scope(f.scope));
  }
  const double d_star = parse_bound(f.d_star, "--d-star-m");
  const double y_star = parse_bound(f.y_star, "--y-star-h");
  ctx.config["k"] = f.k;
  ctx.config["d_star_m"] = std::isfinite(d_star) ? ordered_json(d_star) : ordered_json();
  ctx.config["y_star_h"] = std::isfinite(y_star) ? ordered_json(y_star) : ordered_json();
  ctx.config["z"] = z;
  ctx.config["unit_s"] = f.unit_s;
  ctx.config["hcp_scope"] = f.scope;
  const auto dist = distances(l);
  return build_model(w, dist, compute_loads_demands(l.graph), l.graph.hcps(), l.graph.locations(), f.k, d_star,
                     y_star);
}

int execute(const std::vector<std::string>& args, Context& ctx);

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, Context& ctx) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open " + manifest_path);
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  for (const auto& i : m.at("inputs")) {
    const auto path = i.at("path").get<std::string>();
    if (!fs::exists(path)) throw ConfigError("recorded input is missing: " + path);
    if (sha256_file(path) != i.at("sha256").get<std::string>()) throw ConfigError("recorded input has changed: " + path);
  }
  auto args = m.at("args").get<std::vector<std::string>>();
  args.push_back("--out");
  args.push_back(out_dir);
  Context inner{ctx.out, ctx.err, {}, m.at("created_at").get<std::string>(), {}, ordered_json::object(), 0};
  return execute(args, inner);
}

int execute(const std::vector<std::string>& args, Context& ctx) {
  CLI::App app{"Bubble clustering of HCPs and rooms, rewiring, costs, and epidemic evaluation", "corn"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string out_dir;
  std::uint64_t seed = 0;

  Inputs in;
  // validate
  auto* v = app.add_subcommand("validate", "check a mobility log against its rosters");
  in.add(v);

  // weights
  auto* w = app.add_subcommand("weights", "pairwise transmission weights between rooms");
  Inputs w_in;
  w_in.add(w);
  std::optional<double> w_z;
  double w_rho = DiseaseParams{}.rho;
  std::int64_t w_unit = 60;
  std::string w_scope = "all";
  w->add_option("--z", w_z);
  w->add_option("--rho", w_rho);
  w->add_option("--unit-s", w_unit);
  w->add_option("--hcp-scope", w_scope);
  w->add_option("--out", out_dir)->required();

  // cluster / export
  auto* cl = app.add_subcommand("cluster", "solve the bubble clustering problem");
  Inputs cl_in;
  cl_in.add(cl);
  ModelFlags cl_f;
  cl_f.add(cl);
  double time_limit = kUnbounded;
  std::uint64_t node_limit = 0;
  cl->add_option("--time-limit-s", time_limit, "wall-clock limit (results then depend on machine speed)");
  cl->add_option("--node-limit", node_limit, "branch-and-bound node budget; 0 = none");
  cl->add_option("--seed", seed);
  cl->add_option("--out", out_dir)->required();

  auto* ex = app.add_subcommand("export", "write the ILP in LP or MPS format");
  Inputs ex_in;
  ex_in.add(ex);
  ModelFlags ex_f;
  ex_f.add(ex);
  std::string format = "lp";
  ex->add_option("--format", format)->check(CLI::IsMember({"lp", "mps"}));
  ex->add_option("--out", out_dir)->required();

  // synth
  auto* sy = app.add_subcommand("synth", "generate a synthetic facility and mobility log");
  std::string sy_spec;
  std::optional<std::uint64_t> sy_seed;
  sy->add_option("--facility", sy_spec, "facility spec JSON; defaults when omitted");
  sy->add_option("--seed", sy_seed, "overrides the spec seed");
  sy->add_option("--out", out_dir)->required();

  // rewire
  auto* rw = app.add_subcommand("rewire", "rewire a visit graph to a clustering and report costs");
  Inputs rw_in;
  rw_in.add(rw);
  std::string clustering;
  rw->add_option("--clustering", clustering)->required();
  rw->add_option("--seed", seed);
  bool keep_same_bubble = false;
  rw->add_flag("--keep-same-bubble-hcp", keep_same_bubble, "keep the original HCP on a same-bubble visit when free");
  rw->add_option("--out", out_dir)->required();

  // simulate
  auto* si = app.add_subcommand("simulate", "epidemic replicates on the baseline, a clustering, or random bubbles");
  Inputs si_in;
  si_in.add(si);
  std::string sim_config;
  std::optional<double> rho;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> random_k;
  std::string si_clustering;
  bool transmissions = false;
  std::optional<std::string> seed_group;
  si->add_option("--config", sim_config, "simulation config JSON");
  si->add_option("--seed-group", seed_group, "HCP group the index case is drawn from");
  si->add_option("--rho", rho);
  si->add_option("--replicates", replicates);
  si->add_option("--horizon-days", horizon);
  si->add_option("--seed", seed);
  si->add_option("--clustering", si_clustering, "rewire to this clustering first");
  si->add_option("--random-k", random_k, "fresh random K-bubble clustering per replicate");
  si->add_flag("--transmissions", transmissions, "write the transmission log");
  si->add_option("--out", out_dir)->required();

  // calibrate
  auto* ca = app.add_subcommand("calibrate", "find rho that reproduces a target R0");
  Inputs ca_in;
  ca_in.add(ca);
  double target_r0 = 2.86;
  std::string ca_config;
  std::optional<std::size_t> ca_reps;
  ca->add_option("--target-r0", target_r0);
  ca->add_option("--config", ca_config);
  ca->add_option("--replicates", ca_reps);
  ca->add_option("--seed-group", seed_group);
  ca->add_option("--seed", seed);
  ca->add_option("--out", out_dir)->required();

  // experiment
  auto* xp = app.add_subcommand("experiment", "baseline vs CoRN vs RANDOM across K");
  Inputs xp_in;
  xp_in.add(xp);
  std::string xp_config;
  std::vector<std::size_t> ks;
  std::optional<double> xp_rho, xp_r0, xp_time;
  std::optional<std::string> xp_d, xp_y;
  std::optional<std::size_t> xp_reps;
  std::optional<std::uint64_t> xp_seed, xp_nodes;
  std::optional<std::int64_t> xp_unit;
  bool xp_trans = false, xp_no_random = false;
  xp->add_option("--config", xp_config, "experiment config JSON; flags override it");
  xp->add_option("--k", ks, "bubble counts, e.g. 1,3,5")->delimiter(',');
  xp->add_option("--rho", xp_rho);
  xp->add_option("--target-r0", xp_r0);
  xp->add_option("--d-star-m", xp_d);
  xp->add_option("--y-star-h", xp_y);
  xp->add_option("--replicates", xp_reps);
  xp->add_option("--seed", xp_seed);
  xp->add_option("--unit-s", xp_unit);
  xp->add_option("--time-limit-s", xp_time);
  xp->add_option("--node-limit", xp_nodes);
  xp->add_flag("--transmissions", xp_trans);
  xp->add_flag("--no-random", xp_no_random, "skip the RANDOM arm");
  xp->add_option("--out", out_dir)->required();

  // replay
  auto* rp = app.add_subcommand("replay", "re-run a recorded command from its manifest");
  std::string manifest;
  rp->add_option("--manifest", manifest)->required();
  rp->add_option("--out", out_dir)->required();

  std::vector<std::string> argv_store{"corn"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    ctx.out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    ctx.out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    ctx.err << e.what() << '\n';
    return kUsage;
  }
  ctx.recorded = record_args(args);
  auto finish = [&](const char* cmd) { write_manifest(ctx, cmd, out_dir); };

  if (*v) {
    if (!in.facility.empty()) {
      auto spec = load_facility_spec(in.facility);
      auto f = generate_facility(spec);
      auto g = generate_mobility(f, spec);
      const auto violations = validate(g);
      for (const auto& x : violations) ctx.out << x.describe() << '\n';
      return violations.empty() ? kOk : kViolations;
    }
    if (in.visits.empty() || in.hcps.empty() || in.locations.empty()) {
      throw ConfigError("validate needs --visits, --hcps and --locations (or --facility)");
    }
    const auto hcps = load_hcp_roster(in.hcps);
    const auto locs = load_location_roster(in.locations);
    const auto raw = load_raw_visits(in.visits);
    const auto violations = validate(hcps, locs, raw);
    for (const auto& x : violations) ctx.out << x.describe() << '\n';
    if (!in.spatial.empty()) {
      const auto sg = load_spatial_graph(in.spatial);
      for (auto i : locs.substitutable_locations()) {
        if (!sg.location_map().count(locs.id(i))) ctx.out << "location '" << locs.id(i).str() << "' has no spatial node\n";
      }
    }
    ctx.out << violations.size() << " violation(s)\n";
    return violations.empty() ? kOk : kViolations;
  }

  if (*w) {
    auto l = load_inputs(w_in, ctx, false);
    const double z = w_z ? *w_z : std::min(1.0, w_rho * static_cast<double>(w_unit) / 60.0);
    const auto m = weight_matrix(l.graph, z, w_unit, parse_scope(w_scope));
    fs::create_directories(out_dir);
    write_weights_csv(m, fs::path(out_dir) / "weights.csv");
    ctx.config = {{"z", z}, {"unit_s", w_unit}, {"hcp_scope", w_scope}};
    finish("weights");
    ctx.out << m.entries().size() << " non-zero pairs\n";
    return kOk;
  }

  if (*cl) {
    auto l = load_inputs(cl_in, ctx, true);
    const auto model = model_from(cl_f, l, ctx);
    SolveOptions opt;
    opt.time_limit_s = time_limit;
    opt.node_limit = node_limit;
    opt.seed = seed;
    ctx.seed = seed;
    ctx.config["time_limit_s"] = std::isfinite(time_limit) ? ordered_json(time_limit) : ordered_json();
    ctx.config["node_limit"] = node_limit;
    const auto r = solve(model, opt);
    fs::create_directories(out_dir);
    ordered_json s;
    s["status"] = to_string(r.status);
    s["objective"] = r.clustering ? ordered_json(*r.clustering->objective_value) : ordered_json();
    s["bound"] = r.bound;
    s["nodes"] = r.nodes;
    csv::open_for_write(fs::path(out_dir) / "solve.json") << s.dump(2) << '\n';
    if (r.clustering) write_clustering_json(*r.clustering, fs::path(out_dir) / "clustering.json");
    finish("cluster");
    ctx.out << to_string(r.status);
    if (r.clustering) ctx.out << " objective " << csv::format_double(*r.clustering->objective_value);
    ctx.out << '\n';
    return status_exit(r.status);
  }

  if (*ex) {
    auto l = load_inputs(ex_in, ctx, true);
    const auto model = model_from(ex_f, l, ctx);
    ctx.config["format"] = format;
    fs::create_directories(out_dir);
    const auto fmt = format == "mps" ? ModelFormat::Mps : ModelFormat::Lp;
    csv::open_for_write(fs::path(out_dir) / ("model." + format)) << export_model(model, fmt);
    finish("export");
    const auto counts = count_vars_constraints(model);
    ctx.out << counts.variables << " variables, " << counts.constraints << " constraints\n";
    return kOk;
  }

  if (*sy) {
    FacilitySpec spec;
    if (!sy_spec.empty()) {
      ctx.inputs.push_back(sy_spec);
      spec = load_facility_spec(sy_spec);
    }
    if (sy_seed) spec.seed = *sy_seed;
    spec.validate();
    const auto f = generate_facility(spec);
    const auto g = generate_mobility(f, spec);
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    write_facility_spec(spec, dir / "facility.json");
    write_spatial_graph(f.spatial, dir / "spatial.json");
    write_hcp_roster_csv(f.hcps, dir / "hcps.csv");
    write_location_roster_csv(f.locations, dir / "locations.csv");
    write_visits_csv(g, dir / "visits.csv");
    ctx.seed = spec.seed;
    ctx.config = {{"facility_seed", spec.seed}};
    finish("synth");
    ctx.out << g.visits().size() << " visits over " << g.day_count() << " day(s)\n";
    return kOk;
  }

  if (*rw) {
    auto l = load_inputs(rw_in, ctx, true);
    ctx.inputs.push_back(clustering);
    const auto c = load_clustering_json(clustering);
    ctx.seed = seed;
    const auto gr = rewire(l.graph, c, seed, RewireOptions{keep_same_bubble});
    const auto costs = compute_costs(l.graph, gr, c, distances(l));
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    write_visits_csv(gr.graph, dir / "rewired_visits.csv");
    {
      auto os = csv::open_for_write(dir / "dropped_visits.csv");
      os << "hcp,location,start,end\n";
      for (auto i : gr.dropped) {
        const auto& x = l.graph.visits()[i];
        os << l.graph.hcps().id(x.hcp).str() << ',' << l.graph.locations().id(x.location).str() << ',' << x.start << ','
           << x.end << '\n';
      }
    }
    write_cost_report(costs, dir);
    finish("rewire");
    ctx.out << gr.graph.visits().size() << " visits kept, " << gr.dropped.size() << " dropped\n";
    return kOk;
  }

  if (*si) {
    auto l = load_inputs(si_in, ctx, false);
    SimConfig cfg;
    if (!sim_config.empty()) {
      ctx.inputs.push_back(sim_config);
      cfg = load_sim_config(sim_config);
    }
    if (rho) cfg.disease.rho = *rho;
    if (replicates) cfg.replicates = *replicates;
    if (horizon) cfg.horizon_days = *horizon;
    if (seed_group) cfg.seed_group = *seed_group;
    if (si->count("--seed")) cfg.seed = seed;
    cfg.keep_transmissions = transmissions;
    cfg.validate();
    ctx.seed = cfg.seed;
    SimSummary s;
    if (!si_clustering.empty() && random_k) throw ConfigError("--clustering and --random-k are exclusive");
    if (!si_clustering.empty()) {
      ctx.inputs.push_back(si_clustering);
      const auto c = load_clustering_json(si_clustering);
      const auto gr = rewire(l.graph, c, rng::derive(cfg.seed, rng::domain::kExperimentRewire, c.k));
      s = simulate(gr.graph, &c, cfg, "corn_k" + std::to_string(c.k));
    } else if (random_k) {
      check_k(*random_k, l.graph.locations().substitutable_locations().size(), l.graph.hcps());
      s = simulate_random_bubbles(l.graph, *random_k, cfg, "random_k" + std::to_string(*random_k));
    } else {
      s = simulate(l.graph, nullptr, cfg, "baseline");
    }
    fs::create_directories(out_dir);
    write_sim_summary(s, out_dir, transmissions);
    ctx.config = sim_config_to_json(cfg);
    finish("simulate");
    ctx.out << "mean infections " << csv::format_double(s.mean_infections()) << '\n';
    return kOk;
  }

  if (*ca) {
    auto l = load_inputs(ca_in, ctx, false);
    SimConfig cfg;
    if (!ca_config.empty()) {
      ctx.inputs.push_back(ca_config);
      cfg = load_sim_config(ca_config);
    }
    if (ca_reps) cfg.replicates = *ca_reps;
    if (seed_group) cfg.seed_group = *seed_group;
    if (ca->count("--seed")) cfg.seed = seed;
    cfg.validate();
    ctx.seed = cfg.seed;
    const auto c = calibrate_rho(l.graph, target_r0, cfg);
    ordered_json j;
    j["target_r0"] = target_r0;
    j["rho"] = c.rho;
    j["achieved_r0"] = {{"mean", c.achieved.mean}, {"ci_low", c.achieved.ci_low}, {"ci_high", c.achieved.ci_high}};
    j["monotone"] = c.monotone;
    auto& t = j["trace"] = ordered_json::array();
    for (const auto& e : c.trace) t.push_back({{"rho", e.rho}, {"r0", e.mean}});
    fs::create_directories(out_dir);
    csv::open_for_write(fs::path(out_dir) / "calibration.json") << j.dump(2) << '\n';
    ctx.config = sim_config_to_json(cfg);
    ctx.config["target_r0"] = target_r0;
    finish("calibrate");
    ctx.out << "rho " << csv::format_double(c.rho) << " R0 " << csv::format_double(c.achieved.mean) << '\n';
    return kOk;
  }

  if (*xp) {
    auto l = load_inputs(xp_in, ctx, true);
    ExperimentConfig cfg;
    if (!xp_config.empty()) {
      ctx.inputs.push_back(xp_config);
      cfg = load_experiment_config(xp_config);
    }
    if (!ks.empty()) cfg.ks = ks;
    if (xp_rho) cfg.rho = *xp_rho;
    if (xp_r0) {
      cfg.target_r0 = *xp_r0;
      cfg.rho.reset();
    }
    if (xp_d) cfg.d_star_m = parse_bound(*xp_d, "--d-star-m");
    if (xp_y) cfg.y_star_h = parse_bound(*xp_y, "--y-star-h");
    if (xp_reps) cfg.sim.replicates = *xp_reps;
    if (xp_seed) cfg.sim.seed = *xp_seed;
    if (xp_unit) cfg.unit_s = *xp_unit;
    if (xp_time) cfg.solve.time_limit_s = *xp_time;
    if (xp_nodes) cfg.solve.node_limit = *xp_nodes;
    if (xp_trans) cfg.transmissions = true;
    if (xp_no_random) cfg.random_arm = false;
    cfg.validate();
    ctx.seed = cfg.sim.seed;
    const auto result = run_experiment(l.graph, distances(l), cfg);
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    write_experiment_config(cfg, dir / "config.json");
    if (l.facility) {
      const auto fdir = dir / "facility";
      fs::create_directories(fdir);
      write_facility_spec(*l.spec, fdir / "facility.json");
      write_spatial_graph(l.facility->spatial, fdir / "spatial.json");
      write_hcp_roster_csv(l.facility->hcps, fdir / "hcps.csv");
      write_location_roster_csv(l.facility->locations, fdir / "locations.csv");
      write_visits_csv(l.graph, fdir / "visits.csv");
    }
    write_experiment(result, l.graph, cfg, dir);
    std::ifstream cj(dir / "config.json");
    ctx.config = ordered_json::parse(cj);
    finish("experiment");
    for (const auto& a : result.comparison.arms) {
      ctx.out << a.label << ": mean " << csv::format_double(a.mean) << " [" << csv::format_double(a.ci_low) << ", "
              << csv::format_double(a.ci_high) << "]";
      if (a.reach_pct) ctx.out << " reach " << csv::format_double(*a.reach_pct) << "%";
      ctx.out << '\n';
    }
    return kOk;
  }

  if (*rp) return cmd_replay(manifest, out_dir, ctx);
  return kUsage;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  EVP_MD_CTX* md = EVP_MD_CTX_new();
  EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(md, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md, digest, &len);
  EVP_MD_CTX_free(md);
  return hex(digest, len);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, {}, std::nullopt, {}, ordered_json::object(), 0};
  try {
    return execute(args, ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace corn::cli
