#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "corn/lp.hpp"
#include "corn/optimizer.hpp"
#include "fixtures.hpp"
#include "instances.hpp"

using namespace corn;
using instances::Instance;
using instances::lname;
using instances::plain;
using instances::random_instance;

namespace {

SolveOutcome run(const Instance& in, std::size_t k, double d_star = kUnbounded, double y_star = kUnbounded) {
  return solve(build_model(in.weights, in.dist, in.ld, in.roster, in.locs, k, d_star, y_star));
}

SolveOutcome brute(const Instance& in, std::size_t k, double d_star = kUnbounded, double y_star = kUnbounded) {
  return brute_force_solve(in.weights, in.dist, in.ld, in.roster, in.locs, k, d_star, y_star);
}

Instance four_rooms() {
  return plain(4, {{0, 1, 0.9}, {2, 3, 0.8}, {0, 2, 0.01}, {0, 3, 0.01}, {1, 2, 0.01}, {1, 3, 0.01}});
}

// All balanced bipartitions of four rooms, by hand.
double four_room_oracle(const Instance& in) {
  auto w = [&](int a, int b) { return in.weights.get(LocationId(lname(a)), LocationId(lname(b))); };
  const int splits[3][2][2] = {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}, {{0, 3}, {1, 2}}};
  double best = kUnbounded;
  for (const auto& s : splits) {
    double cut = 0.0;
    for (int a : s[0]) {
      for (int b : s[1]) cut += w(a, b);
    }
    best = std::min(best, cut);
  }
  return best;
}

}  // namespace

TEST_CASE("four-room instance") {
  auto in = four_rooms();
  auto out = run(in, 2);
  REQUIRE(out.status == SolveOutcome::Status::Optimal);
  CHECK(*out.clustering->objective_value == doctest::Approx(0.04));
  CHECK(*out.clustering->objective_value == doctest::Approx(four_room_oracle(in)));
  const auto& lb = out.clustering->location_bubble;
  CHECK(lb.at(LocationId("l1")) == 0);
  CHECK(lb.at(LocationId("l2")) == 0);
  CHECK(lb.at(LocationId("l3")) == 1);
  CHECK(lb.at(LocationId("l4")) == 1);
  auto b = brute(in, 2);
  REQUIRE(b.status == SolveOutcome::Status::Optimal);
  CHECK(*b.clustering->objective_value == doctest::Approx(0.04));
}

TEST_CASE("single bubble and singleton bubbles") {
  auto in = four_rooms();
  auto one = run(in, 1);
  REQUIRE(one.status == SolveOutcome::Status::Optimal);
  CHECK(*one.clustering->objective_value == 0.0);
  for (const auto& [loc, b] : one.clustering->location_bubble) CHECK(b == 0);
  CHECK(*brute(in, 1).clustering->objective_value == 0.0);

  auto all = run(in, 4);
  REQUIRE(all.status == SolveOutcome::Status::Optimal);
  CHECK(*all.clustering->objective_value == doctest::Approx(0.9 + 0.8 + 4 * 0.01));
  CHECK(*brute(in, 4).clustering->objective_value == doctest::Approx(0.9 + 0.8 + 4 * 0.01));
}

TEST_CASE("diameter can make the model infeasible") {
  auto in = plain(2, {{0, 1, 0.5}}, {0.0, 20.0});
  CHECK(run(in, 1, 15.0).status == SolveOutcome::Status::Infeasible);
  CHECK(brute(in, 1, 15.0).status == SolveOutcome::Status::Infeasible);
  CHECK(run(in, 1, 20.0).status == SolveOutcome::Status::Optimal);
}

TEST_CASE("invalid K") {
  auto in = four_rooms();
  CHECK_THROWS_AS(run(in, 0), InvalidK);
  CHECK_THROWS_AS(run(in, 5), InvalidK);
  in.roster = HcpRoster::from_entries({{HcpId("a"), "n"}, {HcpId("b"), "n"}});
  in.ld.room_load.assign(2, 1.0);
  in.ld.group_demand.assign(1, std::vector<double>(4, 0.0));
  CHECK_THROWS_AS(run(in, 3), InvalidK);
  CHECK_THROWS_AS(brute(in, 3), InvalidK);
}

TEST_CASE("brute force size guard") {
  auto in = plain(11, {});
  CHECK_THROWS_AS(brute(in, 2), TooLarge);
}

TEST_CASE("model counts") {
  SUBCASE("four rooms, two bubbles, finite diameter") {
    auto in = plain(4, {{0, 1, .1}, {0, 2, .1}, {0, 3, .1}, {1, 2, .1}, {1, 3, .1}, {2, 3, .1}});
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, 15.0, kUnbounded);
    std::map<std::string, std::size_t> by_tag;
    for (const auto& c : m.constraints) ++by_tag[c.tag];
    CHECK(by_tag["connect1"] + by_tag["connect2"] == 24);
    CHECK(by_tag["oneBubble"] == 4);
    CHECK(by_tag["equalSizes"] == 2);
    CHECK(by_tag["diameter"] == 6);
    CHECK(count_vars_constraints(m) == ModelCounts{14, 36});
  }
  SUBCASE("far pairs cannot share a bubble in the exported rows") {
    // Two clusters 30 m apart, no weights: every cross pair is far.
    auto in = plain(4, {}, {0, 0, 30, 30});
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, 10.0, kUnbounded);
    CHECK(far_pairs(m) == 4);
    std::size_t diameter_rows = 0;
    for (const auto& c : m.constraints) diameter_rows += c.tag == "diameter";
    CHECK(diameter_rows == 4 + 4 * 2);
    // l1 with l3, l2 with l4, every e at 1: satisfies the e rows but not the pair rows.
    std::vector<double> x(m.variables.size(), 0.0);
    for (std::size_t e = 0; e < m.e_pairs.size(); ++e) x[e] = 1.0;
    x[m.x_var(0, 0)] = x[m.x_var(2, 0)] = x[m.x_var(1, 1)] = x[m.x_var(3, 1)] = 1.0;
    std::size_t violated = 0;
    for (const auto& c : m.constraints) {
      double lhs = 0.0;
      for (const auto& t : c.terms) lhs += t.coef * x[t.var];
      const bool ok = c.sense == RowSense::Le ? lhs <= c.rhs + 1e-9 : c.sense == RowSense::Ge ? lhs >= c.rhs - 1e-9 : std::abs(lhs - c.rhs) <= 1e-9;
      violated += !ok;
    }
    CHECK(violated == 2);
  }
  SUBCASE("one bubble, two rooms") {
    auto in = plain(2, {{0, 1, 0.3}});
    in.roster = HcpRoster::from_entries({{HcpId("a"), "n"}, {HcpId("b"), "n"}, {HcpId("c"), ""}});
    in.ld.room_load.assign(3, 1.0);
    in.ld.group_demand.assign(1, std::vector<double>(2, 0.0));
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 1, kUnbounded, kUnbounded);
    CHECK(count_vars_constraints(m).variables == 3 + 2);
  }
  SUBCASE("no weights, unbounded diameter") {
    auto in = plain(5, {});
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, kUnbounded, kUnbounded);
    CHECK(m.e_pairs.empty());
  }
  SUBCASE("tags are drawn from the fixed set") {
    std::mt19937_64 rng(1);
    auto in = random_instance(rng, 6, 2);
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, 10.0, 1.0);
    const std::set<std::string> tags{"connect1", "connect2", "oneBubble", "equalSizes",
                                     "diameter", "hcpEqual", "hcpExactlyOne", "boundLoad"};
    for (const auto& c : m.constraints) CHECK(tags.count(c.tag) == 1);
  }
}

TEST_CASE("closed-form counts match built models") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 4);
    auto in = random_instance(rng, n, k);
    const double d_star = rng() % 2 ? kUnbounded : 8.0;
    const double y_star = rng() % 2 ? kUnbounded : 1.5;
    auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, k, d_star, y_star);
    std::vector<std::size_t> sizes;
    for (std::size_t g = 0; g < in.roster.group_count(); ++g) sizes.push_back(in.roster.group_members(g).size());
    CHECK(count_vars_constraints(m) ==
          closed_form_counts(n, sizes, m.e_pairs.size(), k, std::isfinite(d_star), std::isfinite(y_star),
                                       far_pairs(m)));
  }
}

TEST_CASE("branch and bound agrees with brute force") {
  std::mt19937_64 rng(2024);
  int infeasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 4 + rng() % 5;
    const std::size_t k = 2 + rng() % 2;
    auto in = random_instance(rng, n, k);
    const double d_star = rng() % 3 == 0 ? kUnbounded : 4.0 + static_cast<double>(rng() % 16);
    const double y_star = rng() % 3 == 0 ? kUnbounded : static_cast<double>(rng() % 30) / 10.0;
    auto a = run(in, k, d_star, y_star);
    auto b = brute(in, k, d_star, y_star);
    CAPTURE(trial);
    REQUIRE(a.status == b.status);
    if (a.status != SolveOutcome::Status::Optimal) {
      ++infeasible;
      continue;
    }
    CHECK(*a.clustering->objective_value == doctest::Approx(*b.clustering->objective_value).epsilon(1e-12));
    CHECK(*a.clustering->objective_value == doctest::Approx(cut_weight(*a.clustering, in.weights)).epsilon(1e-12));
    CHECK(verify_clustering(*a.clustering, in.dist, in.ld, in.roster, in.locs, d_star, y_star).empty());
    CHECK(*a.clustering == canonicalize(*a.clustering));
  }
  CHECK(infeasible > 5);
}

TEST_CASE("permuting bubble labels leaves the cut unchanged") {
  auto in = four_rooms();
  auto out = run(in, 2);
  auto c = *out.clustering;
  for (auto& [loc, b] : c.location_bubble) b = 1 - b;
  CHECK(cut_weight(c, in.weights) == doctest::Approx(*out.clustering->objective_value));
  CHECK(canonicalize(c) == *out.clustering);
}

TEST_CASE("worked-example partition is optimal for weights that encode it") {
  auto in = plain(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  auto g = fixtures::worked_example();
  in.roster = g.hcps();
  in.ld = compute_loads_demands(g);
  auto out = run(in, 2);
  REQUIRE(out.status == SolveOutcome::Status::Optimal);
  CHECK(*out.clustering->objective_value == 0.0);
  CHECK(out.clustering->location_bubble.at(LocationId("l2")) == 0);
  CHECK(out.clustering->location_bubble.at(LocationId("l3")) == 1);
  CHECK(out.clustering->location_bubble.at(LocationId("l4")) == 1);
  CHECK(out.clustering->hcp_bubble.size() == 5);
  CHECK(verify_clustering(*out.clustering, in.dist, in.ld, in.roster, in.locs, kUnbounded, kUnbounded).empty());
}

TEST_CASE("node limit yields a deterministic TimedOut") {
  std::mt19937_64 rng(8);
  auto in = random_instance(rng, 8, 2);
  auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, kUnbounded, kUnbounded);
  SolveOptions opt;
  opt.node_limit = 3;
  auto a = solve(m, opt);
  auto b = solve(m, opt);
  CHECK(a.status == SolveOutcome::Status::TimedOut);
  CHECK(a.nodes == b.nodes);
  REQUIRE(a.clustering.has_value() == b.clustering.has_value());
  if (a.clustering) CHECK(*a.clustering == *b.clustering);
}

TEST_CASE("LP export") {
  auto in = plain(4, {{0, 1, .5}, {0, 2, .25}, {0, 3, .125}, {1, 2, 1}, {1, 3, 2}, {2, 3, 3}}, {0, 5, 10, 15});
  auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, 12.0, kUnbounded);
  const auto text = export_model(m, ModelFormat::Lp);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line == "Minimize");
  std::getline(is, line);
  CHECK(line.rfind(" obj: ", 0) == 0);
  std::size_t terms = 0;
  for (std::size_t pos = 0; (pos = line.find("e_", pos)) != std::string::npos; ++pos) ++terms;
  CHECK(terms == 6);
  CHECK(line.find("0.125 e_l1_l4") != std::string::npos);
  CHECK(text.find("diameter_l1_l4: 15 e_l1_l4 >= 3") != std::string::npos);
  CHECK(text.find("x_l1_2") != std::string::npos);

  auto open = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, kUnbounded, kUnbounded);
  const auto unbounded = export_model(open, ModelFormat::Lp);
  CHECK(unbounded.find("diameter") == std::string::npos);
  CHECK(unbounded.find("boundLoad") == std::string::npos);

  const auto mps = export_model(m, ModelFormat::Mps);
  CHECK(mps.rfind("NAME", 0) == 0);
  CHECK(mps.find(" BV BND e_l1_l2") != std::string::npos);
  CHECK(mps.find("ENDATA") != std::string::npos);
}

TEST_CASE("clustering JSON round trip") {
  auto out = run(four_rooms(), 2);
  const auto path = std::filesystem::temp_directory_path() / "corn_clustering_test.json";
  write_clustering_json(*out.clustering, path);
  CHECK(load_clustering_json(path) == *out.clustering);
  std::filesystem::remove(path);
}

TEST_CASE("dense simplex") {
  using namespace corn::lp;
  SUBCASE("textbook maximisation") {
    // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    Problem p{2, {-3, -5}, {{{{0, 1}}, Sense::Le, 4}, {{{1, 2}}, Sense::Le, 12}, {{{0, 3}, {1, 2}}, Sense::Le, 18}}};
    auto r = solve(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(-36));
    CHECK(r.x[0] == doctest::Approx(2));
    CHECK(r.x[1] == doctest::Approx(6));
  }
  SUBCASE("equality and >= rows") {
    // min x + y s.t. x + y >= 2, x - y = 1 -> 2 at (1.5, 0.5)
    Problem p{2, {1, 1}, {{{{0, 1}, {1, 1}}, Sense::Ge, 2}, {{{0, 1}, {1, -1}}, Sense::Eq, 1}}};
    auto r = solve(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(2));
    CHECK(r.x[0] == doctest::Approx(1.5));
  }
  SUBCASE("infeasible and unbounded") {
    Problem inf{1, {1}, {{{{0, 1}}, Sense::Ge, 2}, {{{0, 1}}, Sense::Le, 1}}};
    CHECK(solve(inf).status == Status::Infeasible);
    Problem unb{1, {-1}, {{{{0, 1}}, Sense::Ge, 2}}};
    CHECK(solve(unb).status == Status::Unbounded);
  }
  SUBCASE("negative right-hand side") {
    // min x s.t. -x <= -3 -> 3
    Problem p{1, {1}, {{{{0, -1}}, Sense::Le, -3}}};
    auto r = solve(p);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(3));
  }
  SUBCASE("relaxation bounds the integer optimum") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      auto in = random_instance(rng, 5, 2);
      auto m = build_model(in.weights, in.dist, in.ld, in.roster, in.locs, 2, kUnbounded, kUnbounded);
      Problem p;
      p.num_vars = m.variables.size();
      for (const auto& v : m.variables) p.cost.push_back(v.objective);
      for (const auto& c : m.constraints) {
        Row r;
        for (const auto& t : c.terms) r.terms.emplace_back(t.var, t.coef);
        r.sense = c.sense == RowSense::Le ? Sense::Le : c.sense == RowSense::Ge ? Sense::Ge : Sense::Eq;
        r.rhs = c.rhs;
        p.rows.push_back(r);
      }
      auto r = solve(p);
      REQUIRE(r.status == Status::Optimal);
      auto exact = corn::solve(m);
      CHECK(r.objective <= *exact.clustering->objective_value + 1e-9);
    }
  }
}
