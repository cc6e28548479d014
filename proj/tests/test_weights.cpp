#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "corn/weights.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace corn;
using fixtures::make_graph;

namespace {

LocationId L(const char* s) { return LocationId(s); }

// Unit-length visits (60 s) in the given order for each HCP.
VisitGraph sequence_graph(const std::vector<std::vector<std::string>>& seqs) {
  std::vector<fixtures::Hcp> hcps;
  std::vector<RawVisit> visits;
  for (std::size_t h = 0; h < seqs.size(); ++h) {
    hcps.push_back({"p" + std::to_string(h), "n"});
    for (std::size_t i = 0; i < seqs[h].size(); ++i) {
      const auto t = static_cast<std::int64_t>(60 * (2 * i + h));
      visits.push_back({"p" + std::to_string(h), seqs[h][i], t, t + 60});
    }
  }
  return make_graph(hcps, {{"a"}, {"b"}, {"c"}}, visits);
}

}  // namespace

TEST_CASE("directed weight on small sequences") {
  auto g = sequence_graph({{"a", "b"}});
  CHECK(directed_weight(g, L("a"), L("b"), 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(directed_weight(g, L("b"), L("a"), 0.5) == 0.0);
  CHECK(directed_weight(g, L("a"), L("b"), 0.0) == 0.0);

  auto g2 = sequence_graph({{"a", "b", "b"}});
  CHECK(directed_weight(g2, L("a"), L("b"), 0.5) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(oracles::enumerate_directed_weight(g2, 0, 1, 0.5) == doctest::Approx(0.375).epsilon(1e-15));

  auto two = sequence_graph({{"a", "b"}, {"a", "b"}});
  CHECK(directed_weight(two, L("a"), L("b"), 0.5) == doctest::Approx(1.0 - 0.75 * 0.75));
  CHECK(directed_weight(two, L("a"), L("b"), 0.5) == doctest::Approx(0.4375));
}

TEST_CASE("chain probability closed form") {
  CHECK(chain_probability({true, false}, 0.5) == doctest::Approx(0.25));
  CHECK(chain_probability({true, false, false}, 0.5) == doctest::Approx(0.375));
  CHECK(chain_probability({false, true}, 0.5) == 0.0);
  CHECK(chain_probability({true, true, false}, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("weight matrix symmetrises directed weights") {
  auto g = sequence_graph({{"a", "b"}});
  auto w = weight_matrix(g, 0.5, 60);
  CHECK(w.get(L("a"), L("b")) == doctest::Approx(0.125));
  CHECK(w.get(L("b"), L("a")) == doctest::Approx(0.125));
  CHECK(w.get(L("a"), L("c")) == 0.0);
  CHECK(w.entries().size() == 1);

  auto apart = sequence_graph({{"a"}, {"b"}});
  CHECK(weight_matrix(apart, 0.5, 60).entries().empty());
}

TEST_CASE("directed weight requires uniform intervals") {
  auto g = make_graph({{"p", "n"}}, {{"a"}, {"b"}}, {{"p", "a", 0, 60}, {"p", "b", 60, 200}});
  CHECK_THROWS_AS(directed_weight(g, L("a"), L("b"), 0.5), NotChoppedError);
  auto c = chop_intervals(g, 60);
  CHECK_NOTHROW(directed_weight(c, L("a"), L("b"), 0.5));
}

TEST_CASE("weights are not symmetric in direction") {
  auto g = sequence_graph({{"a", "b", "a", "a"}});
  const double ab = directed_weight(g, L("a"), L("b"), 0.3);
  const double ba = directed_weight(g, L("b"), L("a"), 0.3);
  CHECK(ab != doctest::Approx(ba));
}

TEST_CASE("HCP scope restricts contributing HCPs") {
  auto g = make_graph({{"n1", "n"}, {"x", ""}}, {{"a"}, {"b"}},
                      {{"n1", "a", 0, 60}, {"n1", "b", 60, 120}, {"x", "b", 0, 60}, {"x", "a", 60, 120}});
  CHECK(directed_weight(g, L("a"), L("b"), 0.5, HcpScope::NonSubstitutableOnly) == 0.0);
  CHECK(directed_weight(g, L("b"), L("a"), 0.5, HcpScope::NonSubstitutableOnly) == doctest::Approx(0.25));
  CHECK(directed_weight(g, L("a"), L("b"), 0.5, HcpScope::All) == doctest::Approx(0.25));
  auto all = weight_matrix(g, 0.5, 60, HcpScope::All);
  auto ns = weight_matrix(g, 0.5, 60, HcpScope::NonSubstitutableOnly);
  CHECK(all.get(L("a"), L("b")) == doctest::Approx(0.25));
  CHECK(ns.get(L("a"), L("b")) == doctest::Approx(0.125));
}

TEST_CASE("directed weight matches exhaustive enumeration") {
  std::mt19937_64 rng(11);
  const char* rooms[] = {"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> seqs(1 + rng() % 4);
    std::size_t relevant = 0;
    for (auto& s : seqs) {
      const std::size_t len = 1 + rng() % 6;
      for (std::size_t i = 0; i < len; ++i) {
        s.push_back(rooms[rng() % 3]);
        relevant += s.back() != std::string("c");
      }
    }
    if (relevant > 16) continue;
    auto g = sequence_graph(seqs);
    const double z = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double exact = oracles::enumerate_directed_weight(g, 0, 1, z);
    CHECK(std::abs(directed_weight(g, L("a"), L("b"), z) - exact) <= 1e-12);
  }
}

TEST_CASE("weight matrix agrees with pairwise directed weights") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<fixtures::Hcp> hcps{{"p0", "n"}, {"p1", "n"}, {"p2", ""}};
    std::vector<fixtures::Loc> locs{{"a"}, {"b"}, {"c"}, {"d"}, {"h", false}};
    std::vector<RawVisit> visits;
    for (const auto& h : hcps) {
      std::int64_t t = 0;
      for (int i = 0; i < 8; ++i) {
        const std::int64_t d = 30 + static_cast<std::int64_t>(rng() % 150);
        visits.push_back({h.id, locs[rng() % locs.size()].id, t, t + d});
        t += d + static_cast<std::int64_t>(rng() % 50);
      }
    }
    auto g = make_graph(hcps, locs, visits);
    const double z = 0.05 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto w = weight_matrix(g, z, 60);
    auto c = chop_intervals(g, 60);
    for (const char* a : {"a", "b", "c", "d"}) {
      for (const char* b : {"a", "b", "c", "d"}) {
        if (std::string(a) >= b) continue;
        const double expect = (directed_weight(c, L(a), L(b), z) + directed_weight(c, L(b), L(a), z)) / 2.0;
        CHECK(w.get(L(a), L(b)) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("directed weight is non-decreasing in z") {
  std::mt19937_64 rng(3);
  const char* rooms[] = {"a", "b"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> seqs(1 + rng() % 3);
    for (auto& s : seqs) {
      for (std::size_t i = 0, len = 1 + rng() % 6; i < len; ++i) s.push_back(rooms[rng() % 2]);
    }
    auto g = sequence_graph(seqs);
    double prev = 0.0;
    for (double z = 0.0; z <= 1.0 + 1e-9; z += 0.05) {
      const double w = directed_weight(g, L("a"), L("b"), std::min(z, 1.0));
      CHECK(w >= prev - 1e-12);
      prev = w;
    }
  }
}

TEST_CASE("Monte Carlo weight estimate") {
  auto g = sequence_graph({{"a", "b"}});
  CHECK(mc_directed_weight(g, L("a"), L("b"), 0.5, 1000000, 42) == doctest::Approx(0.25).epsilon(0.02));
  CHECK(mc_directed_weight(g, L("a"), L("b"), 0.0, 1000, 42) == 0.0);
  CHECK(mc_directed_weight(g, L("a"), L("b"), 1.0, 1000, 42) == 1.0);
  CHECK(mc_directed_weight(g, L("a"), L("b"), 0.5, 1000, 42) == mc_directed_weight(g, L("a"), L("b"), 0.5, 1000, 42));
}

TEST_CASE("weights CSV round trip") {
  auto g = sequence_graph({{"a", "b", "c", "a"}, {"c", "b"}});
  auto w = weight_matrix(g, 0.4, 60);
  const auto path = std::filesystem::temp_directory_path() / "corn_weights_test.csv";
  write_weights_csv(w, path);
  auto back = load_weights_csv(path, g.locations(), 0.4);
  CHECK(back.entries() == w.entries());
  std::filesystem::remove(path);
}
