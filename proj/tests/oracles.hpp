#pragma once

// Independent reference computations used only by tests.

#include <cstdint>
#include <vector>

#include "corn/core_model.hpp"

namespace oracles {

/// Enumerates every joint success/failure outcome of the relevant unit intervals (each succeeds with
/// probability z) and sums the probability that some HCP picks up the infection at `from` and later
/// passes it to `to`.
inline double enumerate_directed_weight(const corn::VisitGraph& g, std::size_t from, std::size_t to, double z) {
  struct Slot {
    std::size_t hcp;
    bool at_from;
  };
  std::vector<std::vector<bool>> per_hcp(g.hcps().size());
  for (const auto& v : g.visits()) {
    if (v.location == from || v.location == to) per_hcp[v.hcp].push_back(v.location == from);
  }
  std::vector<Slot> slots;
  for (std::size_t h = 0; h < per_hcp.size(); ++h) {
    for (bool f : per_hcp[h]) slots.push_back({h, f});
  }
  const std::size_t n = slots.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= (mask >> i) & 1 ? z : 1.0 - z;
    if (p == 0.0) continue;
    bool event = false;
    std::size_t i = 0;
    while (i < n && !event) {
      const std::size_t h = slots[i].hcp;
      bool carrying = false;
      for (; i < n && slots[i].hcp == h; ++i) {
        const bool success = (mask >> i) & 1;
        if (slots[i].at_from && success) carrying = true;
        if (!slots[i].at_from && success && carrying) event = true;
      }
    }
    if (event) total += p;
  }
  return total;
}

}  // namespace oracles
