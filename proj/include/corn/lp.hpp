#pragma once

// Dense two-phase primal simplex for small LPs: min c'x s.t. rows, x >= 0.

#include <cstddef>
#include <utility>
#include <vector>

namespace corn::lp {

enum class Sense { Le, Ge, Eq };

struct Row {
  std::vector<std::pair<std::size_t, double>> terms;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct Problem {
  std::size_t num_vars = 0;
  std::vector<double> cost;
  std::vector<Row> rows;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
};

Result solve(const Problem& p, std::size_t max_iterations = 50000);

}  // namespace corn::lp
