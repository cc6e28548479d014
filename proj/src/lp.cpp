#include "corn/lp.hpp"

#include <cmath>
#include <limits>

namespace corn::lp {

namespace {

constexpr double kEps = 1e-9;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  // Row m_ holds reduced costs; its rhs cell holds -objective.
  double& cost(std::size_t c) { return at(m_, c); }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) *= inv;
    at(r, c) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  /// Minimises the cost row over columns with allowed[c].
  Status optimise(const std::vector<bool>& allowed, std::size_t& budget) {
    std::size_t degenerate = 0;
    while (true) {
      if (budget == 0) return Status::IterationLimit;
      --budget;
      const bool bland = degenerate > 50;
      std::size_t enter = n_;
      double best = -kEps;
      for (std::size_t c = 0; c < n_; ++c) {
        if (!allowed[c] || cost(c) >= -kEps) continue;
        if (bland) {
          enter = c;
          break;
        }
        if (cost(c) < best) {
          best = cost(c);
          enter = c;
        }
      }
      if (enter == n_) return Status::Optimal;
      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        const double v = at(r, enter);
        if (v <= kEps) continue;
        const double q = rhs(r) / v;
        if (q < ratio - kEps || (q < ratio + kEps && leave < m_ && basis_[r] < basis_[leave])) {
          ratio = q;
          leave = r;
        }
      }
      if (leave == m_) return Status::Unbounded;
      degenerate = ratio < kEps ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_, n_;
  std::vector<double> a_;
  std::vector<std::size_t> basis_;
};

}  // namespace

Result solve(const Problem& p, std::size_t max_iterations) {
  const std::size_t m = p.rows.size();
  // Columns: structural, one slack/surplus per inequality, one artificial per row lacking a slack basis.
  std::size_t slacks = 0;
  for (const auto& row : p.rows) slacks += row.sense != Sense::Eq;
  std::vector<int> flip(m, 1);
  std::vector<Sense> sense(m);
  for (std::size_t r = 0; r < m; ++r) {
    sense[r] = p.rows[r].sense;
    if (p.rows[r].rhs < 0.0) {
      flip[r] = -1;
      if (sense[r] == Sense::Le) {
        sense[r] = Sense::Ge;
      } else if (sense[r] == Sense::Ge) {
        sense[r] = Sense::Le;
      }
    }
  }
  std::size_t artificials = 0;
  for (auto s : sense) artificials += s != Sense::Le;
  const std::size_t n = p.num_vars + slacks + artificials;
  Tableau t(m, n);
  std::vector<bool> is_artificial(n, false);
  std::size_t next_slack = p.num_vars;
  std::size_t next_art = p.num_vars + slacks;
  for (std::size_t r = 0; r < m; ++r) {
    for (auto [j, v] : p.rows[r].terms) t.at(r, j) += flip[r] * v;
    t.rhs(r) = flip[r] * p.rows[r].rhs;
    if (p.rows[r].sense != Sense::Eq) {
      t.at(r, next_slack) = sense[r] == Sense::Le ? 1.0 : -1.0;
      if (sense[r] == Sense::Le) t.basis()[r] = next_slack;
      ++next_slack;
    }
    if (sense[r] != Sense::Le) {
      t.at(r, next_art) = 1.0;
      is_artificial[next_art] = true;
      t.basis()[r] = next_art++;
    }
  }

  std::size_t budget = max_iterations;
  Result result;
  std::vector<bool> allowed(n, true);
  if (artificials > 0) {
    for (std::size_t c = 0; c < n; ++c) t.cost(c) = is_artificial[c] ? 1.0 : 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (!is_artificial[t.basis()[r]]) continue;
      for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= t.at(r, c);
    }
    const auto status = t.optimise(allowed, budget);
    if (status == Status::IterationLimit) return result;
    if (-t.rhs(m) > 1e-7) {
      result.status = Status::Infeasible;
      return result;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (!is_artificial[t.basis()[r]]) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (!is_artificial[c] && std::abs(t.at(r, c)) > kEps) {
          t.pivot(r, c);
          break;
        }
      }
    }
    for (std::size_t c = 0; c < n; ++c) allowed[c] = !is_artificial[c];
  }

  for (std::size_t c = 0; c <= n; ++c) t.cost(c) = 0.0;
  for (std::size_t j = 0; j < p.num_vars && j < p.cost.size(); ++j) t.cost(j) = p.cost[j];
  for (std::size_t r = 0; r < m; ++r) {
    const double f = t.cost(t.basis()[r]);
    if (f == 0.0) continue;
    for (std::size_t c = 0; c <= n; ++c) t.at(m, c) -= f * t.at(r, c);
  }
  result.status = t.optimise(allowed, budget);
  if (result.status != Status::Optimal) return result;
  result.objective = -t.rhs(m);
  result.x.assign(p.num_vars, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis()[r] < p.num_vars) result.x[t.basis()[r]] = t.rhs(r);
  }
  return result;
}

}  // namespace corn::lp
