#pragma once

// Dense two-phase primal simplex on a full tableau.
//
// Pricing is Dantzig (most negative reduced cost) with a Harris two-pass
// ratio test. After 3 x (columns) consecutive degenerate pivots the solver
// switches to Bland's lowest-index rule for both entering and leaving
// choices until a pivot makes progress again.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "mgca/lp.hpp"

namespace mgca::lp {

struct SolverOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  /// Defaults to 50 x (rows + columns) of the standard form.
  std::optional<std::size_t> iteration_limit;
};

namespace detail {

class Tableau {
public:
  Tableau(const StandardForm& sf, const SolverOptions& opt) : opt_(opt) {
    const Problem& p = sf.problem;
    rows_ = p.num_rows();
    cols_ = p.num_vars();

    // Normalize to b >= 0 and find rows that already carry a unit column.
    std::vector<std::vector<double>> a(rows_);
    std::vector<double> b(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      a[i] = p.constraints[i].coeffs;
      b[i] = p.constraints[i].rhs;
      if (b[i] < 0.0) {
        b[i] = -b[i];
        for (double& v : a[i]) v = -v;
      }
    }
    std::vector<std::optional<std::size_t>> unit_for_row(rows_);
    for (std::size_t j = 0; j < cols_; ++j) {
      std::size_t hits = 0, where = 0;
      bool unit = true;
      for (std::size_t i = 0; i < rows_ && unit; ++i) {
        if (a[i][j] != 0.0) {
          ++hits;
          where = i;
          if (a[i][j] != 1.0 || hits > 1) unit = false;
        }
      }
      if (unit && hits == 1 && !unit_for_row[where]) unit_for_row[where] = j;
    }

    artificials_ = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (!unit_for_row[i]) ++artificials_;
    }
    width_ = cols_ + artificials_ + 1;
    data_.assign(rows_ * width_, 0.0);
    basis_.resize(rows_);
    std::size_t art = cols_;
    for (std::size_t i = 0; i < rows_; ++i) {
      double* row = row_ptr(i);
      std::copy(a[i].begin(), a[i].end(), row);
      row[rhs_col()] = b[i];
      if (unit_for_row[i]) {
        basis_[i] = *unit_for_row[i];
      } else {
        row[art] = 1.0;
        basis_[i] = art++;
      }
    }

    phase1_.assign(width_, 0.0);
    phase2_.assign(width_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) phase2_[j] = p.objective[j];
    for (std::size_t j = cols_; j < cols_ + artificials_; ++j) phase1_[j] = 1.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* row = row_ptr(i);
      const std::size_t bj = basis_[i];
      if (bj >= cols_) {
        for (std::size_t j = 0; j < width_; ++j) phase1_[j] -= row[j];
      } else if (phase2_[bj] != 0.0) {
        const double f = phase2_[bj];
        for (std::size_t j = 0; j < width_; ++j) phase2_[j] -= f * row[j];
      }
    }
    limit_ = opt.iteration_limit.value_or(50 * (rows_ + cols_));
  }

  enum class Outcome { optimal, unbounded, limit };

  Outcome run(int phase) {
    std::vector<double>& d = phase == 1 ? phase1_ : phase2_;
    while (true) {
      if (iterations_ >= limit_) return Outcome::limit;
      const auto entering = choose_entering(d);
      if (!entering) return Outcome::optimal;
      const auto leaving = choose_leaving(*entering);
      if (!leaving) return Outcome::unbounded;
      const double step = row_ptr(*leaving)[rhs_col()] / row_ptr(*leaving)[*entering];
      pivot(*leaving, *entering);
      ++iterations_;
      if (step <= 1e-12) {
        if (++degenerate_run_ > 3 * cols_) bland_ = true;
      } else {
        degenerate_run_ = 0;
        bland_ = false;
      }
    }
  }

  /// Replaces the phase-2 cost row, keeping the current (feasible) basis.
  void set_objective(const std::vector<double>& cost) {
    phase2_.assign(width_, 0.0);
    std::copy(cost.begin(), cost.end(), phase2_.begin());
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t bj = basis_[i];
      if (bj >= cols_ || phase2_[bj] == 0.0) continue;
      const double f = phase2_[bj];
      const double* row = row_ptr(i);
      for (std::size_t j = 0; j < width_; ++j) phase2_[j] -= f * row[j];
      phase2_[bj] = 0.0;
    }
    iterations_ = 0;
    degenerate_run_ = 0;
    bland_ = false;
  }

  double phase1_objective() const { return -phase1_[rhs_col()]; }

  /// Row holding the artificial with the largest value, if any is positive.
  std::optional<std::size_t> worst_artificial_row() const {
    std::optional<std::size_t> worst;
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] >= cols_ && row_ptr(i)[rhs_col()] > best) {
        best = row_ptr(i)[rhs_col()];
        worst = i;
      }
    }
    return worst;
  }

  /// Pivots zero-level artificials out of the basis where a structural
  /// column is available; rows without one are redundant and stay inert.
  void expel_artificials() {
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      const double* row = row_ptr(i);
      std::size_t best_col = cols_;
      double best = 1e-9;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          best_col = j;
        }
      }
      if (best_col < cols_) {
        pivot(i, best_col);
        ++iterations_;
      }
    }
  }

  std::vector<double> primal() const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) x[basis_[i]] = std::max(0.0, row_ptr(i)[rhs_col()]);
    }
    return x;
  }

  std::vector<double> reduced_costs() const {
    return std::vector<double>(phase2_.begin(), phase2_.begin() + static_cast<std::ptrdiff_t>(cols_));
  }

  std::vector<std::size_t> basis() const {
    std::vector<std::size_t> out;
    for (std::size_t bj : basis_) {
      if (bj < cols_) out.push_back(bj);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::vector<std::size_t>& row_basis() const { return basis_; }
  std::size_t iterations() const { return iterations_; }

private:
  double* row_ptr(std::size_t i) { return data_.data() + i * width_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * width_; }
  std::size_t rhs_col() const { return width_ - 1; }

  std::optional<std::size_t> choose_entering(const std::vector<double>& d) const {
    // Artificials never re-enter once they leave the basis.
    std::optional<std::size_t> best;
    double best_value = -opt_.optimality_tolerance;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (d[j] < best_value) {
        best = j;
        if (bland_) break;
        best_value = d[j];
      }
    }
    return best;
  }

  std::optional<std::size_t> choose_leaving(std::size_t col) const {
    const double tol = opt_.pivot_tolerance;
    if (bland_) {
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = row_ptr(i)[col];
        if (a > tol) min_ratio = std::min(min_ratio, std::max(0.0, row_ptr(i)[rhs_col()]) / a);
      }
      if (!std::isfinite(min_ratio)) return std::nullopt;
      const double cutoff = min_ratio + 1e-12 * std::max(1.0, min_ratio);
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double a = row_ptr(i)[col];
        if (a <= tol || std::max(0.0, row_ptr(i)[rhs_col()]) / a > cutoff) continue;
        if (!best || basis_[i] < basis_[*best]) best = i;
      }
      return best;
    }
    // Harris: relax the bound slightly, then take the largest pivot under it.
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows_; ++i) {
      const double a = row_ptr(i)[col];
      if (a <= tol) continue;
      bound = std::min(bound, (std::max(0.0, row_ptr(i)[rhs_col()]) + 1e-9) / a);
    }
    if (!std::isfinite(bound)) return std::nullopt;
    std::optional<std::size_t> best;
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double a = row_ptr(i)[col];
      if (a <= tol) continue;
      if (std::max(0.0, row_ptr(i)[rhs_col()]) / a <= bound && a > best_pivot) {
        best_pivot = a;
        best = i;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t c) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[c];
    nonzeros_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nonzeros_.push_back(j);
      }
    }
    prow[c] = 1.0;
    auto eliminate = [&](double* row) {
      const double f = row[c];
      if (f == 0.0) return;
      for (std::size_t j : nonzeros_) row[j] -= f * prow[j];
      row[c] = 0.0;
    };
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      eliminate(row);
      if (row[rhs_col()] < 0.0 && row[rhs_col()] > -1e-9) row[rhs_col()] = 0.0;
    }
    eliminate(phase1_.data());
    eliminate(phase2_.data());
    basis_[r] = c;
  }

  SolverOptions opt_;
  std::size_t rows_ = 0, cols_ = 0, artificials_ = 0, width_ = 0;
  std::vector<double> data_;
  std::vector<double> phase1_, phase2_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonzeros_;
  std::size_t iterations_ = 0, limit_ = 0, degenerate_run_ = 0;
  bool bland_ = false;
};

/// Re-solves B x_B = b from the original standard-form data to shed
/// accumulated tableau round-off. Returns false if B is numerically singular.
inline bool refine_basic_solution(const Problem& sp, const std::vector<std::size_t>& row_basis,
                                  std::vector<double>& xs) {
  const std::size_t r = sp.num_rows();
  const std::size_t n = sp.num_vars();
  std::vector<std::size_t> cols;
  for (std::size_t bj : row_basis) {
    if (bj < n) cols.push_back(bj);
  }
  if (cols.size() != r) return false;  // redundant rows present; keep tableau values
  std::vector<double> m(r * (r + 1));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < r; ++k) m[i * (r + 1) + k] = sp.constraints[i].coeffs[cols[k]];
    m[i * (r + 1) + r] = sp.constraints[i].rhs;
  }
  for (std::size_t k = 0; k < r; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < r; ++i) {
      if (std::abs(m[i * (r + 1) + k]) > std::abs(m[piv * (r + 1) + k])) piv = i;
    }
    if (std::abs(m[piv * (r + 1) + k]) < 1e-12) return false;
    if (piv != k) {
      for (std::size_t j = 0; j <= r; ++j) std::swap(m[k * (r + 1) + j], m[piv * (r + 1) + j]);
    }
    const double inv = 1.0 / m[k * (r + 1) + k];
    for (std::size_t i = k + 1; i < r; ++i) {
      const double f = m[i * (r + 1) + k] * inv;
      if (f == 0.0) continue;
      for (std::size_t j = k; j <= r; ++j) m[i * (r + 1) + j] -= f * m[k * (r + 1) + j];
    }
  }
  std::vector<double> sol(r);
  for (std::size_t k = r; k-- > 0;) {
    double s = m[k * (r + 1) + r];
    for (std::size_t j = k + 1; j < r; ++j) s -= m[k * (r + 1) + j] * sol[j];
    sol[k] = s / m[k * (r + 1) + k];
  }
  std::fill(xs.begin(), xs.end(), 0.0);
  for (std::size_t k = 0; k < r; ++k) xs[cols[k]] = std::max(0.0, sol[k]);
  return true;
}

}  // namespace detail

/// Solves a problem once, then re-solves it under new objectives starting
/// from the previous optimal basis. Only the cost row changes, so the basis
/// stays primal feasible and phase 1 is skipped.
class Resolver {
public:
  explicit Resolver(Problem p, const SolverOptions& opt = {})
      : problem_(std::move(p)), opt_(opt), sf_(to_standard_form(problem_)) {}

  const Problem& problem() const { return problem_; }

  Solution solve() {
    if (sf_.problem.num_vars() == 0) {
      // Every variable fixed: the point is determined, only feasibility remains.
      Solution out;
      out.x = sf_.recover({});
      out.objective_value = problem_.evaluate(out.x);
      out.status = problem_.max_violation(out.x) <= opt_.feasibility_tolerance ? Status::optimal : Status::infeasible;
      feasible_ = out.status == Status::optimal;
      return out;
    }
    tableau_.emplace(sf_, opt_);
    feasible_ = false;
    auto& t = *tableau_;
    if (t.run(1) == detail::Tableau::Outcome::limit) return finish(Status::iteration_limit, 1);
    const double residual = t.phase1_objective();
    if (residual > opt_.feasibility_tolerance) {
      Solution out = finish(Status::infeasible, 1);
      out.infeasibility = residual;
      if (auto row = t.worst_artificial_row()) {
        const auto& origin = sf_.row_origin[*row];
        if (origin) out.infeasible_row = *origin;
      }
      return out;
    }
    t.expel_artificials();
    feasible_ = true;
    return phase2();
  }

  /// Requires a previous solve() that reached phase 2; otherwise solves cold.
  Solution reoptimize(const std::vector<double>& objective, Sense sense) {
    if (objective.size() != problem_.num_vars()) throw ValidationError("objective size mismatch");
    problem_.objective = objective;
    problem_.sense = sense;
    Problem shadow(problem_.num_vars(), sense);
    shadow.objective = objective;
    shadow.lower = problem_.lower;
    shadow.upper = problem_.upper;
    const StandardForm mapped = to_standard_form(shadow);
    sf_.problem.objective = mapped.problem.objective;
    sf_.problem.objective.resize(sf_.problem.num_vars(), 0.0);
    sf_.objective_sign = mapped.objective_sign;
    sf_.objective_offset = mapped.objective_offset;
    if (!feasible_ || !tableau_) return solve();
    tableau_->set_objective(sf_.problem.objective);
    return phase2();
  }

private:
  Solution finish(Status status, int phase) {
    const auto& t = *tableau_;
    Solution out;
    out.status = status;
    out.phase = phase;
    out.iterations = t.iterations();
    out.basis = t.basis();
    out.reduced_costs = t.reduced_costs();
    out.x = sf_.recover(t.primal());
    out.objective_value = problem_.evaluate(out.x);
    return out;
  }

  Solution phase2() {
    auto& t = *tableau_;
    const auto outcome = t.run(2);
    if (outcome == detail::Tableau::Outcome::limit) return finish(Status::iteration_limit, 2);
    if (outcome == detail::Tableau::Outcome::unbounded) return finish(Status::unbounded, 2);
    Solution out = finish(Status::optimal, 2);
    if (problem_.max_violation(out.x) > 1e-9) {
      std::vector<double> xs(sf_.problem.num_vars(), 0.0);
      if (detail::refine_basic_solution(sf_.problem, t.row_basis(), xs)) {
        auto x = sf_.recover(xs);
        if (problem_.max_violation(x) < problem_.max_violation(out.x)) {
          out.x = std::move(x);
          out.objective_value = problem_.evaluate(out.x);
        }
      }
    }
    return out;
  }

  Problem problem_;
  SolverOptions opt_;
  StandardForm sf_;
  std::optional<detail::Tableau> tableau_;
  bool feasible_ = false;
};

/// Solves `p`. Never throws for valid input; the status reports the outcome.
inline Solution solve(const Problem& p, const SolverOptions& opt = {}) {
  return Resolver(p, opt).solve();
}

}  // namespace mgca::lp
