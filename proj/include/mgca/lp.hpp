#pragma once

// Dense linear programs and their conversion to equality standard form.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mgca/error.hpp"
#include "mgca/text_io.hpp"

namespace mgca::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { minimize, maximize };
enum class Relation { less_equal, greater_equal, equal };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::less_equal: return "<=";
    case Relation::greater_equal: return ">=";
    case Relation::equal: return "=";
  }
  return "?";
}

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
  std::string label;
};

/// A linear program over `num_vars()` variables with per-variable bounds.
/// Bounds default to [0, +inf).
class Problem {
public:
  Problem() = default;
  explicit Problem(std::size_t num_vars, Sense sense = Sense::minimize)
      : sense(sense), objective(num_vars, 0.0), lower(num_vars, 0.0), upper(num_vars, kInfinity) {}

  std::size_t num_vars() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return constraints.size(); }

  std::size_t add_variable(double cost, double lo = 0.0, double hi = kInfinity) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& row : constraints) row.coeffs.push_back(0.0);
    return objective.size() - 1;
  }

  std::size_t add_constraint(std::vector<double> coeffs, Relation rel, double rhs, std::string label = {}) {
    constraints.push_back({std::move(coeffs), rel, rhs, std::move(label)});
    return constraints.size() - 1;
  }

  /// Throws ValidationError when the problem breaks its shape invariants.
  void validate() const {
    const std::size_t n = num_vars();
    if (n == 0) throw ValidationError("LP has no variables");
    if (lower.size() != n || upper.size() != n) throw ValidationError("LP bound vectors have wrong length");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(objective[j])) throw ValidationError("non-finite objective coefficient");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInfinity || upper[j] == -kInfinity ||
          lower[j] > upper[j]) {
        throw ValidationError("invalid bounds on variable " + std::to_string(j));
      }
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      if (c.coeffs.size() != n) throw ValidationError("constraint row " + std::to_string(i) + " has wrong length");
      if (!std::isfinite(c.rhs)) throw ValidationError("non-finite rhs in row " + std::to_string(i));
      for (double a : c.coeffs) {
        if (!std::isfinite(a)) throw ValidationError("non-finite coefficient in row " + std::to_string(i));
      }
    }
  }

  /// Largest absolute violation of rows and bounds at `x`.
  double max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < num_vars(); ++j) {
      worst = std::max(worst, lower[j] - x[j]);
      worst = std::max(worst, x[j] - upper[j]);
    }
    for (const auto& c : constraints) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < num_vars(); ++j) lhs += c.coeffs[j] * x[j];
      switch (c.relation) {
        case Relation::less_equal: worst = std::max(worst, lhs - c.rhs); break;
        case Relation::greater_equal: worst = std::max(worst, c.rhs - lhs); break;
        case Relation::equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
      }
    }
    return worst;
  }

  double evaluate(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < num_vars(); ++j) v += objective[j] * x[j];
    return v;
  }

  Sense sense = Sense::minimize;
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "?";
}

struct Solution {
  Status status = Status::infeasible;
  double objective_value = 0.0;
  /// Values of the original variables. Best-so-far when the iteration limit hit.
  std::vector<double> x;
  /// Basic columns of the standard form at termination.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
  /// Phase-two reduced costs of the standard-form columns (minimization sense).
  std::vector<double> reduced_costs;
  /// For infeasible results: original constraint with the largest phase-one residual.
  std::optional<std::size_t> infeasible_row;
  double infeasibility = 0.0;
  int phase = 0;
};

/// How one original variable is represented by standard-form columns.
struct VariableMap {
  enum class Kind { shifted, reflected, split, fixed };
  Kind kind = Kind::shifted;
  std::size_t column = 0;
  std::size_t negative_column = 0;  ///< only for `split`
  double offset = 0.0;              ///< x = offset + col (shifted), offset - col (reflected)
};

/// Equality-form equivalent of a Problem: min c'x, Ax = b, x >= 0.
struct StandardForm {
  Problem problem;
  std::vector<VariableMap> variables;
  /// Original constraint index for each row; nullopt for rows created from upper bounds.
  std::vector<std::optional<std::size_t>> row_origin;
  /// Column of the slack/surplus added for a row, if any.
  std::vector<std::optional<std::size_t>> row_slack;
  double objective_offset = 0.0;
  double objective_sign = 1.0;

  std::vector<double> recover(const std::vector<double>& xs) const {
    std::vector<double> x(variables.size(), 0.0);
    for (std::size_t j = 0; j < variables.size(); ++j) {
      const auto& v = variables[j];
      switch (v.kind) {
        case VariableMap::Kind::shifted: x[j] = v.offset + xs[v.column]; break;
        case VariableMap::Kind::reflected: x[j] = v.offset - xs[v.column]; break;
        case VariableMap::Kind::split: x[j] = xs[v.column] - xs[v.negative_column]; break;
        case VariableMap::Kind::fixed: x[j] = v.offset; break;
      }
    }
    return x;
  }

  /// Maps an original point into standard-form coordinates, filling slacks so
  /// that every equality row holds exactly (slacks go negative when x is infeasible).
  std::vector<double> lift(const std::vector<double>& x) const {
    std::vector<double> xs(problem.num_vars(), 0.0);
    for (std::size_t j = 0; j < variables.size(); ++j) {
      const auto& v = variables[j];
      switch (v.kind) {
        case VariableMap::Kind::shifted: xs[v.column] = x[j] - v.offset; break;
        case VariableMap::Kind::reflected: xs[v.column] = v.offset - x[j]; break;
        case VariableMap::Kind::split:
          xs[v.column] = std::max(x[j], 0.0);
          xs[v.negative_column] = std::max(-x[j], 0.0);
          break;
        case VariableMap::Kind::fixed: break;
      }
    }
    for (std::size_t i = 0; i < problem.num_rows(); ++i) {
      if (!row_slack[i]) continue;
      const auto& row = problem.constraints[i];
      const std::size_t s = *row_slack[i];
      double lhs = 0.0;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (j != s) lhs += row.coeffs[j] * xs[j];
      }
      xs[s] = (row.rhs - lhs) / row.coeffs[s];
    }
    return xs;
  }
};

/// Converts to min-sense equality form with nonnegative variables. Free
/// variables are split, upper-bounded ones gain a bound row, and fixed ones
/// are folded into the right-hand sides.
inline StandardForm to_standard_form(const Problem& p) {
  p.validate();
  StandardForm sf;
  const std::size_t n = p.num_vars();
  sf.objective_sign = p.sense == Sense::maximize ? -1.0 : 1.0;
  sf.variables.resize(n);

  std::vector<double> cost;
  std::size_t next = 0;
  struct BoundRow { std::size_t column; double rhs; };
  std::vector<BoundRow> bound_rows;
  for (std::size_t j = 0; j < n; ++j) {
    auto& v = sf.variables[j];
    const double lo = p.lower[j], hi = p.upper[j];
    const double c = sf.objective_sign * p.objective[j];
    if (std::isfinite(lo) && lo == hi) {
      v.kind = VariableMap::Kind::fixed;
      v.offset = lo;
      sf.objective_offset += c * lo;
    } else if (std::isfinite(lo)) {
      v.kind = VariableMap::Kind::shifted;
      v.offset = lo;
      v.column = next++;
      cost.push_back(c);
      sf.objective_offset += c * lo;
      if (std::isfinite(hi)) bound_rows.push_back({v.column, hi - lo});
    } else if (std::isfinite(hi)) {
      v.kind = VariableMap::Kind::reflected;
      v.offset = hi;
      v.column = next++;
      cost.push_back(-c);
      sf.objective_offset += c * hi;
    } else {
      v.kind = VariableMap::Kind::split;
      v.column = next++;
      v.negative_column = next++;
      cost.push_back(c);
      cost.push_back(-c);
    }
  }
  const std::size_t structural = next;

  std::size_t slack_count = bound_rows.size();
  for (const auto& row : p.constraints) {
    if (row.relation != Relation::equal) ++slack_count;
  }
  const std::size_t total = structural + slack_count;
  cost.resize(total, 0.0);

  sf.problem = Problem(total, Sense::minimize);
  sf.problem.objective = std::move(cost);
  std::size_t slack = structural;

  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    const auto& row = p.constraints[i];
    std::vector<double> coeffs(total, 0.0);
    double rhs = row.rhs;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = row.coeffs[j];
      if (a == 0.0) continue;
      const auto& v = sf.variables[j];
      switch (v.kind) {
        case VariableMap::Kind::fixed: rhs -= a * v.offset; break;
        case VariableMap::Kind::shifted:
          coeffs[v.column] += a;
          rhs -= a * v.offset;
          break;
        case VariableMap::Kind::reflected:
          coeffs[v.column] -= a;
          rhs -= a * v.offset;
          break;
        case VariableMap::Kind::split:
          coeffs[v.column] += a;
          coeffs[v.negative_column] -= a;
          break;
      }
    }
    std::optional<std::size_t> slack_col;
    if (row.relation == Relation::less_equal) {
      coeffs[slack] = 1.0;
      slack_col = slack++;
    } else if (row.relation == Relation::greater_equal) {
      coeffs[slack] = -1.0;
      slack_col = slack++;
    }
    sf.problem.add_constraint(std::move(coeffs), Relation::equal, rhs, row.label);
    sf.row_origin.emplace_back(i);
    sf.row_slack.push_back(slack_col);
  }
  for (const auto& b : bound_rows) {
    std::vector<double> coeffs(total, 0.0);
    coeffs[b.column] = 1.0;
    coeffs[slack] = 1.0;
    sf.problem.add_constraint(std::move(coeffs), Relation::equal, b.rhs, "upper bound");
    sf.row_origin.emplace_back(std::nullopt);
    sf.row_slack.emplace_back(slack++);
  }
  return sf;
}

/// Plain-text dump, one constraint per line, for diffing problems.
inline void write_text(const Problem& p, std::ostream& out) {
  out << "sense " << (p.sense == Sense::minimize ? "min" : "max") << "\n";
  out << "vars " << p.num_vars() << "\n";
  out << "obj";
  for (double c : p.objective) out << ' ' << format_double(c);
  out << "\n";
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (p.lower[j] == 0.0 && p.upper[j] == kInfinity) continue;
    out << "bound " << j << ' ' << format_double(p.lower[j]) << ' ' << format_double(p.upper[j]) << "\n";
  }
  for (const auto& row : p.constraints) {
    out << "row";
    if (!row.label.empty()) out << " [" << row.label << "]";
    for (double a : row.coeffs) out << ' ' << format_double(a);
    out << ' ' << to_string(row.relation) << ' ' << format_double(row.rhs) << "\n";
  }
}

}  // namespace mgca::lp
