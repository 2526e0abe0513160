#pragma once

// Exploration of the convex hull of the iterate set.
//
// The exploration LP over weights lambda (m) and point z (n):
//
//   min/max  f(z)
//   s.t.     z - Z^T lambda = 0       (n rows)
//            sum(lambda)    = 1
//            A z  {<=,>=,=} b         (user constraints)
//            lambda >= 0,  z_d >= 0 for nonnegative dimensions
//
// Without user constraints a linear objective is always optimized at one of
// the original vertices.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgca/constraint_parser.hpp"
#include "mgca/interpolation.hpp"
#include "mgca/mga_vectors.hpp"
#include "mgca/simplex.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca {

inline constexpr double kVertexWeightThreshold = 1.0 - 1e-7;
inline constexpr double kConstraintTolerance = 1e-7;

struct ExplorationProblem {
  lp::Problem lp;
  std::size_t vertices = 0;
  std::size_t dims = 0;
  std::size_t user_rows = 0;

  std::size_t lambda_column(std::size_t i) const { return i; }
  std::size_t z_column(std::size_t d) const { return vertices + d; }

  /// Sizes as built here: m + n variables, n + 1 + d rows (bounds excluded).
  std::size_t variable_count() const { return vertices + dims; }
  std::size_t row_count() const { return dims + 1 + user_rows; }
  /// The commonly quoted sizing of the same problem, 2m variables and
  /// 3n + d + 1 constraints, reported alongside for comparison.
  std::size_t nominal_variable_count() const { return 2 * vertices; }
  std::size_t nominal_row_count() const { return 3 * dims + user_rows + 1; }
};

inline void check_names(const VertexMatrix& vm, const std::map<std::string, double>& terms, const std::string& what) {
  if (terms.empty()) throw ValidationError(what + " has no terms");
  for (const auto& [name, coef] : terms) {
    if (!vm.find(name)) throw ValidationError(what + " references unknown dimension '" + name + "'");
    if (!std::isfinite(coef)) throw ValidationError(what + " has a non-finite coefficient for '" + name + "'");
  }
}

inline void validate_constraint(const VertexMatrix& vm, const LinearConstraintSpec& c) {
  check_names(vm, c.terms, "constraint '" + c.label + "'");
  if (!std::isfinite(c.rhs)) throw ValidationError("constraint '" + c.label + "' has a non-finite right-hand side");
}

inline ExplorationProblem build_exploration_problem(const VertexMatrix& vm, const ObjectiveSpec& obj,
                                                    const std::vector<LinearConstraintSpec>& constraints) {
  check_names(vm, obj.terms, "objective");
  for (const auto& c : constraints) validate_constraint(vm, c);

  ExplorationProblem ep;
  ep.vertices = vm.num_vertices();
  ep.dims = vm.num_dims();
  ep.user_rows = constraints.size();
  const std::size_t m = ep.vertices, n = ep.dims, nv = m + n;

  ep.lp = lp::Problem(nv, obj.sense);
  for (std::size_t d = 0; d < n; ++d) {
    if (!vm.dim(d).nonnegative) ep.lp.lower[ep.z_column(d)] = -lp::kInfinity;
  }
  for (const auto& [name, coef] : obj.terms) ep.lp.objective[ep.z_column(vm.index_of(name))] += coef;

  for (std::size_t d = 0; d < n; ++d) {
    std::vector<double> row(nv, 0.0);
    row[ep.z_column(d)] = 1.0;
    for (std::size_t i = 0; i < m; ++i) row[ep.lambda_column(i)] = -vm.at(i, d);
    ep.lp.add_constraint(std::move(row), lp::Relation::equal, 0.0, "hull:" + vm.dim(d).name);
  }
  {
    std::vector<double> row(nv, 0.0);
    for (std::size_t i = 0; i < m; ++i) row[ep.lambda_column(i)] = 1.0;
    ep.lp.add_constraint(std::move(row), lp::Relation::equal, 1.0, "weights sum to one");
  }
  for (const auto& c : constraints) {
    std::vector<double> row(nv, 0.0);
    for (const auto& [name, coef] : c.terms) row[ep.z_column(vm.index_of(name))] += coef;
    ep.lp.add_constraint(std::move(row), c.relation, c.rhs, c.label);
  }
  return ep;
}

enum class ExplorationStatus { optimal, infeasible };

struct ExplorationResult {
  ExplorationStatus status = ExplorationStatus::infeasible;
  std::optional<InterpolatedPoint> point;
  double objective_value = 0.0;
  bool is_vertex = false;
  double solve_millis = 0.0;
  /// For infeasible results: the constraint that first empties the hull.
  std::string infeasible_label;
  std::size_t iterations = 0;
};

inline double linear_value(const VertexMatrix& vm, const std::map<std::string, double>& terms,
                           const std::vector<double>& coords) {
  double v = 0.0;
  for (const auto& [name, coef] : terms) v += coef * coords[vm.index_of(name)];
  return v;
}

/// Signed violation of `c` at `coords` (<= 0 means satisfied).
inline double constraint_violation(const VertexMatrix& vm, const LinearConstraintSpec& c,
                                   const std::vector<double>& coords) {
  const double lhs = linear_value(vm, c.terms, coords);
  switch (c.relation) {
    case lp::Relation::less_equal: return lhs - c.rhs;
    case lp::Relation::greater_equal: return c.rhs - lhs;
    case lp::Relation::equal: return std::abs(lhs - c.rhs);
  }
  return 0.0;
}

inline bool hull_feasible(const VertexMatrix& vm, const std::vector<LinearConstraintSpec>& constraints) {
  ObjectiveSpec zero{{{vm.dim(0).name, 0.0}}, lp::Sense::minimize};
  return lp::solve(build_exploration_problem(vm, zero, constraints).lp).status != lp::Status::infeasible;
}

/// Label of the constraint whose addition, in list order, first leaves the
/// hull empty. Prefix feasibility is monotone, so this is a binary search.
/// Returns an empty string when the whole list is feasible.
inline std::string breaking_constraint(const VertexMatrix& vm, const std::vector<LinearConstraintSpec>& constraints) {
  if (hull_feasible(vm, constraints)) return {};
  std::size_t feasible = 0, infeasible = constraints.size();  // prefix lengths
  while (infeasible - feasible > 1) {
    const std::size_t mid = feasible + (infeasible - feasible) / 2;
    const std::vector<LinearConstraintSpec> prefix(constraints.begin(), constraints.begin() + static_cast<std::ptrdiff_t>(mid));
    (hull_feasible(vm, prefix) ? feasible : infeasible) = mid;
  }
  return constraints[infeasible - 1].label;
}

inline ExplorationResult explore(const VertexMatrix& vm, const ObjectiveSpec& obj,
                                 const std::vector<LinearConstraintSpec>& constraints) {
  const auto start = std::chrono::steady_clock::now();
  const ExplorationProblem ep = build_exploration_problem(vm, obj, constraints);
  const auto sol = lp::solve(ep.lp);
  ExplorationResult out;
  out.iterations = sol.iterations;
  if (sol.status == lp::Status::infeasible) {
    out.status = ExplorationStatus::infeasible;
    out.infeasible_label = breaking_constraint(vm, constraints);
  } else if (sol.status != lp::Status::optimal) {
    throw Error(std::string("exploration LP ended with status ") + lp::to_string(sol.status));
  } else {
    // Clean tiny negative weights and renormalize before interpolating so
    // the reported point is an exact convex combination.
    WeightVector w{std::vector<double>(ep.vertices)};
    double total = 0.0;
    for (std::size_t i = 0; i < ep.vertices; ++i) total += (w.values[i] = std::max(0.0, sol.x[ep.lambda_column(i)]));
    for (auto& v : w.values) v /= total;
    out.status = ExplorationStatus::optimal;
    out.point = interpolate(vm, w);
    out.objective_value = linear_value(vm, obj.terms, out.point->coords);
    out.is_vertex = *std::max_element(w.values.begin(), w.values.end()) >= kVertexWeightThreshold;
  }
  out.solve_millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

struct DimensionRange {
  double min = 0.0;
  double max = 0.0;
};

/// Per-dimension range over the hull intersected with `constraints`. Throws
/// InfeasibleError when the constraints cut off the whole hull.
inline std::vector<DimensionRange> hull_summary(const VertexMatrix& vm,
                                                const std::vector<LinearConstraintSpec>& constraints) {
  std::vector<DimensionRange> out(vm.num_dims());
  if (constraints.empty()) {
    for (std::size_t d = 0; d < vm.num_dims(); ++d) {
      out[d] = {vm.at(0, d), vm.at(0, d)};
      for (std::size_t i = 1; i < vm.num_vertices(); ++i) {
        out[d].min = std::min(out[d].min, vm.at(i, d));
        out[d].max = std::max(out[d].max, vm.at(i, d));
      }
    }
    return out;
  }
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    for (auto sense : {lp::Sense::minimize, lp::Sense::maximize}) {
      const auto r = explore(vm, ObjectiveSpec{{{vm.dim(d).name, 1.0}}, sense}, constraints);
      if (r.status != ExplorationStatus::optimal) {
        throw InfeasibleError("constraints leave no feasible point in the hull", r.infeasible_label);
      }
      (sense == lp::Sense::minimize ? out[d].min : out[d].max) = r.objective_value;
    }
  }
  return out;
}

/// A minimization objective whose coefficients are uniform on the unit sphere
/// over the given dimensions.
inline ObjectiveSpec random_objective(const std::vector<std::string>& names, std::uint64_t seed) {
  const auto v = random_unit_vector(names.size(), seed);
  ObjectiveSpec obj;
  for (std::size_t k = 0; k < names.size(); ++k) obj.terms[names[k]] += v[k];
  return obj;
}

struct LocalMgaResult {
  std::vector<ExplorationResult> results;
  /// Set when the constraint set is infeasible; results are then empty.
  std::optional<std::string> infeasible_label;
  std::vector<ObjectiveSpec> objectives;
};

/// Repeated exploration with generated objectives over every dimension. The
/// hull already encodes the budget, so no budget row is added.
inline LocalMgaResult local_mga(const VertexMatrix& vm, const std::vector<LinearConstraintSpec>& constraints,
                                std::size_t iterations, MgaMethod method, std::uint64_t seed) {
  if (iterations < 1) throw ValidationError("local MGA needs at least one iteration");
  LocalMgaResult out;
  MgaObjectiveGenerator gen(method, vm.num_dims(), seed);
  for (std::size_t k = 0; k < iterations; ++k) {
    const auto v = gen.next();
    ObjectiveSpec obj;
    for (std::size_t d = 0; d < vm.num_dims(); ++d) {
      if (v[d] != 0.0) obj.terms[vm.dim(d).name] = v[d];
    }
    auto r = explore(vm, obj, constraints);
    if (r.status != ExplorationStatus::optimal) {
      out.results.clear();
      out.infeasible_label = r.infeasible_label;
      return out;
    }
    out.results.push_back(std::move(r));
    out.objectives.push_back(std::move(obj));
  }
  return out;
}

/// Rescales the iterate set to a tighter budget: each non-least-cost vertex is
/// blended with the least-cost vertex at weight target_slack / budget_slack.
inline std::vector<InterpolatedPoint> budget_interpolate(const VertexMatrix& vm, double target_slack) {
  if (!(target_slack >= 0.0) || target_slack > vm.budget_slack()) {
    throw ValidationError("target slack " + format_double(target_slack) + " outside [0, " +
                          format_double(vm.budget_slack()) + "]");
  }
  const double w = target_slack / vm.budget_slack();
  const std::size_t lc = vm.least_cost_index();
  std::vector<InterpolatedPoint> out;
  out.reserve(vm.num_vertices() - 1);
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    if (i == lc) continue;
    WeightVector weights{std::vector<double>(vm.num_vertices(), 0.0)};
    weights.values[i] = w;
    weights.values[lc] = 1.0 - w;
    out.push_back(interpolate(vm, weights));
  }
  return out;
}

struct FrontierPoint {
  double epsilon = 0.0;
  double traced_value = 0.0;
  double objective_value = 0.0;
  InterpolatedPoint point;
};

struct ParetoFrontier {
  std::vector<FrontierPoint> points;
  std::vector<double> epsilon_grid;
  std::string traced_metric;
  lp::Sense objective_sense = lp::Sense::minimize;
  double solve_millis = 0.0;
};

namespace detail {

inline double tie_tolerance(double a, double b) { return 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

/// True when `q` is at least as good in both metrics and strictly better in one.
inline bool dominates(double q_traced, double q_obj, double p_traced, double p_obj) {
  const double tt = tie_tolerance(q_traced, p_traced), to = tie_tolerance(q_obj, p_obj);
  const bool no_worse = q_traced <= p_traced + tt && q_obj <= p_obj + to;
  const bool better = q_traced < p_traced - tt || q_obj < p_obj - to;
  return no_worse && better;
}

}  // namespace detail

/// Epsilon-constraint frontier between `objective` and `traced_metric`
/// (minimized). The cap on the traced metric sweeps an even grid over its
/// range under `constraints`; each cap is solved lexicographically (objective
/// first, then the traced metric) and dominated points are pruned.
inline ParetoFrontier pareto_frontier(const VertexMatrix& vm, const ObjectiveSpec& objective,
                                      const std::string& traced_metric, std::size_t steps,
                                      const std::vector<LinearConstraintSpec>& constraints) {
  if (steps < 2) throw ValidationError("a frontier needs at least 2 steps");
  check_names(vm, objective.terms, "objective");
  vm.index_of(traced_metric);
  const auto start = std::chrono::steady_clock::now();

  const std::map<std::string, double> traced_terms{{traced_metric, 1.0}};
  auto bound = [&](lp::Sense sense) {
    const auto r = explore(vm, ObjectiveSpec{traced_terms, sense}, constraints);
    if (r.status != ExplorationStatus::optimal) {
      throw InfeasibleError("base constraints leave no feasible point in the hull", r.infeasible_label);
    }
    return r.objective_value;
  };
  const double lo = bound(lp::Sense::minimize);
  const double hi = bound(lp::Sense::maximize);

  ParetoFrontier out;
  out.traced_metric = traced_metric;
  out.objective_sense = objective.sense;
  for (std::size_t k = 0; k < steps; ++k) {
    out.epsilon_grid.push_back(k + 1 == steps ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1));
  }
  const double sign = objective.sense == lp::Sense::minimize ? 1.0 : -1.0;

  std::vector<FrontierPoint> raw;
  for (double eps : out.epsilon_grid) {
    auto capped = constraints;
    capped.push_back({traced_terms, lp::Relation::less_equal, eps, traced_metric + "<=" + format_double(eps)});
    auto first = explore(vm, objective, capped);
    if (first.status != ExplorationStatus::optimal) {
      // The lowest cap sits exactly on the hull boundary; allow round-off.
      capped.back().rhs = eps + detail::tie_tolerance(eps, eps);
      first = explore(vm, objective, capped);
      if (first.status != ExplorationStatus::optimal) continue;
    }
    // Second stage: among objective-optimal points, least traced metric.
    const double best = first.objective_value;
    const double slackened = best + sign * 1e-12 * std::max(1.0, std::abs(best));
    capped.push_back({objective.terms,
                      objective.sense == lp::Sense::minimize ? lp::Relation::less_equal : lp::Relation::greater_equal,
                      slackened, "objective at optimum"});
    auto second = explore(vm, ObjectiveSpec{traced_terms, lp::Sense::minimize}, capped);
    const auto& chosen = second.status == ExplorationStatus::optimal ? second : first;
    FrontierPoint fp;
    fp.epsilon = eps;
    fp.point = *chosen.point;
    fp.traced_value = linear_value(vm, traced_terms, fp.point.coords);
    fp.objective_value = linear_value(vm, objective.terms, fp.point.coords);
    raw.push_back(std::move(fp));
  }

  for (std::size_t a = 0; a < raw.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < raw.size() && !dominated; ++b) {
      if (a == b) continue;
      dominated = detail::dominates(raw[b].traced_value, sign * raw[b].objective_value, raw[a].traced_value,
                                    sign * raw[a].objective_value);
    }
    if (!dominated) out.points.push_back(raw[a]);
  }
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const FrontierPoint& x, const FrontierPoint& y) { return x.traced_value < y.traced_value; });
  out.solve_millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mgca
