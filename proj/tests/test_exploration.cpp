#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "mgca/exploration.hpp"
#include "support/fixtures.hpp"

using namespace mgca;
using testing_support::random_vertex_matrix;

namespace {

double column_min(const VertexMatrix& vm, std::size_t d) {
  double v = vm.at(0, d);
  for (std::size_t i = 1; i < vm.num_vertices(); ++i) v = std::min(v, vm.at(i, d));
  return v;
}

double column_max(const VertexMatrix& vm, std::size_t d) {
  double v = vm.at(0, d);
  for (std::size_t i = 1; i < vm.num_vertices(); ++i) v = std::max(v, vm.at(i, d));
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

ObjectiveSpec minimize(const std::string& name) { return {{{name, 1.0}}, lp::Sense::minimize}; }

}  // namespace

TEST(BuildExplorationProblem, CountsForSmallInstance) {
  const auto vm = random_vertex_matrix(3, 0, 1);  // dims: cost, revenue
  const auto ep = build_exploration_problem(vm, minimize("cost"), {});
  EXPECT_EQ(ep.lp.num_vars(), 5u);
  EXPECT_EQ(ep.lp.num_rows(), 3u);
  EXPECT_EQ(ep.variable_count(), 5u);
  EXPECT_EQ(ep.row_count(), 3u);
  const auto with_row = build_exploration_problem(vm, minimize("cost"), {parse_constraint("cost<=1050")});
  EXPECT_EQ(with_row.lp.num_rows(), 4u);
  EXPECT_EQ(with_row.lp.constraints.back().relation, lp::Relation::less_equal);
  // Revenue may be negative; cost is nonnegative.
  EXPECT_EQ(ep.lp.lower[ep.z_column(0)], 0.0);
  EXPECT_EQ(ep.lp.lower[ep.z_column(1)], -lp::kInfinity);
}

TEST(BuildExplorationProblem, SizesGrowLinearlyAndReportNominalCounts) {
  for (std::size_t m : {10u, 20u, 40u}) {
    const auto vm = random_vertex_matrix(m, 4, 2);
    const auto ep = build_exploration_problem(vm, minimize("cap0"), {parse_constraint("cap1<=50")});
    EXPECT_EQ(ep.variable_count(), m + 6);
    EXPECT_EQ(ep.row_count(), 6u + 1u + 1u);
    EXPECT_EQ(ep.nominal_variable_count(), 2 * m);
    EXPECT_EQ(ep.nominal_row_count(), 3u * 6u + 1u + 1u);
  }
}

TEST(BuildExplorationProblem, UnresolvedNames) {
  const auto vm = random_vertex_matrix(3, 1, 1);
  EXPECT_THROW(build_exploration_problem(vm, minimize("nope"), {}), ValidationError);
  EXPECT_THROW(build_exploration_problem(vm, minimize("cost"), {parse_constraint("nope<=1")}), ValidationError);
  EXPECT_THROW(build_exploration_problem(vm, ObjectiveSpec{}, {}), ValidationError);
}

TEST(Explore, MinimizingADimensionReturnsColumnMinimum) {
  const auto vm = random_vertex_matrix(30, 4, 3);
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    const auto r = explore(vm, minimize(vm.dim(d).name), {});
    ASSERT_EQ(r.status, ExplorationStatus::optimal);
    EXPECT_LE(rel(r.objective_value, column_min(vm, d)), 1e-12);
    EXPECT_TRUE(r.is_vertex);
  }
}

TEST(Explore, CapIsRespected) {
  const auto vm = random_vertex_matrix(30, 4, 3);
  const double mid = 0.5 * (column_min(vm, 0) + column_max(vm, 0));
  const auto cap = parse_constraint("cap0<=" + format_double(mid));
  const auto r = explore(vm, minimize("cost"), {cap});
  ASSERT_EQ(r.status, ExplorationStatus::optimal);
  EXPECT_LE(r.point->coords[0], mid + 1e-7);
}

TEST(Explore, CapBelowHullMinimumIsInfeasible) {
  const auto vm = random_vertex_matrix(30, 4, 3);
  const auto lowest = explore(vm, minimize("cap2"), {});
  const auto r = explore(vm, minimize("cost"), {parse_constraint("cap2<=" + format_double(lowest.objective_value - 1))});
  EXPECT_EQ(r.status, ExplorationStatus::infeasible);
  EXPECT_FALSE(r.point.has_value());
  EXPECT_EQ(r.infeasible_label, "cap2<=" + format_double(lowest.objective_value - 1));
}

TEST(Explore, InfeasibilityNamesTheDemandingConstraint) {
  const auto vm = random_vertex_matrix(30, 4, 3);
  const double hi = column_max(vm, 1);
  const std::vector<LinearConstraintSpec> cons{parse_constraint("cap0>=0"),
                                               parse_constraint("cap1>=" + format_double(hi + 25))};
  const auto r = explore(vm, minimize("cost"), cons);
  ASSERT_EQ(r.status, ExplorationStatus::infeasible);
  EXPECT_EQ(r.infeasible_label, cons[1].label);
}

TEST(Explore, ConflictingPairBlamesTheLaterConstraint) {
  const auto vm = random_vertex_matrix(30, 4, 3);
  const double lo = column_min(vm, 0), hi = column_max(vm, 0);
  const auto low = parse_constraint("cap0<=" + format_double(lo + 0.25 * (hi - lo)));
  const auto high = parse_constraint("cap0>=" + format_double(hi - 0.05 * (hi - lo)));
  const auto other = parse_constraint("cap1>=0");
  EXPECT_EQ(explore(vm, minimize("cost"), {other, low, high}).infeasible_label, high.label);
  EXPECT_EQ(explore(vm, minimize("cost"), {high, other, low}).infeasible_label, low.label);
  EXPECT_EQ(breaking_constraint(vm, {other, low}), "");
  EXPECT_TRUE(hull_feasible(vm, {}));
}

TEST(Explore, InteriorOptimumIsNotFlaggedAsVertex) {
  const auto vm = VertexMatrix::create({{"x", DimensionKind::capacity, "", true}, {"y", DimensionKind::capacity, "", true}},
                                       {"a", "b"}, {0.0, 10.0, 10.0, 0.0}, 0, 0.1, std::nullopt);
  const auto r = explore(vm, minimize("x"), {parse_constraint("x>=5")});
  ASSERT_EQ(r.status, ExplorationStatus::optimal);
  EXPECT_NEAR(r.point->coords[0], 5.0, 1e-9);
  EXPECT_NEAR(r.objective_value, 5.0, 1e-9);
  EXPECT_FALSE(r.is_vertex);
}

TEST(HullSummary, UnconstrainedIsColumnwise) {
  const auto vm = random_vertex_matrix(20, 3, 4);
  const auto s = hull_summary(vm, {});
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    EXPECT_EQ(s[d].min, column_min(vm, d));
    EXPECT_EQ(s[d].max, column_max(vm, d));
  }
}

TEST(HullSummary, FixingADimensionCollapsesItsRange) {
  const auto vm = random_vertex_matrix(20, 3, 4);
  const double v = 0.3 * column_min(vm, 1) + 0.7 * column_max(vm, 1);
  const auto s = hull_summary(vm, {parse_constraint("cap1=" + format_double(v))});
  EXPECT_NEAR(s[1].min, v, 1e-7);
  EXPECT_NEAR(s[1].max, v, 1e-7);
}

TEST(HullSummary, CapBecomesTheMaximumAndShrinksOthers) {
  const auto vm = random_vertex_matrix(40, 4, 5);
  const auto base = hull_summary(vm, {});
  const double cap = base[0].min + 0.4 * (base[0].max - base[0].min);
  const auto s = hull_summary(vm, {parse_constraint("cap0<=" + format_double(cap))});
  EXPECT_NEAR(s[0].max, cap, 1e-7);
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    EXPECT_GE(s[d].min, base[d].min - 1e-9 * std::max(1.0, std::abs(base[d].min)));
    EXPECT_LE(s[d].max, base[d].max + 1e-9 * std::max(1.0, std::abs(base[d].max)));
  }
}

TEST(HullSummary, InfeasibleConstraintSetThrows) {
  const auto vm = random_vertex_matrix(20, 3, 4);
  try {
    hull_summary(vm, {parse_constraint("cap0<=-1")});
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.label(), "cap0<=-1");
  }
}

TEST(RandomObjective, SingleDimensionIsPlusOrMinusOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = random_unit_vector(1, seed);
    EXPECT_EQ(std::abs(v[0]), 1.0);
  }
}

TEST(RandomObjective, UnitNormAndCenteredMean) {
  std::vector<double> mean(6, 0.0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto v = random_unit_vector(6, seed);
    double norm = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      norm += v[k] * v[k];
      mean[k] += v[k] / 1000.0;
    }
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-12);
  }
  for (double m : mean) EXPECT_LT(std::abs(m), 0.1);
  EXPECT_EQ(random_unit_vector(6, 3), random_unit_vector(6, 3));
  const auto obj = random_objective({"a", "b"}, 3);
  EXPECT_EQ(obj.terms.size(), 2u);
}

TEST(LocalMga, OneIterationReturnsAVertex) {
  const auto vm = random_vertex_matrix(20, 3, 6);
  const auto r = local_mga(vm, {}, 1, MgaMethod::random_vector, 1);
  ASSERT_EQ(r.results.size(), 1u);
  EXPECT_TRUE(r.results[0].is_vertex);
}

TEST(LocalMga, MinMaxBracketsDimensionsInOrder) {
  const auto vm = random_vertex_matrix(20, 3, 6);
  const std::size_t n = vm.num_dims();
  const auto r = local_mga(vm, {}, 2 * n + 3, MgaMethod::minmax, 1);
  ASSERT_EQ(r.objectives.size(), 2 * n + 3);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    const auto& terms = r.objectives[k].terms;
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_EQ(terms.begin()->first, vm.dim(k / 2).name);
    EXPECT_EQ(terms.begin()->second, k % 2 == 0 ? 1.0 : -1.0);
    const double expect = k % 2 == 0 ? column_min(vm, k / 2) : column_max(vm, k / 2);
    EXPECT_LE(rel(r.results[k].point->coords[k / 2], expect), 1e-12);
  }
}

TEST(LocalMga, ConstrainedResultsRespectTheCap) {
  const auto vm = random_vertex_matrix(60, 5, 7);
  const auto base = hull_summary(vm, {});
  const double cap = base[2].min + 0.4 * (base[2].max - base[2].min);
  const auto cons = std::vector<LinearConstraintSpec>{parse_constraint("cap2<=" + format_double(cap))};
  const auto r = local_mga(vm, cons, 50, MgaMethod::random_vector, 3);
  ASSERT_EQ(r.results.size(), 50u);
  for (const auto& res : r.results) EXPECT_LE(res.point->coords[2], cap + 1e-7);
}

TEST(LocalMga, InfeasibleConstraintsAbortWithReport) {
  const auto vm = random_vertex_matrix(20, 3, 6);
  const auto r = local_mga(vm, {parse_constraint("cap0<=-5")}, 10, MgaMethod::minmax, 1);
  EXPECT_TRUE(r.results.empty());
  ASSERT_TRUE(r.infeasible_label.has_value());
  EXPECT_EQ(*r.infeasible_label, "cap0<=-5");
  EXPECT_THROW(local_mga(vm, {}, 0, MgaMethod::minmax, 1), ValidationError);
}

TEST(BudgetInterpolate, SixOfTenGivesWeightPointSix) {
  const auto vm = random_vertex_matrix(15, 3, 8, 0.10);
  const auto pts = budget_interpolate(vm, 0.06);
  ASSERT_EQ(pts.size(), vm.num_vertices() - 1);
  const std::size_t lc = vm.least_cost_index();
  const double limit = vm.budget_limit(0.06);
  for (const auto& p : pts) {
    EXPECT_NEAR(p.weights.values[lc], 0.4, 1e-15);
    EXPECT_EQ(std::count_if(p.weights.values.begin(), p.weights.values.end(), [](double w) { return w != 0.0; }), 2);
    EXPECT_LE(p.coords[*vm.cost_index()], limit * (1 + 1e-9));
  }
}

TEST(BudgetInterpolate, FullSlackIsIdentityAndZeroCollapses) {
  const auto vm = random_vertex_matrix(15, 3, 8, 0.10);
  const auto same = budget_interpolate(vm, 0.10);
  std::size_t k = 0;
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    if (i == vm.least_cost_index()) continue;
    for (std::size_t d = 0; d < vm.num_dims(); ++d) EXPECT_EQ(same[k].coords[d], vm.at(i, d));
    ++k;
  }
  for (const auto& p : budget_interpolate(vm, 0.0)) {
    for (std::size_t d = 0; d < vm.num_dims(); ++d) EXPECT_EQ(p.coords[d], vm.at(vm.least_cost_index(), d));
  }
  EXPECT_THROW(budget_interpolate(vm, 0.11), ValidationError);
  EXPECT_THROW(budget_interpolate(vm, -0.01), ValidationError);
}

TEST(ParetoFrontier, ElevenStepsAreMonotoneAndNonDominated) {
  const auto vm = random_vertex_matrix(80, 4, 9);
  const auto f = pareto_frontier(vm, minimize("cost"), "revenue", 11, {});
  ASSERT_EQ(f.epsilon_grid.size(), 11u);
  ASSERT_EQ(f.points.size(), 11u);
  for (std::size_t k = 1; k < f.points.size(); ++k) {
    EXPECT_GE(f.points[k].traced_value, f.points[k - 1].traced_value);
    EXPECT_LE(f.points[k].objective_value, f.points[k - 1].objective_value + 1e-9 * std::abs(f.points[k - 1].objective_value));
    EXPECT_LE(f.points[k].traced_value, f.epsilon_grid[k] + 1e-7);
  }
  for (const auto& a : f.points)
    for (const auto& b : f.points) EXPECT_FALSE(detail::dominates(b.traced_value, b.objective_value, a.traced_value, a.objective_value));
}

TEST(ParetoFrontier, TwoStepEndpointsAreSingleObjectiveOptima) {
  const auto vm = random_vertex_matrix(80, 4, 10);
  const auto f = pareto_frontier(vm, minimize("cost"), "revenue", 2, {});
  ASSERT_EQ(f.points.size(), 2u);
  const auto min_traced = explore(vm, minimize("revenue"), {});
  const auto min_obj = explore(vm, minimize("cost"), {});
  EXPECT_LE(rel(f.points.front().traced_value, min_traced.objective_value), 1e-8);
  EXPECT_LE(rel(f.points.back().objective_value, min_obj.objective_value), 1e-8);
}

TEST(ParetoFrontier, MaximizedObjectiveIsTracedTheOtherWay) {
  const auto vm = random_vertex_matrix(50, 3, 11);
  const auto f = pareto_frontier(vm, ObjectiveSpec{{{"cap0", 1.0}}, lp::Sense::maximize}, "cost", 6, {});
  ASSERT_GE(f.points.size(), 2u);
  for (std::size_t k = 1; k < f.points.size(); ++k) {
    EXPECT_GE(f.points[k].objective_value, f.points[k - 1].objective_value - 1e-7);
  }
}

TEST(ParetoFrontier, RowPermutationGivesSameFrontier) {
  const auto vm = random_vertex_matrix(60, 3, 12);
  std::vector<std::size_t> perm(vm.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t least = 0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    ids.push_back(vm.vertex_ids()[perm[k]]);
    if (perm[k] == vm.least_cost_index()) least = k;
    for (double v : vm.row(perm[k])) values.push_back(v);
  }
  const auto pvm = VertexMatrix::create(vm.dims(), ids, values, least, vm.budget_slack(), std::string("cost"));
  const auto a = pareto_frontier(vm, minimize("cost"), "revenue", 11, {});
  const auto b = pareto_frontier(pvm, minimize("cost"), "revenue", 11, {});
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_LE(rel(a.points[k].traced_value, b.points[k].traced_value), 1e-8);
    EXPECT_LE(rel(a.points[k].objective_value, b.points[k].objective_value), 1e-8);
  }
}

TEST(ParetoFrontier, Errors) {
  const auto vm = random_vertex_matrix(20, 3, 13);
  EXPECT_THROW(pareto_frontier(vm, minimize("cost"), "revenue", 1, {}), ValidationError);
  EXPECT_THROW(pareto_frontier(vm, minimize("cost"), "nope", 5, {}), ValidationError);
  EXPECT_THROW(pareto_frontier(vm, minimize("cost"), "revenue", 5, {parse_constraint("cap0<=-1")}), InfeasibleError);
}

TEST(ExplorationProperties, VertexOptimalityForRandomObjectives) {
  const auto vm = random_vertex_matrix(100, 6, 14);
  std::vector<std::string> names;
  for (const auto& d : vm.dims()) names.push_back(d.name);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto obj = random_objective(names, seed);
    const auto r = explore(vm, obj, {});
    double best = 1e300;
    for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
      double v = 0.0;
      for (const auto& [name, c] : obj.terms) v += c * vm.at(i, vm.index_of(name));
      best = std::min(best, v);
    }
    EXPECT_LE(rel(r.objective_value, best), 1e-8) << "seed " << seed;
  }
}

TEST(ExplorationProperties, ConstraintSoundnessAndMonotoneShrinkage) {
  const auto vm = random_vertex_matrix(80, 5, 15);
  std::mt19937_64 rng(16);
  std::vector<std::string> names;
  for (const auto& d : vm.dims()) names.push_back(d.name);
  auto summary = hull_summary(vm, {});
  std::vector<LinearConstraintSpec> cons;
  for (int step = 0; step < 4; ++step) {
    const std::size_t d = rng() % 5;
    const double cap = summary[d].min + 0.8 * (summary[d].max - summary[d].min);
    cons.push_back(parse_constraint(names[d] + "<=" + format_double(cap)));
    const auto next = hull_summary(vm, cons);
    for (std::size_t k = 0; k < vm.num_dims(); ++k) {
      EXPECT_GE(next[k].min, summary[k].min - 1e-9 * std::max(1.0, std::abs(summary[k].min)));
      EXPECT_LE(next[k].max, summary[k].max + 1e-9 * std::max(1.0, std::abs(summary[k].max)));
    }
    summary = next;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = explore(vm, random_objective(names, seed + 100 * step), cons);
      ASSERT_EQ(r.status, ExplorationStatus::optimal);
      for (const auto& c : cons) EXPECT_LE(constraint_violation(vm, c, r.point->coords), 1e-7);
    }
  }
}
