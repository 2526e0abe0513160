// Acceptance run: one PASS/FAIL line per primary criterion on the default toy
// instance. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mgca/dispatch.hpp"
#include "mgca/exploration.hpp"
#include "mgca/mga.hpp"
#include "mgca/simplex.hpp"
#include "support/lp_oracle.hpp"

using namespace mgca;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// c . z_i over every vertex, computed straight from the matrix.
double vertex_optimum(const VertexMatrix& vm, const std::vector<double>& c, lp::Sense sense) {
  double best = sense == lp::Sense::minimize ? 1e300 : -1e300;
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    double v = 0.0;
    for (std::size_t d = 0; d < vm.num_dims(); ++d) v += c[d] * vm.at(i, d);
    best = sense == lp::Sense::minimize ? std::min(best, v) : std::max(best, v);
  }
  return best;
}

ObjectiveSpec objective_of(const VertexMatrix& vm, const std::vector<double>& c, lp::Sense sense) {
  ObjectiveSpec obj;
  obj.sense = sense;
  for (std::size_t d = 0; d < vm.num_dims(); ++d) obj.terms[vm.dim(d).name] = c[d];
  return obj;
}

std::vector<double> gaussian_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

lp::Problem random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvars(1, 6), nrows(1, 8), coef(-5, 5), rel(0, 2), rhs(-4, 12);
  const int n = nvars(rng);
  lp::Problem p(static_cast<std::size_t>(n), rel(rng) == 0 ? lp::Sense::maximize : lp::Sense::minimize);
  for (auto& c : p.objective) c = coef(rng);
  const int m = nrows(rng);
  for (int i = 0; i < m; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (auto& a : row) a = coef(rng);
    const int r = rel(rng);
    const auto relation = r == 0 ? lp::Relation::greater_equal
                                 : (rng() % 5 == 0 ? lp::Relation::equal : lp::Relation::less_equal);
    p.add_constraint(row, relation, rhs(rng));
  }
  return p;
}

}  // namespace

int main() {
  constexpr std::uint64_t kSeed = 7;
  constexpr double kSlack = 0.10;
  const auto inst = cem::make_default_instance(3, 24);
  cem::MgaRunConfig cfg;
  cfg.budget_slack = kSlack;
  cfg.iterations = 199;  // plus the least-cost row: m = 200
  cfg.method = MgaMethod::random_vector;
  cfg.seed = kSeed;

  std::printf("toy instance: %zu zones, %zu hours; MGA slack %.2f, seed %llu\n", inst.zones.size(), inst.hours, kSlack,
              static_cast<unsigned long long>(kSeed));

  // Overestimation and budget laws share one 50-point dispatch study.
  const auto study_start = Clock::now();
  const auto run = cem::run_mga(inst, cfg);
  const auto& vm = run.vertices;
  const double c_star = run.least_cost;
  const auto points = random_interpolates(vm, 50, kSeed, 4);
  const auto rep = cem::accuracy_report(inst, vm, points);
  const double study_seconds = seconds_since(study_start);
  std::printf("MGA: m=%zu vertices, n=%zu dims, C*=%.6f, %.2f s\n", vm.num_vertices(), vm.num_dims(), c_star,
              run.solve_seconds);

  const std::size_t cost_d = vm.index_of("system_cost"), capex_d = vm.index_of("system_capex");
  {
    const std::size_t op = rep.metric_index("operational_cost");
    std::size_t holds = 0;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
      const auto& row = rep.rows[k];
      if (!row.feasible) continue;
      // Estimate rebuilt from the weights, independent of the interpolation code.
      double estimate = 0.0;
      for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
        estimate += points[k].weights.values[i] * (vm.at(i, cost_d) - vm.at(i, capex_d));
      }
      const bool same_estimate = rel_err(row.estimate[op], estimate) <= 1e-12;
      if (same_estimate && estimate >= row.actual[op] - 1e-9 * std::abs(row.actual[op])) ++holds;
    }
    report(holds == 50 && rep.rows.size() == 50 && study_seconds < 60.0, "overestimation_law",
           std::to_string(holds) + "/50 estimated operational cost >= dispatched (1e-9 rel); " +
               fmt("%.2f s (limit 60 s)", study_seconds));
  }
  {
    const std::size_t total = rep.metric_index("system_cost");
    std::size_t holds = 0;
    double worst = 0.0;
    for (const auto& row : rep.rows) {
      if (!row.feasible) continue;
      worst = std::max(worst, row.actual[total] / c_star);
      if (row.actual[total] <= (1.0 + kSlack) * c_star * (1.0 + 1e-9)) ++holds;
    }
    report(holds == 50, "budget_law",
           std::to_string(holds) + "/50 dispatched totals <= 1.10 C*; " + fmt("max total / C* = %.6f", worst));
  }

  {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(kSeed + 1);
    std::vector<std::size_t> capacity_dims;
    for (std::size_t d = 0; d < vm.num_dims(); ++d) {
      if (is_capacity_kind(vm.dim(d).kind)) capacity_dims.push_back(d);
    }
    std::uniform_int_distribution<std::size_t> support(1, vm.num_vertices()), pick(0, vm.num_vertices() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0), coef(-3.0, 3.0);
    std::size_t holds = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      WeightVector w{std::vector<double>(vm.num_vertices(), 0.0)};
      const std::size_t s = support(rng);
      double sum = 0.0;
      for (std::size_t k = 0; k < s; ++k) {
        const double e = -std::log(1.0 - unit(rng));
        w.values[pick(rng)] += e;
        sum += e;
      }
      for (auto& x : w.values) x /= sum;
      std::map<std::string, double> coeffs;
      for (std::size_t d : capacity_dims) {
        if (unit(rng) < 0.5) coeffs[vm.dim(d).name] = coef(rng);
      }
      if (coeffs.empty()) coeffs[vm.dim(capacity_dims.front()).name] = 1.0;
      const double exact = evaluate_affine_metric(vm, w, coeffs);
      const auto p = interpolate(vm, w);
      double from_coords = 0.0;
      for (const auto& [name, c] : coeffs) from_coords += c * p.coords[vm.index_of(name)];
      const double err = std::abs(exact - from_coords) / std::max(1.0, std::abs(from_coords));
      worst = std::max(worst, err);
      if (err <= 1e-10) ++holds;
    }
    const double secs = seconds_since(t0);
    report(holds == 1000 && secs < 5.0, "affine_exactness",
           std::to_string(holds) + "/1000 within 1e-10 rel" + fmt(" (worst %.2e); ", worst) +
               fmt("%.3f s (limit 5 s)", secs));
  }

  {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(kSeed + 2);
    std::size_t holds = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = gaussian_vector(vm.num_dims(), rng);
      const auto sense = trial % 2 == 0 ? lp::Sense::minimize : lp::Sense::maximize;
      const auto r = explore(vm, objective_of(vm, c, sense), {});
      const double expected = vertex_optimum(vm, c, sense);
      const double err = r.status == ExplorationStatus::optimal ? rel_err(r.objective_value, expected) : 1.0;
      worst = std::max(worst, err);
      if (err <= 1e-8) ++holds;
    }
    const double secs = seconds_since(t0);
    report(holds == 100 && secs < 10.0, "vertex_optimality",
           std::to_string(holds) + "/100 match the best vertex within 1e-8 rel" + fmt(" (worst %.2e); ", worst) +
               fmt("%.3f s (limit 10 s)", secs));
  }

  {
    const auto tight = budget_interpolate(vm, 0.06);
    const std::size_t lc = vm.least_cost_index();
    bool weight_exact = true, under_budget = true;
    double worst_ratio = 0.0;
    for (std::size_t k = 0, i = 0; i < vm.num_vertices(); ++i) {
      if (i == lc) continue;
      const auto& p = tight[k++];
      weight_exact = weight_exact && p.weights.values[i] == 0.6 && p.weights.values[lc] == 1.0 - 0.6;
      const double cost = p.coords[cost_d];
      worst_ratio = std::max(worst_ratio, cost / c_star);
      under_budget = under_budget && cost <= 1.06 * c_star * (1.0 + 1e-9);
    }
    const auto same = budget_interpolate(vm, kSlack);
    double worst_repro = 0.0;
    for (std::size_t k = 0, i = 0; i < vm.num_vertices(); ++i) {
      if (i == lc) continue;
      for (std::size_t d = 0; d < vm.num_dims(); ++d) {
        worst_repro = std::max(worst_repro, rel_err(same[k].coords[d], vm.at(i, d)));
      }
      ++k;
    }
    report(weight_exact && under_budget && worst_repro <= 1e-12 && tight.size() == vm.num_vertices() - 1,
           "budget_reinterpolation",
           std::string("w=0.6 ") + (weight_exact ? "exact" : "NOT exact") + fmt("; max cost / C* = %.6f (<= 1.06)", worst_ratio) +
               fmt("; slack 0.10 reproduces vertices to %.1e", worst_repro));
  }

  {
    const ObjectiveSpec cost{{{"system_cost", 1.0}}, lp::Sense::minimize};
    const auto t0 = Clock::now();
    const auto f = pareto_frontier(vm, cost, "system_emissions", 11, {});
    const double secs = seconds_since(t0);
    const auto& pts = f.points;
    bool nondominated = true, monotone = true;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      for (std::size_t b = 0; b < pts.size(); ++b) {
        if (a == b) continue;
        const double tt = 1e-9 * std::max({1.0, std::abs(pts[a].traced_value), std::abs(pts[b].traced_value)});
        const double to = 1e-9 * std::max({1.0, std::abs(pts[a].objective_value), std::abs(pts[b].objective_value)});
        const bool no_worse = pts[b].traced_value <= pts[a].traced_value + tt &&
                              pts[b].objective_value <= pts[a].objective_value + to;
        const bool better = pts[b].traced_value < pts[a].traced_value - tt ||
                            pts[b].objective_value < pts[a].objective_value - to;
        if (no_worse && better) nondominated = false;
      }
    }
    for (std::size_t k = 1; k < pts.size(); ++k) {
      monotone = monotone && pts[k].traced_value >= pts[k - 1].traced_value - 1e-9 * std::abs(pts[k].traced_value) &&
                 pts[k].objective_value <= pts[k - 1].objective_value * (1.0 + 1e-9);
    }
    std::vector<double> e_emis(vm.num_dims(), 0.0), e_cost(vm.num_dims(), 0.0);
    e_emis[vm.index_of("system_emissions")] = 1.0;
    e_cost[cost_d] = 1.0;
    const double min_emis = vertex_optimum(vm, e_emis, lp::Sense::minimize);
    const double min_cost = vertex_optimum(vm, e_cost, lp::Sense::minimize);
    const double err_lo = pts.empty() ? 1.0 : rel_err(pts.front().traced_value, min_emis);
    const double err_hi = pts.empty() ? 1.0 : rel_err(pts.back().objective_value, min_cost);
    report(pts.size() == 11 && nondominated && monotone && err_lo <= 1e-8 && err_hi <= 1e-8 && secs < 1.0,
           "pareto_frontier",
           std::to_string(pts.size()) + " points, " + (nondominated ? "non-dominated" : "DOMINATED") + ", " +
               (monotone ? "monotone" : "NOT monotone") + fmt("; endpoint errors %.1e", err_lo) +
               fmt(" / %.1e", err_hi) + fmt("; %.3f s (limit 1 s)", secs));
  }

  {
    const std::vector<std::string> gas{"z1.gas", "z2.gas", "z3.gas"};
    std::vector<double> e(vm.num_dims(), 0.0);
    for (const auto& g : gas) e[vm.index_of(g)] = 1.0;
    const double lo = vertex_optimum(vm, e, lp::Sense::minimize);
    const double hi = vertex_optimum(vm, e, lp::Sense::maximize);
    const double cap = lo + 0.4 * (hi - lo);
    const LinearConstraintSpec limit{{{"z1.gas", 1.0}, {"z2.gas", 1.0}, {"z3.gas", 1.0}},
                                     lp::Relation::less_equal, cap, "gas cap"};
    const auto t0 = Clock::now();
    const auto r = local_mga(vm, {limit}, 200, MgaMethod::random_vector, kSeed);
    const double secs = seconds_since(t0);
    std::size_t holds = 0;
    bool binding = false;
    for (const auto& res : r.results) {
      if (!res.point) continue;
      double total = 0.0;
      for (const auto& g : gas) total += res.point->coords[vm.index_of(g)];
      if (total <= cap + 1e-7) ++holds;
      binding = binding || total >= cap - 1e-6;
    }
    report(holds == 200 && r.results.size() == 200 && secs < 10.0, "constrained_local_mga",
           std::to_string(holds) + "/200 satisfy gas <= " + fmt("%.3f MW", cap) + fmt(" (range %.1f", lo) +
               fmt("..%.1f)", hi) + (binding ? ", cap binds" : ", cap never binds") +
               fmt("; %.3f s (limit 10 s)", secs));
  }

  {
    std::mt19937_64 rng(kSeed + 3);
    std::size_t agree = 0, optimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = random_lp(rng);
      const auto expected = oracle::brute_force(p);
      const auto got = lp::solve(p);
      bool ok = got.status == expected.status;
      if (ok && got.status == lp::Status::optimal) {
        ++optimal;
        ok = rel_err(got.objective_value, expected.value) <= 1e-8;
      }
      if (ok) ++agree;
    }
    report(agree == 200, "simplex_oracle",
           std::to_string(agree) + "/200 random LPs agree with basis enumeration (" + std::to_string(optimal) +
               " optimal)");
  }

  {
    std::vector<std::string> names;
    for (const auto& z : inst.zones) {
      for (const auto& t : z.technologies) names.push_back(z.id + "." + t.name);
    }
    names.push_back("system_cost");
    names.push_back("system_emissions");
    const auto small = project(vm, names);
    std::mt19937_64 rng(kSeed + 4);
    std::vector<double> ms;
    for (int trial = 0; trial < 100; ++trial) {
      const auto c = gaussian_vector(small.num_dims(), rng);
      const auto t0 = Clock::now();
      const auto r = explore(small, objective_of(small, c, lp::Sense::minimize), {});
      ms.push_back(seconds_since(t0) * 1e3);
      if (r.status != ExplorationStatus::optimal) ms.back() = 1e9;
    }
    std::sort(ms.begin(), ms.end());
    const double median = 0.5 * (ms[49] + ms[50]);
    report(small.num_vertices() == 200 && small.num_dims() == 14 && median < 50.0, "explore_latency",
           "m=" + std::to_string(small.num_vertices()) + ", n=" + std::to_string(small.num_dims()) +
               fmt("; median %.3f ms", median) + fmt(", max %.3f ms over 100 runs (limit 50 ms)", ms.back()));
  }

  {
    const auto& sys = rep.percent_summary.at("system_cost");
    double min_zonal_iqr = 1e300;
    std::string zonal;
    for (const auto& z : rep.zones) {
      const double iqr = rep.percent_summary.at("cost_" + z).iqr();
      zonal += (zonal.empty() ? "" : ", ") + z + fmt(" %.2f", iqr);
      min_zonal_iqr = std::min(min_zonal_iqr, iqr);
    }
    report(sys.mean > 0.0 && min_zonal_iqr > sys.iqr(), "accuracy_direction",
           fmt("mean system-cost difference %+.3f%%", sys.mean) + fmt("; IQR system %.2f pts", sys.iqr()) +
               " vs zonal cost " + zonal);
  }

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
