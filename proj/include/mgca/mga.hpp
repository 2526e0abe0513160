#pragma once

// MGA runs on the toy CEM: one least-cost solve, then repeated solves that
// minimize w'x over capacity variables under the cost budget
// c'x <= (1 + slack) * C*.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mgca/dataset_io.hpp"
#include "mgca/mga_vectors.hpp"
#include "mgca/simplex.hpp"
#include "mgca/toy_cem.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca::cem {

inline constexpr const char* kInstanceFile = "instance.json";

struct MgaRunConfig {
  double budget_slack = 0.10;
  std::size_t iterations = 200;
  MgaMethod method = MgaMethod::random_vector;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(budget_slack > 0.0) || !std::isfinite(budget_slack)) throw ValidationError("budget slack must be > 0");
    if (iterations < 1) throw ValidationError("MGA needs at least one iteration");
  }
};

struct MgaRun {
  VertexMatrix vertices;
  double least_cost;
  /// Objective over capacity variables for each MGA iterate (least-cost row excluded).
  std::vector<std::vector<double>> objectives;
  std::size_t simplex_iterations = 0;
  double solve_seconds = 0.0;
};

/// Dimension catalog of the reduced projection: capacities, then system and
/// zonal metrics.
inline std::vector<DimensionInfo> mga_dimensions(const ToyCemInstance& inst) {
  std::vector<DimensionInfo> dims;
  for (const auto& z : inst.zones) {
    for (const auto& k : z.technologies) dims.push_back({capacity_name(z, k), DimensionKind::capacity, "MW", true});
  }
  dims.push_back({"system_cost", DimensionKind::operational_metric, "$", true});
  dims.push_back({"system_capex", DimensionKind::capacity_metric, "$", true});
  dims.push_back({"system_emissions", DimensionKind::operational_metric, "t", true});
  for (const auto& z : inst.zones) dims.push_back({"cost_" + z.id, DimensionKind::operational_metric, "$", true});
  for (const auto& z : inst.zones) dims.push_back({"emissions_" + z.id, DimensionKind::operational_metric, "t", true});
  return dims;
}

/// One row of the reduced projection, in mga_dimensions order.
inline std::vector<double> project_metrics(const CemMetrics& m) {
  std::vector<double> row = m.capacities;
  row.push_back(m.total_cost());
  row.push_back(m.capital_cost);
  row.push_back(m.emissions);
  row.insert(row.end(), m.zone_cost.begin(), m.zone_cost.end());
  row.insert(row.end(), m.zone_emissions.begin(), m.zone_emissions.end());
  return row;
}

inline std::string mga_vertex_id(std::size_t k, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(total).size());
  std::string digits = std::to_string(k);
  return "mga_" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline MgaRun run_mga(const ToyCemInstance& inst, const MgaRunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  lp::Problem cem = build_cem_lp(inst);
  const Layout lay(inst);

  const auto least = lp::solve(cem);
  if (least.status == lp::Status::infeasible) {
    const std::string label = least.infeasible_row ? cem.constraints[*least.infeasible_row].label : "";
    throw InfeasibleError("least-cost CEM is infeasible", label);
  }
  if (least.status != lp::Status::optimal) {
    throw Error(std::string("least-cost CEM solve failed: ") +
                (least.status == lp::Status::unbounded ? "unbounded" : "iteration limit"));
  }
  const double c_star = least.objective_value;

  lp::Problem budgeted = cem;
  budgeted.add_constraint(cem.objective, lp::Relation::less_equal, (1.0 + cfg.budget_slack) * c_star, "budget");
  lp::Resolver resolver(std::move(budgeted));

  std::vector<std::vector<double>> objectives;
  std::size_t simplex_iterations = least.iterations;
  std::vector<std::string> ids{"least_cost"};
  std::vector<double> values = project_metrics(evaluate_metrics(inst, least.x));

  // Start the budgeted problem at its least-cost vertex so every MGA solve is warm.
  auto base = resolver.solve();
  if (base.status != lp::Status::optimal) throw Error("budgeted CEM has no optimum");
  simplex_iterations += base.iterations;

  MgaObjectiveGenerator gen(cfg.method, lay.capacity_count(), cfg.seed);
  std::vector<double> objective(lay.num_vars(), 0.0);
  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    const auto w = gen.next();
    std::fill(objective.begin(), objective.end(), 0.0);
    for (std::size_t j = 0; j < w.size(); ++j) objective[j] = w[j];  // capacity columns lead the layout
    const auto sol = resolver.reoptimize(objective, lp::Sense::minimize);
    if (sol.status != lp::Status::optimal) throw Error("MGA iterate " + std::to_string(k) + " did not solve");
    simplex_iterations += sol.iterations;
    objectives.push_back(w);
    ids.push_back(mga_vertex_id(k, cfg.iterations));
    const auto row = project_metrics(evaluate_metrics(inst, sol.x));
    values.insert(values.end(), row.begin(), row.end());
  }

  auto vm = VertexMatrix::create(mga_dimensions(inst), std::move(ids), std::move(values), 0, cfg.budget_slack,
                                 std::string("system_cost"));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return MgaRun{std::move(vm), c_star, std::move(objectives), simplex_iterations, seconds};
}

/// Writes iterates.csv, metadata.json and instance.json into `dir`.
inline void write_mga_dataset(const std::filesystem::path& dir, const ToyCemInstance& inst, const MgaRun& run,
                              const MgaRunConfig& cfg) {
  std::filesystem::create_directories(dir);
  auto meta = metadata_json(run.vertices);
  meta["generator"] = {{"method", to_string(cfg.method)},
                       {"iterations", cfg.iterations},
                       {"seed", cfg.seed},
                       {"least_cost", run.least_cost}};
  write_text_file((dir / kIteratesFile).string(), iterates_csv(run.vertices));
  write_text_file((dir / kMetadataFile).string(), meta.dump(2) + "\n");
  write_text_file((dir / kInstanceFile).string(), instance_json(inst).dump(2) + "\n");
}

}  // namespace mgca::cem
