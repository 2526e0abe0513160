#pragma once

// JSON shapes shared by the service and the CLI's --format json output.
// Non-finite numbers serialize as null.

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgca/exploration.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca::json_io {

using nlohmann::json;

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json dimension_json(const DimensionInfo& d) {
  return {{"name", d.name}, {"kind", to_string(d.kind)}, {"units", d.units}, {"nonnegative", d.nonnegative}};
}

/// Dimension catalog plus the columnwise range of each dimension.
inline json catalog_json(const std::string& id, const VertexMatrix& vm) {
  json dims = json::array();
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    auto entry = dimension_json(vm.dim(d));
    double lo = vm.at(0, d), hi = lo;
    for (std::size_t i = 1; i < vm.num_vertices(); ++i) {
      lo = std::min(lo, vm.at(i, d));
      hi = std::max(hi, vm.at(i, d));
    }
    entry["min"] = lo;
    entry["max"] = hi;
    dims.push_back(std::move(entry));
  }
  json out = {{"id", id},
              {"dimensions", dims},
              {"num_vertices", vm.num_vertices()},
              {"vertex_ids", vm.vertex_ids()},
              {"least_cost_id", vm.vertex_ids()[vm.least_cost_index()]},
              {"budget_slack", vm.budget_slack()}};
  out["cost_dimension"] = vm.cost_index() ? json(vm.dim(*vm.cost_index()).name) : json(nullptr);
  return out;
}

/// `weights` is dense in vertex order; `support` lists the nonzero entries.
inline json point_json(const VertexMatrix& vm, const InterpolatedPoint& p) {
  json coords = json::object(), estimated = json::array(), support = json::array();
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    coords[vm.dim(d).name] = number(p.coords[d]);
    if (p.exactness[d] == Exactness::estimate) estimated.push_back(vm.dim(d).name);
  }
  for (std::size_t i = 0; i < p.weights.values.size(); ++i) {
    if (p.weights.values[i] != 0.0) support.push_back({{"id", vm.vertex_ids()[i]}, {"weight", p.weights.values[i]}});
  }
  return {{"coords", coords}, {"estimated", estimated}, {"weights", p.weights.values}, {"support", support}};
}

inline json range_json(const VertexMatrix& vm, const std::vector<DimensionRange>& ranges) {
  json out = json::object();
  for (std::size_t d = 0; d < ranges.size(); ++d) out[vm.dim(d).name] = {{"min", ranges[d].min}, {"max", ranges[d].max}};
  return out;
}

inline json exploration_json(const VertexMatrix& vm, const ExplorationResult& r) {
  json out = {{"status", r.status == ExplorationStatus::optimal ? "optimal" : "infeasible"},
              {"solve_ms", r.solve_millis},
              {"iterations", r.iterations}};
  if (r.status == ExplorationStatus::optimal) {
    out["objective_value"] = r.objective_value;
    out["is_vertex"] = r.is_vertex;
    out["point"] = point_json(vm, *r.point);
  } else {
    out["infeasible_label"] = r.infeasible_label;
  }
  return out;
}

inline json objective_json(const ObjectiveSpec& o) {
  return {{"terms", o.terms}, {"sense", o.sense == lp::Sense::minimize ? "min" : "max"}};
}

inline json frontier_json(const VertexMatrix& vm, const ParetoFrontier& f) {
  json points = json::array();
  for (const auto& p : f.points) {
    points.push_back({{"epsilon", p.epsilon},
                      {"traced_value", p.traced_value},
                      {"objective_value", p.objective_value},
                      {"point", point_json(vm, p.point)}});
  }
  return {{"traced_metric", f.traced_metric},
          {"objective_sense", f.objective_sense == lp::Sense::minimize ? "min" : "max"},
          {"epsilon_grid", f.epsilon_grid},
          {"points", points},
          {"solve_ms", f.solve_millis}};
}

}  // namespace mgca::json_io
