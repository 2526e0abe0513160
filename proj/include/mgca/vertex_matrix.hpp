#pragma once

// The reduced iterate set: m vertices over n named dimensions (capacity
// decisions plus metrics). Immutable once constructed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mgca/error.hpp"
#include "mgca/text_io.hpp"

namespace mgca {

enum class DimensionKind { capacity, operational_metric, capacity_metric };

inline const char* to_string(DimensionKind k) {
  switch (k) {
    case DimensionKind::capacity: return "capacity";
    case DimensionKind::operational_metric: return "operational_metric";
    case DimensionKind::capacity_metric: return "capacity_metric";
  }
  return "?";
}

inline DimensionKind parse_dimension_kind(const std::string& s) {
  if (s == "capacity") return DimensionKind::capacity;
  if (s == "operational_metric") return DimensionKind::operational_metric;
  if (s == "capacity_metric") return DimensionKind::capacity_metric;
  throw ValidationError("unknown dimension kind '" + s + "'");
}

/// Capacity-kind values (decisions and affine functions of them) survive
/// interpolation exactly; operational metrics only as estimates.
inline bool is_capacity_kind(DimensionKind k) { return k != DimensionKind::operational_metric; }

inline bool default_nonnegative(DimensionKind k) { return k == DimensionKind::capacity; }

struct DimensionInfo {
  std::string name;
  DimensionKind kind = DimensionKind::capacity;
  std::string units;
  bool nonnegative = true;
};

enum class BudgetPolicy { error, warn };

struct ValidationOptions {
  BudgetPolicy budget_policy = BudgetPolicy::error;
  /// Receives budget violations when the policy is `warn`.
  std::function<void(const std::string&)> on_warning;
};

class VertexMatrix {
public:
  /// Validates every invariant; throws ValidationError on the first breach.
  static VertexMatrix create(std::vector<DimensionInfo> dims, std::vector<std::string> vertex_ids,
                             std::vector<double> values, std::size_t least_cost_index, double budget_slack,
                             std::optional<std::string> cost_dimension, const ValidationOptions& opt = {}) {
    VertexMatrix vm;
    vm.dims_ = std::move(dims);
    vm.ids_ = std::move(vertex_ids);
    vm.values_ = std::move(values);
    vm.least_cost_ = least_cost_index;
    vm.slack_ = budget_slack;
    const std::size_t m = vm.ids_.size(), n = vm.dims_.size();
    if (m < 2) throw ValidationError("need at least 2 vertices, got " + std::to_string(m));
    if (n < 1) throw ValidationError("need at least 1 dimension");
    if (vm.values_.size() != m * n) throw ValidationError("value matrix does not match m x n");
    if (!(budget_slack > 0.0) || !std::isfinite(budget_slack)) {
      throw ValidationError("budget_slack must be a finite value > 0");
    }
    if (least_cost_index >= m) throw ValidationError("least-cost index out of range");

    for (std::size_t d = 0; d < n; ++d) {
      const auto& name = vm.dims_[d].name;
      if (name.empty()) throw ValidationError("empty dimension name");
      if (!vm.index_.emplace(name, d).second) throw ValidationError("duplicate dimension name '" + name + "'");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : vm.ids_) {
      if (!seen.insert(id).second) throw ValidationError("duplicate vertex id '" + id + "'");
    }
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t d = 0; d < n; ++d) {
        const double v = vm.values_[i * n + d];
        if (!std::isfinite(v)) {
          throw ValidationError("non-finite value for vertex '" + vm.ids_[i] + "', dimension '" + vm.dims_[d].name + "'");
        }
        if (vm.dims_[d].nonnegative && v < 0.0) {
          throw ValidationError("negative value " + format_double(v) + " for vertex '" + vm.ids_[i] +
                                "' in nonnegative dimension '" + vm.dims_[d].name + "'");
        }
      }
    }
    if (cost_dimension) {
      auto it = vm.index_.find(*cost_dimension);
      if (it == vm.index_.end()) throw ValidationError("unknown cost dimension '" + *cost_dimension + "'");
      vm.cost_ = it->second;
      const double limit = vm.budget_limit(budget_slack);
      const double tol = 1e-9 * std::max(1.0, std::abs(limit));
      for (std::size_t i = 0; i < m; ++i) {
        const double cost = vm.at(i, *vm.cost_);
        if (cost > limit + tol) {
          const std::string msg = "vertex '" + vm.ids_[i] + "' exceeds the budget: cost " + format_double(cost) +
                                  " > " + format_double(limit) + " (excess " + format_double(cost - limit) + ")";
          if (opt.budget_policy == BudgetPolicy::error) throw ValidationError(msg);
          if (opt.on_warning) opt.on_warning(msg);
        }
      }
    }
    return vm;
  }

  std::size_t num_vertices() const noexcept { return ids_.size(); }
  std::size_t num_dims() const noexcept { return dims_.size(); }

  double at(std::size_t vertex, std::size_t dim) const { return values_[vertex * dims_.size() + dim]; }
  std::span<const double> row(std::size_t vertex) const {
    return {values_.data() + vertex * dims_.size(), dims_.size()};
  }
  const std::vector<double>& values() const noexcept { return values_; }

  const std::vector<DimensionInfo>& dims() const noexcept { return dims_; }
  const DimensionInfo& dim(std::size_t d) const { return dims_.at(d); }
  const std::vector<std::string>& vertex_ids() const noexcept { return ids_; }

  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const std::string& name) const {
    auto d = find(name);
    if (!d) throw ValidationError("unknown dimension '" + name + "'");
    return *d;
  }

  std::size_t index_of_vertex(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw ValidationError("unknown vertex '" + id + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::size_t least_cost_index() const noexcept { return least_cost_; }
  double budget_slack() const noexcept { return slack_; }
  std::optional<std::size_t> cost_index() const noexcept { return cost_; }

  /// Cost of the least-cost vertex. Requires a cost dimension.
  double least_cost() const {
    if (!cost_) throw ValidationError("dataset declares no cost dimension");
    return at(least_cost_, *cost_);
  }
  /// (1 + slack) x least cost.
  double budget_limit(double slack) const { return (1.0 + slack) * least_cost(); }

private:
  VertexMatrix() = default;

  std::vector<DimensionInfo> dims_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t least_cost_ = 0;
  double slack_ = 0.0;
  std::optional<std::size_t> cost_;
};

/// Keeps only the named dimensions, in the given order.
inline VertexMatrix project(const VertexMatrix& vm, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  std::vector<DimensionInfo> dims;
  for (const auto& name : names) {
    idx.push_back(vm.index_of(name));
    dims.push_back(vm.dim(idx.back()));
  }
  std::vector<double> values;
  values.reserve(vm.num_vertices() * idx.size());
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    for (std::size_t d : idx) values.push_back(vm.at(i, d));
  }
  std::optional<std::string> cost;
  if (vm.cost_index()) {
    const auto& cost_name = vm.dim(*vm.cost_index()).name;
    for (const auto& name : names) {
      if (name == cost_name) cost = cost_name;
    }
  }
  ValidationOptions lenient;
  lenient.budget_policy = BudgetPolicy::warn;
  return VertexMatrix::create(std::move(dims), vm.vertex_ids(), std::move(values), vm.least_cost_index(),
                              vm.budget_slack(), cost, lenient);
}

}  // namespace mgca
