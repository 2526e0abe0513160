#pragma once

// Convex combinations of vertices and the metric values they carry.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mgca/error.hpp"
#include "mgca/random.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca {

inline constexpr double kWeightSumTolerance = 1e-9;
inline constexpr double kWeightNegativeTolerance = 1e-12;

/// Convex-combination weights, one per vertex.
struct WeightVector {
  std::vector<double> values;

  static WeightVector unit(std::size_t m, std::size_t i) {
    WeightVector w{std::vector<double>(m, 0.0)};
    w.values.at(i) = 1.0;
    return w;
  }
};

inline void validate_weights(const WeightVector& w, std::size_t m) {
  if (w.values.size() != m) {
    throw ValidationError("weight vector has length " + std::to_string(w.values.size()) + ", expected " +
                          std::to_string(m));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = w.values[i];
    if (!std::isfinite(v)) throw ValidationError("non-finite weight at index " + std::to_string(i));
    if (v < -kWeightNegativeTolerance) {
      throw ValidationError("negative weight " + format_double(v) + " at index " + std::to_string(i));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw ValidationError("weights sum to " + format_double(sum) + ", expected 1");
  }
}

enum class Exactness { exact, estimate };

inline const char* to_string(Exactness e) { return e == Exactness::exact ? "exact" : "estimate"; }

struct InterpolatedPoint {
  WeightVector weights;
  std::vector<double> coords;
  std::vector<Exactness> exactness;
};

/// coords = Z^T w; capacity-kind dimensions are exact, operational metrics estimates.
inline InterpolatedPoint interpolate(const VertexMatrix& vm, const WeightVector& w) {
  validate_weights(w, vm.num_vertices());
  const std::size_t n = vm.num_dims();
  InterpolatedPoint p;
  p.weights = w;
  p.coords.assign(n, 0.0);
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    const double wi = w.values[i];
    if (wi == 0.0) continue;
    const auto row = vm.row(i);
    for (std::size_t d = 0; d < n; ++d) p.coords[d] += wi * row[d];
  }
  p.exactness.reserve(n);
  for (const auto& dim : vm.dims()) {
    p.exactness.push_back(is_capacity_kind(dim.kind) ? Exactness::exact : Exactness::estimate);
  }
  return p;
}

/// `count` random convex combinations of the `support` vertices, with
/// weights uniform on the simplex over the support.
inline std::vector<InterpolatedPoint> batch_interpolate(const VertexMatrix& vm, std::size_t count,
                                                        std::uint64_t seed, std::span<const std::size_t> support) {
  if (support.empty()) throw ValidationError("interpolation support is empty");
  if (count < 1) throw ValidationError("count must be at least 1");
  for (std::size_t i : support) {
    if (i >= vm.num_vertices()) throw ValidationError("support index " + std::to_string(i) + " out of range");
  }
  Rng rng = make_rng(seed, "batch_interpolate");
  std::vector<InterpolatedPoint> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    WeightVector w{std::vector<double>(vm.num_vertices(), 0.0)};
    std::vector<double> draws(support.size());
    double total = 0.0;
    for (auto& e : draws) total += (e = standard_exponential(rng));
    for (std::size_t s = 0; s < support.size(); ++s) w.values[support[s]] += draws[s] / total;
    out.push_back(interpolate(vm, w));
  }
  return out;
}

/// `count` points, each a uniform-on-simplex combination of its own
/// `support_size` distinct vertices drawn uniformly without replacement.
inline std::vector<InterpolatedPoint> random_interpolates(const VertexMatrix& vm, std::size_t count,
                                                          std::uint64_t seed, std::size_t support_size) {
  const std::size_t m = vm.num_vertices();
  if (count < 1) throw ValidationError("count must be at least 1");
  if (support_size < 1 || support_size > m) {
    throw ValidationError("support size must be between 1 and " + std::to_string(m));
  }
  Rng rng = make_rng(seed, "random_interpolates");
  std::vector<InterpolatedPoint> out;
  out.reserve(count);
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    for (std::size_t s = 0; s < support_size; ++s) std::swap(order[s], order[s + uniform_index(rng, m - s)]);
    WeightVector w{std::vector<double>(m, 0.0)};
    std::vector<double> draws(support_size);
    double total = 0.0;
    for (auto& e : draws) total += (e = standard_exponential(rng));
    for (std::size_t s = 0; s < support_size; ++s) w.values[order[s]] = draws[s] / total;
    out.push_back(interpolate(vm, w));
  }
  return out;
}

/// Exact value of sum_d coeffs[d] * z_d at the interpolated point, computed
/// as the convex combination of the per-vertex metric values. Only
/// capacity-kind dimensions may appear.
inline double evaluate_affine_metric(const VertexMatrix& vm, const WeightVector& w,
                                     const std::map<std::string, double>& coeffs) {
  validate_weights(w, vm.num_vertices());
  std::vector<std::pair<std::size_t, double>> terms;
  for (const auto& [name, c] : coeffs) {
    const std::size_t d = vm.index_of(name);
    if (!is_capacity_kind(vm.dim(d).kind)) {
      throw ValidationError("dimension '" + name +
                            "' is an operational metric; its interpolated value is only an estimate");
    }
    terms.emplace_back(d, c);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    const double wi = w.values[i];
    if (wi == 0.0) continue;
    double vertex_metric = 0.0;
    for (const auto& [d, c] : terms) vertex_metric += c * vm.at(i, d);
    total += wi * vertex_metric;
  }
  return total;
}

}  // namespace mgca
