#pragma once

// Objective-vector generators shared by full MGA runs and local MGA inside
// the hull. All vectors are for minimization.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgca/error.hpp"
#include "mgca/random.hpp"

namespace mgca {

enum class MgaMethod { random_vector, minmax };

inline const char* to_string(MgaMethod m) { return m == MgaMethod::minmax ? "minmax" : "random_vector"; }

inline MgaMethod parse_mga_method(const std::string& s) {
  if (s == "random_vector" || s == "random") return MgaMethod::random_vector;
  if (s == "minmax") return MgaMethod::minmax;
  throw ValidationError("unknown MGA method '" + s + "' (expected random_vector or minmax)");
}

/// Uniform direction on the unit sphere: normalized independent normals.
inline std::vector<double> random_unit_vector(std::size_t n, Rng& rng) {
  if (n < 1) throw ValidationError("dimension must be at least 1");
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = standard_normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

inline std::vector<double> random_unit_vector(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, "random_objective");
  return random_unit_vector(n, rng);
}

/// Yields successive MGA objective vectors over `n` variables.
///
/// minmax: the first 2n vectors bracket each variable in order (+e_0, -e_0,
/// +e_1, -e_1, ...). Later vectors min/max a random subset: each entry is
/// drawn from {-1, 0, +1}, resampled until nonzero.
class MgaObjectiveGenerator {
public:
  MgaObjectiveGenerator(MgaMethod method, std::size_t n, std::uint64_t seed)
      : method_(method), n_(n), rng_(make_rng(seed, method == MgaMethod::minmax ? "mga_minmax" : "mga_random_vector")) {
    if (n < 1) throw ValidationError("MGA needs at least one variable");
  }

  std::vector<double> next() {
    const std::size_t k = count_++;
    if (method_ == MgaMethod::random_vector) return random_unit_vector(n_, rng_);
    std::vector<double> v(n_, 0.0);
    if (k < 2 * n_) {
      v[k / 2] = (k % 2 == 0) ? 1.0 : -1.0;
      return v;
    }
    bool any = false;
    while (!any) {
      for (auto& x : v) {
        x = static_cast<double>(static_cast<int>(uniform_index(rng_, 3)) - 1);
        any = any || x != 0.0;
      }
    }
    return v;
  }

private:
  MgaMethod method_;
  std::size_t n_;
  Rng rng_;
  std::size_t count_ = 0;
};

}  // namespace mgca
