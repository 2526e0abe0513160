#pragma once

// Small hand-built vertex sets shared by the unit tests.

#include <random>
#include <string>
#include <vector>

#include "mgca/vertex_matrix.hpp"

namespace testing_support {

/// Random vertex set with `caps` capacity dims, a cost dimension that respects
/// the budget, and one free-signed operational metric. Vertex 0 is least cost.
inline mgca::VertexMatrix random_vertex_matrix(std::size_t m, std::size_t caps, std::uint64_t seed,
                                               double slack = 0.10) {
  using namespace mgca;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cap(0.0, 100.0), frac(0.0, 1.0), metric(-50.0, 50.0);
  std::vector<DimensionInfo> dims;
  for (std::size_t d = 0; d < caps; ++d) {
    dims.push_back({"cap" + std::to_string(d), DimensionKind::capacity, "MW", true});
  }
  dims.push_back({"cost", DimensionKind::operational_metric, "$", true});
  dims.push_back({"revenue", DimensionKind::operational_metric, "$", false});
  std::vector<std::string> ids;
  std::vector<double> values;
  const double least = 1000.0;
  for (std::size_t i = 0; i < m; ++i) {
    ids.push_back("it" + std::to_string(i));
    for (std::size_t d = 0; d < caps; ++d) values.push_back(cap(rng));
    values.push_back(i == 0 ? least : least * (1.0 + slack * frac(rng)));
    values.push_back(metric(rng));
  }
  return VertexMatrix::create(dims, ids, values, 0, slack, std::string("cost"));
}

}  // namespace testing_support
