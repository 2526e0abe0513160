#pragma once

// capacities.csv: the hand-off file for full-model dispatch.
//
//   zone,technology,capacity_mw
//   z1,gas,345.17...
//
// Capacity dimensions named `zone.technology` split on the first '.';
// names without a '.' export with an empty zone.

#include <set>
#include <string>
#include <vector>

#include "mgca/error.hpp"
#include "mgca/interpolation.hpp"
#include "mgca/text_io.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca {

inline constexpr const char* kCapacitiesHeader = "zone,technology,capacity_mw";

struct CapacityEntry {
  std::string zone;
  std::string technology;
  double capacity_mw = 0.0;
};

inline std::vector<CapacityEntry> capacities_from_point(const VertexMatrix& vm, const std::vector<double>& coords) {
  if (coords.size() != vm.num_dims()) throw ValidationError("point has the wrong number of coordinates");
  std::vector<CapacityEntry> out;
  for (std::size_t d = 0; d < vm.num_dims(); ++d) {
    const auto& dim = vm.dim(d);
    if (dim.kind != DimensionKind::capacity) continue;
    const auto dot = dim.name.find('.');
    if (dot == std::string::npos) {
      out.push_back({"", dim.name, coords[d]});
    } else {
      out.push_back({dim.name.substr(0, dot), dim.name.substr(dot + 1), coords[d]});
    }
  }
  return out;
}

inline std::vector<CapacityEntry> capacities_from_weights(const VertexMatrix& vm, const WeightVector& w) {
  return capacities_from_point(vm, interpolate(vm, w).coords);
}

inline std::string capacities_csv(const std::vector<CapacityEntry>& entries) {
  std::string out = std::string(kCapacitiesHeader) + "\n";
  for (const auto& e : entries) out += e.zone + "," + e.technology + "," + format_double(e.capacity_mw) + "\n";
  return out;
}

inline std::vector<CapacityEntry> parse_capacities_csv(const std::string& text, const std::string& source = "capacities.csv") {
  const auto table = parse_csv_text(text, source);
  if (table.header != std::vector<std::string>{"zone", "technology", "capacity_mw"}) {
    throw ValidationError(source + ": header must be '" + kCapacitiesHeader + "'");
  }
  std::vector<CapacityEntry> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : table.rows) {
    CapacityEntry e{row[0], row[1], parse_double(row[2], source + ": " + row[0] + "." + row[1])};
    if (!seen.insert({e.zone, e.technology}).second) {
      throw ValidationError(source + ": duplicate entry for " + e.zone + "." + e.technology);
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<CapacityEntry> read_capacities_file(const std::string& path) {
  return parse_capacities_csv(read_text_file(path), path);
}

}  // namespace mgca
