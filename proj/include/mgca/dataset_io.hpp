#pragma once

// Iterate files: `iterates.csv` (first column iterate_id, one column per
// dimension) plus a `metadata.json` sidecar describing the dimensions.

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgca/text_io.hpp"
#include "mgca/vertex_matrix.hpp"

namespace mgca {

inline constexpr const char* kIteratesFile = "iterates.csv";
inline constexpr const char* kMetadataFile = "metadata.json";

inline nlohmann::json metadata_json(const VertexMatrix& vm) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : vm.dims()) {
    dims.push_back({{"name", d.name}, {"kind", to_string(d.kind)}, {"units", d.units}, {"nonnegative", d.nonnegative}});
  }
  nlohmann::json meta = {{"dimensions", dims},
                         {"least_cost_id", vm.vertex_ids()[vm.least_cost_index()]},
                         {"budget_slack", vm.budget_slack()}};
  if (vm.cost_index()) meta["cost_dimension"] = vm.dim(*vm.cost_index()).name;
  return meta;
}

inline std::string iterates_csv(const VertexMatrix& vm) {
  std::ostringstream out;
  out << "iterate_id";
  for (const auto& d : vm.dims()) out << ',' << d.name;
  out << '\n';
  for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
    out << vm.vertex_ids()[i];
    for (double v : vm.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

/// Builds a VertexMatrix from CSV text and parsed metadata.
inline VertexMatrix parse_vertex_matrix(const std::string& csv_text, const nlohmann::json& meta,
                                        const ValidationOptions& opt = {}) {
  if (!meta.is_object() || !meta.contains("dimensions") || !meta["dimensions"].is_array()) {
    throw ValidationError("metadata: missing 'dimensions' array");
  }
  if (!meta.contains("least_cost_id") || !meta["least_cost_id"].is_string()) {
    throw ValidationError("metadata: missing 'least_cost_id'");
  }
  if (!meta.contains("budget_slack") || !meta["budget_slack"].is_number()) {
    throw ValidationError("metadata: missing numeric 'budget_slack'");
  }
  std::vector<DimensionInfo> dims;
  for (const auto& d : meta["dimensions"]) {
    if (!d.contains("name") || !d["name"].is_string()) throw ValidationError("metadata: dimension without a name");
    DimensionInfo info;
    info.name = d["name"].get<std::string>();
    info.kind = parse_dimension_kind(d.value("kind", std::string("capacity")));
    info.units = d.value("units", std::string());
    info.nonnegative = d.value("nonnegative", default_nonnegative(info.kind));
    dims.push_back(std::move(info));
  }

  const CsvTable table = parse_csv_text(csv_text, kIteratesFile);
  if (table.header.empty() || table.header[0] != "iterate_id") {
    throw ValidationError("iterates.csv: first column must be 'iterate_id'");
  }
  std::map<std::string, std::size_t> column_of;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    if (!column_of.emplace(table.header[c], c).second) {
      throw ValidationError("iterates.csv: duplicate column '" + table.header[c] + "'");
    }
  }
  std::map<std::string, int> declared;
  for (const auto& d : dims) {
    if (++declared[d.name] > 1) throw ValidationError("metadata: duplicate dimension name '" + d.name + "'");
    if (!column_of.count(d.name)) throw ValidationError("iterates.csv: missing column for dimension '" + d.name + "'");
  }
  for (const auto& [name, c] : column_of) {
    if (!declared.count(name)) throw ValidationError("iterates.csv: column '" + name + "' not declared in metadata");
  }

  std::vector<std::string> ids;
  std::vector<double> values;
  values.reserve(table.rows.size() * dims.size());
  for (const auto& row : table.rows) {
    ids.push_back(row[0]);
    for (const auto& d : dims) {
      values.push_back(parse_double(row[column_of[d.name]], "vertex '" + row[0] + "', dimension '" + d.name + "'"));
    }
  }
  const std::string least_cost_id = meta["least_cost_id"].get<std::string>();
  std::optional<std::size_t> least_cost;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == least_cost_id) least_cost = i;
  }
  if (!least_cost) throw ValidationError("unknown least_cost_id '" + least_cost_id + "'");
  std::optional<std::string> cost_dim;
  if (meta.contains("cost_dimension") && meta["cost_dimension"].is_string()) {
    cost_dim = meta["cost_dimension"].get<std::string>();
  }
  return VertexMatrix::create(std::move(dims), std::move(ids), std::move(values), *least_cost,
                              meta["budget_slack"].get<double>(), cost_dim, opt);
}

inline VertexMatrix load_vertex_matrix(const std::string& iterates_path, const std::string& metadata_path,
                                       const ValidationOptions& opt = {}) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text_file(metadata_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(metadata_path + ": " + e.what());
  }
  return parse_vertex_matrix(read_text_file(iterates_path), meta, opt);
}

/// Loads `iterates.csv` + `metadata.json` from a dataset directory.
inline VertexMatrix load_dataset_dir(const std::filesystem::path& dir, const ValidationOptions& opt = {}) {
  return load_vertex_matrix((dir / kIteratesFile).string(), (dir / kMetadataFile).string(), opt);
}

inline void write_vertex_matrix(const VertexMatrix& vm, const std::string& iterates_path,
                                const std::string& metadata_path) {
  write_text_file(iterates_path, iterates_csv(vm));
  write_text_file(metadata_path, metadata_json(vm).dump(2) + "\n");
}

inline void write_dataset_dir(const VertexMatrix& vm, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_vertex_matrix(vm, (dir / kIteratesFile).string(), (dir / kMetadataFile).string());
}

}  // namespace mgca
