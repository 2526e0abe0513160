#pragma once

// Operations-only solves of the toy CEM with every capacity fixed, and the
// estimate-versus-dispatch accuracy study built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgca/export.hpp"
#include "mgca/interpolation.hpp"
#include "mgca/simplex.hpp"
#include "mgca/toy_cem.hpp"

namespace mgca::cem {

struct DispatchResult {
  lp::Status status = lp::Status::optimal;
  double total_cost = 0.0;
  double capital_cost = 0.0;
  double operational_cost = 0.0;
  double emissions = 0.0;
  std::vector<double> zone_cost;
  std::vector<double> zone_emissions;
  /// Set when infeasible: first hour that cannot be served.
  std::optional<std::size_t> binding_hour;
  std::string message;

  bool feasible() const { return status == lp::Status::optimal; }
};

/// Capacities in Layout order. Every (zone, technology) of the instance must
/// appear exactly once.
inline std::vector<double> capacity_vector(const ToyCemInstance& inst, const std::vector<CapacityEntry>& entries) {
  std::map<std::pair<std::string, std::string>, double> given;
  for (const auto& e : entries) {
    if (!std::isfinite(e.capacity_mw) || e.capacity_mw < 0.0) {
      throw ValidationError("capacity for " + e.zone + "." + e.technology + " must be finite and >= 0");
    }
    if (!given.emplace(std::make_pair(e.zone, e.technology), e.capacity_mw).second) {
      throw ValidationError("duplicate capacity for " + e.zone + "." + e.technology);
    }
  }
  std::vector<double> caps;
  for (const auto& z : inst.zones) {
    for (const auto& k : z.technologies) {
      auto it = given.find({z.id, k.name});
      if (it == given.end()) throw ValidationError("no capacity given for " + capacity_name(z, k));
      caps.push_back(it->second);
      given.erase(it);
    }
  }
  if (!given.empty()) {
    const auto& [key, value] = *given.begin();
    throw ValidationError("capacity for unknown resource " + key.first + "." + key.second);
  }
  return caps;
}

namespace detail {

/// First hour whose demand exceeds what the fixed fleet can reach: system
/// shortfall first, then a single zone short even with full imports.
inline std::optional<std::size_t> binding_hour(const ToyCemInstance& inst, const std::vector<double>& caps) {
  const double tol = 1e-7;
  std::vector<std::vector<double>> local(inst.zones.size(), std::vector<double>(inst.hours, 0.0));
  std::size_t c = 0;
  for (std::size_t z = 0; z < inst.zones.size(); ++z) {
    for (const auto& k : inst.zones[z].technologies) {
      for (std::size_t t = 0; t < inst.hours; ++t) local[z][t] += k.availability[t] * caps[c];
      ++c;
    }
  }
  for (std::size_t t = 0; t < inst.hours; ++t) {
    double supply = 0.0, demand = 0.0;
    for (std::size_t z = 0; z < inst.zones.size(); ++z) {
      supply += local[z][t];
      demand += inst.zones[z].demand[t];
    }
    if (demand > supply + tol * std::max(1.0, demand)) return t;
  }
  for (std::size_t t = 0; t < inst.hours; ++t) {
    for (std::size_t z = 0; z < inst.zones.size(); ++z) {
      double imports = 0.0;
      for (const auto& l : inst.lines) {
        if (l.from == inst.zones[z].id || l.to == inst.zones[z].id) imports += l.limit;
      }
      const double d = inst.zones[z].demand[t];
      if (d > local[z][t] + imports + tol * std::max(1.0, d)) return t;
    }
  }
  return std::nullopt;
}

inline std::optional<std::size_t> hour_from_label(const std::string& label) {
  const auto colon = label.rfind(':');
  if (colon == std::string::npos) return std::nullopt;
  try {
    return static_cast<std::size_t>(std::stoul(label.substr(colon + 1)));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline DispatchResult fixed_capacity_dispatch(const ToyCemInstance& inst, const std::vector<CapacityEntry>& entries) {
  const auto caps = capacity_vector(inst, entries);
  lp::Problem p = build_cem_lp(inst);
  const Layout lay(inst);
  for (std::size_t j = 0; j < caps.size(); ++j) {
    p.lower[j] = caps[j];
    p.upper[j] = caps[j];
  }
  const auto sol = lp::solve(p);
  DispatchResult out;
  out.status = sol.status;
  if (sol.status == lp::Status::infeasible) {
    out.binding_hour = detail::binding_hour(inst, caps);
    if (!out.binding_hour && sol.infeasible_row) {
      out.binding_hour = detail::hour_from_label(p.constraints[*sol.infeasible_row].label);
    }
    out.message = "capacities cannot meet demand";
    if (out.binding_hour) out.message += " in hour " + std::to_string(*out.binding_hour);
    return out;
  }
  if (sol.status != lp::Status::optimal) {
    out.message = sol.status == lp::Status::unbounded ? "dispatch LP unbounded" : "dispatch LP hit the iteration limit";
    return out;
  }
  auto x = sol.x;
  for (std::size_t j = 0; j < caps.size(); ++j) x[j] = caps[j];
  const auto m = evaluate_metrics(inst, x);
  out.capital_cost = m.capital_cost;
  out.operational_cost = m.operational_cost;
  out.total_cost = m.total_cost();
  out.emissions = m.emissions;
  out.zone_cost = m.zone_cost;
  out.zone_emissions = m.zone_emissions;
  return out;
}

/// Quartiles use linear interpolation between order statistics.
struct SummaryStats {
  std::size_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();

  double iqr() const { return q3 - q1; }
};

inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// NaN entries are skipped.
inline SummaryStats summarize(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  SummaryStats s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (double x : v) total += x;
  s.mean = total / static_cast<double>(v.size());
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  return s;
}

/// 100 (estimate - actual) / actual; NaN when the actual value is zero.
inline double percent_difference(double estimate, double actual) {
  if (std::abs(actual) <= 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (estimate - actual) / actual;
}

struct AccuracyRow {
  std::size_t index = 0;
  bool feasible = true;
  std::string message;
  std::vector<double> estimate;  ///< per AccuracyReport::metrics
  std::vector<double> actual;
  std::vector<double> percent;
  /// Zone shares of system cost and emissions; shares of a zero total are NaN.
  std::vector<double> estimate_cost_share, actual_cost_share;
  std::vector<double> estimate_emission_share, actual_emission_share;
};

struct AccuracyReport {
  std::vector<std::string> metrics;
  std::vector<std::string> zones;
  std::vector<AccuracyRow> rows;
  std::map<std::string, SummaryStats> percent_summary;
  /// Estimate minus actual share, in percentage points, per zone.
  std::map<std::string, SummaryStats> cost_share_summary;
  std::map<std::string, SummaryStats> emission_share_summary;
  std::size_t infeasible_count = 0;

  std::size_t metric_index(const std::string& name) const {
    auto it = std::find(metrics.begin(), metrics.end(), name);
    if (it == metrics.end()) throw ValidationError("no metric '" + name + "' in report");
    return static_cast<std::size_t>(it - metrics.begin());
  }
};

namespace detail {

inline std::vector<double> shares(const std::vector<double>& parts) {
  double total = 0.0;
  for (double p : parts) total += p;
  std::vector<double> out;
  for (double p : parts) out.push_back(std::abs(total) > 1e-12 ? p / total : std::numeric_limits<double>::quiet_NaN());
  return out;
}

}  // namespace detail

/// Dispatches each interpolate's capacities and compares the interpolated
/// metric estimates with the dispatched values. `vm` must carry the columns
/// written by run_mga for this instance.
inline AccuracyReport accuracy_report(const ToyCemInstance& inst, const VertexMatrix& vm,
                                      const std::vector<InterpolatedPoint>& points) {
  AccuracyReport rep;
  rep.metrics = {"operational_cost", "system_cost", "system_emissions"};
  for (const auto& z : inst.zones) {
    rep.zones.push_back(z.id);
    rep.metrics.push_back("cost_" + z.id);
  }
  for (const auto& z : inst.zones) rep.metrics.push_back("emissions_" + z.id);

  const std::size_t cost = vm.index_of("system_cost");
  const std::size_t capex = vm.index_of("system_capex");
  const std::size_t emis = vm.index_of("system_emissions");
  std::vector<std::size_t> zc, ze;
  for (const auto& z : inst.zones) {
    zc.push_back(vm.index_of("cost_" + z.id));
    ze.push_back(vm.index_of("emissions_" + z.id));
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = points[i].coords;
    if (c.size() != vm.num_dims()) throw ValidationError("interpolate " + std::to_string(i) + " has the wrong size");
    AccuracyRow row;
    row.index = i;
    row.estimate = {c[cost] - c[capex], c[cost], c[emis]};
    for (std::size_t d : zc) row.estimate.push_back(c[d]);
    for (std::size_t d : ze) row.estimate.push_back(c[d]);
    std::vector<double> est_zc, est_ze;
    for (std::size_t d : zc) est_zc.push_back(c[d]);
    for (std::size_t d : ze) est_ze.push_back(c[d]);
    row.estimate_cost_share = detail::shares(est_zc);
    row.estimate_emission_share = detail::shares(est_ze);

    const auto res = fixed_capacity_dispatch(inst, capacities_from_point(vm, c));
    if (!res.feasible()) {
      row.feasible = false;
      row.message = res.message;
      ++rep.infeasible_count;
      rep.rows.push_back(std::move(row));
      continue;
    }
    row.actual = {res.operational_cost, res.total_cost, res.emissions};
    row.actual.insert(row.actual.end(), res.zone_cost.begin(), res.zone_cost.end());
    row.actual.insert(row.actual.end(), res.zone_emissions.begin(), res.zone_emissions.end());
    for (std::size_t k = 0; k < row.estimate.size(); ++k) {
      row.percent.push_back(percent_difference(row.estimate[k], row.actual[k]));
    }
    row.actual_cost_share = detail::shares(res.zone_cost);
    row.actual_emission_share = detail::shares(res.zone_emissions);
    rep.rows.push_back(std::move(row));
  }

  for (std::size_t k = 0; k < rep.metrics.size(); ++k) {
    std::vector<double> v;
    for (const auto& r : rep.rows) {
      if (r.feasible) v.push_back(r.percent[k]);
    }
    rep.percent_summary[rep.metrics[k]] = summarize(v);
  }
  for (std::size_t z = 0; z < rep.zones.size(); ++z) {
    std::vector<double> cs, es;
    for (const auto& r : rep.rows) {
      if (!r.feasible) continue;
      cs.push_back(100.0 * (r.estimate_cost_share[z] - r.actual_cost_share[z]));
      es.push_back(100.0 * (r.estimate_emission_share[z] - r.actual_emission_share[z]));
    }
    rep.cost_share_summary[rep.zones[z]] = summarize(cs);
    rep.emission_share_summary[rep.zones[z]] = summarize(es);
  }
  return rep;
}

inline nlohmann::json to_json(const SummaryStats& s) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"count", s.count}, {"mean", num(s.mean)}, {"min", num(s.min)},   {"q1", num(s.q1)},
          {"median", num(s.median)}, {"q3", num(s.q3)}, {"max", num(s.max)}};
}

inline nlohmann::json summary_json(const AccuracyReport& rep) {
  nlohmann::json pct = nlohmann::json::object(), cs = nlohmann::json::object(), es = nlohmann::json::object();
  for (const auto& [k, s] : rep.percent_summary) pct[k] = to_json(s);
  for (const auto& [k, s] : rep.cost_share_summary) cs[k] = to_json(s);
  for (const auto& [k, s] : rep.emission_share_summary) es[k] = to_json(s);
  return {{"interpolates", rep.rows.size()},
          {"infeasible", rep.infeasible_count},
          {"percent_difference", pct},
          {"cost_share_difference_pp", cs},
          {"emission_share_difference_pp", es}};
}

/// One line per interpolate: estimate, actual and percent difference per
/// metric, then zone share columns. Infeasible rows leave numeric cells empty.
inline std::string report_csv(const AccuracyReport& rep) {
  std::string out = "interpolate,feasible";
  for (const auto& m : rep.metrics) out += "," + m + "_estimate," + m + "_actual," + m + "_pct_diff";
  for (const auto& z : rep.zones) {
    out += ",cost_share_" + z + "_estimate,cost_share_" + z + "_actual";
    out += ",emission_share_" + z + "_estimate,emission_share_" + z + "_actual";
  }
  out += "\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& r : rep.rows) {
    out += std::to_string(r.index) + "," + (r.feasible ? "true" : "false");
    for (std::size_t k = 0; k < rep.metrics.size(); ++k) {
      out += "," + cell(r.estimate[k]);
      out += "," + (r.feasible ? cell(r.actual[k]) : std::string());
      out += "," + (r.feasible ? cell(r.percent[k]) : std::string());
    }
    for (std::size_t z = 0; z < rep.zones.size(); ++z) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out += "," + cell(r.estimate_cost_share[z]) + "," + cell(r.feasible ? r.actual_cost_share[z] : nan);
      out += "," + cell(r.estimate_emission_share[z]) + "," + cell(r.feasible ? r.actual_emission_share[z] : nan);
    }
    out += "\n";
  }
  return out;
}

}  // namespace mgca::cem
