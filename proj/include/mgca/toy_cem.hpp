#pragma once

// A small multi-zone capacity-expansion LP.
//
// Variables, in column order:
//   capacity  x[z,k]      MW built of technology k in zone z
//   dispatch  g[z,k,t]    MWh generated in hour t
//   flow      f[l,t]      MWh sent along line l (from -> to); free, |f| <= limit
//
// Rows:
//   balance   sum_k g[z,k,t] + inflow[z,t] - outflow[z,t] = demand[z,t]
//   avail     g[z,k,t] - availability[z,k,t] * x[z,k] <= 0
//
// Objective: sum capital_cost * x + sum variable_cost * g. Capital cost is
// per MW over the whole modelled horizon.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgca/error.hpp"
#include "mgca/lp.hpp"
#include "mgca/text_io.hpp"

namespace mgca::cem {

struct Technology {
  std::string name;
  double capital_cost = 0.0;    ///< $/MW over the horizon
  double variable_cost = 0.0;   ///< $/MWh
  double emissions_rate = 0.0;  ///< t/MWh
  std::vector<double> availability;  ///< fraction of capacity, per hour
};

struct Zone {
  std::string id;
  std::vector<double> demand;  ///< MWh per hour
  std::vector<Technology> technologies;
};

struct Line {
  std::string from;
  std::string to;
  double limit = 0.0;  ///< MW
};

struct ToyCemInstance {
  std::size_t hours = 0;
  std::vector<Zone> zones;
  std::vector<Line> lines;

  std::size_t zone_index(const std::string& id) const {
    for (std::size_t z = 0; z < zones.size(); ++z) {
      if (zones[z].id == id) return z;
    }
    throw ValidationError("unknown zone '" + id + "'");
  }

  /// Throws ValidationError on the first broken invariant.
  void validate() const {
    if (hours < 1) throw ValidationError("instance needs at least one hour");
    if (zones.empty()) throw ValidationError("instance needs at least one zone");
    std::set<std::string> ids;
    for (const auto& z : zones) {
      if (z.id.empty() || z.id.find_first_of(".,\n") != std::string::npos) {
        throw ValidationError("zone id '" + z.id + "' must be non-empty without '.', ',' or newlines");
      }
      if (!ids.insert(z.id).second) throw ValidationError("duplicate zone '" + z.id + "'");
      if (z.demand.size() != hours) throw ValidationError("zone '" + z.id + "': demand needs one value per hour");
      for (double d : z.demand) {
        if (!std::isfinite(d) || d < 0.0) throw ValidationError("zone '" + z.id + "': demand must be finite and >= 0");
      }
      if (z.technologies.empty()) throw ValidationError("zone '" + z.id + "' has no technology to serve it");
      std::set<std::string> names;
      for (const auto& k : z.technologies) {
        const std::string where = "zone '" + z.id + "', technology '" + k.name + "'";
        if (k.name.empty() || k.name.find_first_of(",\n") != std::string::npos) {
          throw ValidationError(where + ": name must be non-empty without ',' or newlines");
        }
        if (!names.insert(k.name).second) throw ValidationError(where + ": duplicate technology");
        if (!std::isfinite(k.capital_cost) || k.capital_cost < 0.0 || !std::isfinite(k.variable_cost) ||
            k.variable_cost < 0.0 || !std::isfinite(k.emissions_rate) || k.emissions_rate < 0.0) {
          throw ValidationError(where + ": costs and emissions must be finite and >= 0");
        }
        if (k.availability.size() != hours) throw ValidationError(where + ": availability needs one value per hour");
        for (double a : k.availability) {
          if (!(a >= 0.0 && a <= 1.0)) throw ValidationError(where + ": availability must lie in [0, 1]");
        }
      }
    }
    for (const auto& l : lines) {
      const std::size_t a = zone_index(l.from), b = zone_index(l.to);
      if (a == b) throw ValidationError("line from '" + l.from + "' to itself");
      if (!std::isfinite(l.limit) || l.limit < 0.0) throw ValidationError("line limit must be finite and >= 0");
    }
  }
};

inline void to_json(nlohmann::json& j, const Technology& k) {
  j = {{"name", k.name},
       {"capital_cost", k.capital_cost},
       {"variable_cost", k.variable_cost},
       {"emissions_rate", k.emissions_rate},
       {"availability", k.availability}};
}

inline void from_json(const nlohmann::json& j, Technology& k) {
  j.at("name").get_to(k.name);
  j.at("capital_cost").get_to(k.capital_cost);
  j.at("variable_cost").get_to(k.variable_cost);
  k.emissions_rate = j.value("emissions_rate", 0.0);
  j.at("availability").get_to(k.availability);
}

inline void to_json(nlohmann::json& j, const Zone& z) {
  j = {{"id", z.id}, {"demand", z.demand}, {"technologies", z.technologies}};
}

inline void from_json(const nlohmann::json& j, Zone& z) {
  j.at("id").get_to(z.id);
  j.at("demand").get_to(z.demand);
  j.at("technologies").get_to(z.technologies);
}

inline void to_json(nlohmann::json& j, const Line& l) { j = {{"from", l.from}, {"to", l.to}, {"limit", l.limit}}; }

inline void from_json(const nlohmann::json& j, Line& l) {
  j.at("from").get_to(l.from);
  j.at("to").get_to(l.to);
  j.at("limit").get_to(l.limit);
}

inline nlohmann::json instance_json(const ToyCemInstance& inst) {
  return {{"hours", inst.hours}, {"zones", inst.zones}, {"lines", inst.lines}};
}

inline ToyCemInstance parse_instance(const nlohmann::json& j) {
  ToyCemInstance inst;
  try {
    j.at("hours").get_to(inst.hours);
    j.at("zones").get_to(inst.zones);
    if (j.contains("lines")) j.at("lines").get_to(inst.lines);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("instance.json: ") + e.what());
  }
  inst.validate();
  return inst;
}

inline ToyCemInstance load_instance(const std::string& path) {
  try {
    return parse_instance(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

/// Desk-scale default: gas, wind, solar and baseload in every zone, with
/// sinusoidal demand and renewable profiles. Zones beyond the third reuse the
/// pattern with a phase shift. Lines form a ring (a single line for 2 zones).
inline ToyCemInstance make_default_instance(std::size_t zones = 3, std::size_t hours = 24) {
  if (zones < 1) throw ValidationError("need at least one zone");
  if (hours < 1) throw ValidationError("need at least one hour");
  constexpr double pi = std::numbers::pi;
  const double base_demand[] = {1000.0, 700.0, 300.0};
  const double wind_quality[] = {0.9, 1.0, 1.25};
  const double solar_quality[] = {1.0, 1.15, 0.85};
  const double line_limit[] = {300.0, 200.0, 150.0};
  const double T = static_cast<double>(hours);

  ToyCemInstance inst;
  inst.hours = hours;
  for (std::size_t z = 0; z < zones; ++z) {
    Zone zone;
    zone.id = "z" + std::to_string(z + 1);
    const double phase = 2.0 * pi * static_cast<double>(z) / 7.0;
    std::vector<double> demand(hours), wind(hours), solar(hours), flat_gas(hours, 0.95), flat_base(hours, 0.9);
    for (std::size_t t = 0; t < hours; ++t) {
      const double h = 24.0 * static_cast<double>(t) / T;  // hour of day
      demand[t] = base_demand[z % 3] * (1.0 + 0.25 * std::sin(2.0 * pi * (h - 9.0) / 24.0));
      wind[t] = std::clamp(wind_quality[z % 3] * (0.35 + 0.25 * std::cos(2.0 * pi * h / 24.0 + phase)), 0.0, 1.0);
      const double sun = std::sin(pi * (h - 6.0) / 12.0);
      solar[t] = h > 6.0 && h < 18.0 ? std::clamp(0.9 * solar_quality[z % 3] * sun, 0.0, 1.0) : 0.0;
    }
    zone.demand = std::move(demand);
    zone.technologies = {
        {"gas", 11.0 * T, 35.0, 0.4, flat_gas},
        {"wind", 17.0 * T, 0.0, 0.0, wind},
        {"solar", 9.0 * T, 0.0, 0.0, solar},
        {"baseload", 25.0 * T, 15.0, 0.95, flat_base},
    };
    inst.zones.push_back(std::move(zone));
  }
  if (zones == 2) {
    inst.lines.push_back({"z1", "z2", line_limit[0]});
  } else if (zones > 2) {
    for (std::size_t z = 0; z < zones; ++z) {
      const std::size_t next = (z + 1) % zones;
      const auto& a = inst.zones[std::min(z, next)].id;
      const auto& b = inst.zones[std::max(z, next)].id;
      inst.lines.push_back({a, b, line_limit[z % 3]});
    }
  }
  return inst;
}

/// Column positions of the CEM variables.
class Layout {
public:
  explicit Layout(const ToyCemInstance& inst) : hours_(inst.hours) {
    std::size_t next = 0;
    for (const auto& z : inst.zones) {
      capacity_offset_.push_back(next);
      next += z.technologies.size();
    }
    capacity_count_ = next;
    for (const auto& z : inst.zones) {
      dispatch_offset_.push_back(next);
      next += z.technologies.size() * hours_;
    }
    flow_offset_ = next;
    next += inst.lines.size() * hours_;
    total_ = next;
  }

  std::size_t capacity(std::size_t z, std::size_t k) const { return capacity_offset_[z] + k; }
  std::size_t dispatch(std::size_t z, std::size_t k, std::size_t t) const {
    return dispatch_offset_[z] + k * hours_ + t;
  }
  std::size_t flow(std::size_t l, std::size_t t) const { return flow_offset_ + l * hours_ + t; }
  std::size_t capacity_count() const { return capacity_count_; }
  std::size_t num_vars() const { return total_; }

private:
  std::size_t hours_;
  std::vector<std::size_t> capacity_offset_, dispatch_offset_;
  std::size_t flow_offset_ = 0, capacity_count_ = 0, total_ = 0;
};

/// `zone.technology`, the dimension name used for capacity columns.
inline std::string capacity_name(const Zone& z, const Technology& k) { return z.id + "." + k.name; }

inline std::vector<double> cost_vector(const ToyCemInstance& inst) {
  const Layout lay(inst);
  std::vector<double> c(lay.num_vars(), 0.0);
  for (std::size_t z = 0; z < inst.zones.size(); ++z) {
    const auto& techs = inst.zones[z].technologies;
    for (std::size_t k = 0; k < techs.size(); ++k) {
      c[lay.capacity(z, k)] = techs[k].capital_cost;
      for (std::size_t t = 0; t < inst.hours; ++t) c[lay.dispatch(z, k, t)] = techs[k].variable_cost;
    }
  }
  return c;
}

inline lp::Problem build_cem_lp(const ToyCemInstance& inst) {
  inst.validate();
  const Layout lay(inst);
  const std::size_t n = lay.num_vars();
  lp::Problem p(n, lp::Sense::minimize);
  p.objective = cost_vector(inst);
  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    for (std::size_t t = 0; t < inst.hours; ++t) {
      p.lower[lay.flow(l, t)] = -inst.lines[l].limit;
      p.upper[lay.flow(l, t)] = inst.lines[l].limit;
    }
  }
  for (std::size_t z = 0; z < inst.zones.size(); ++z) {
    const auto& zone = inst.zones[z];
    for (std::size_t t = 0; t < inst.hours; ++t) {
      std::vector<double> row(n, 0.0);
      for (std::size_t k = 0; k < zone.technologies.size(); ++k) row[lay.dispatch(z, k, t)] = 1.0;
      for (std::size_t l = 0; l < inst.lines.size(); ++l) {
        if (inst.lines[l].to == zone.id) row[lay.flow(l, t)] += 1.0;
        if (inst.lines[l].from == zone.id) row[lay.flow(l, t)] -= 1.0;
      }
      p.add_constraint(std::move(row), lp::Relation::equal, zone.demand[t],
                       "balance:" + zone.id + ":" + std::to_string(t));
    }
  }
  for (std::size_t z = 0; z < inst.zones.size(); ++z) {
    const auto& zone = inst.zones[z];
    for (std::size_t k = 0; k < zone.technologies.size(); ++k) {
      for (std::size_t t = 0; t < inst.hours; ++t) {
        std::vector<double> row(n, 0.0);
        row[lay.dispatch(z, k, t)] = 1.0;
        row[lay.capacity(z, k)] = -zone.technologies[k].availability[t];
        p.add_constraint(std::move(row), lp::Relation::less_equal, 0.0,
                         "avail:" + capacity_name(zone, zone.technologies[k]) + ":" + std::to_string(t));
      }
    }
  }
  return p;
}

/// Cost and emission totals of a CEM solution vector.
struct CemMetrics {
  std::vector<double> capacities;  ///< Layout capacity order
  double capital_cost = 0.0;
  double operational_cost = 0.0;
  double emissions = 0.0;
  std::vector<double> zone_cost;       ///< in-zone capital + in-zone variable cost
  std::vector<double> zone_emissions;

  double total_cost() const { return capital_cost + operational_cost; }
};

inline CemMetrics evaluate_metrics(const ToyCemInstance& inst, const std::vector<double>& x) {
  const Layout lay(inst);
  if (x.size() != lay.num_vars()) throw ValidationError("solution vector size mismatch");
  CemMetrics m;
  m.zone_cost.assign(inst.zones.size(), 0.0);
  m.zone_emissions.assign(inst.zones.size(), 0.0);
  for (std::size_t z = 0; z < inst.zones.size(); ++z) {
    const auto& techs = inst.zones[z].technologies;
    for (std::size_t k = 0; k < techs.size(); ++k) {
      const double cap = x[lay.capacity(z, k)];
      m.capacities.push_back(cap);
      const double capex = techs[k].capital_cost * cap;
      double energy = 0.0;
      for (std::size_t t = 0; t < inst.hours; ++t) energy += x[lay.dispatch(z, k, t)];
      const double opex = techs[k].variable_cost * energy;
      const double em = techs[k].emissions_rate * energy;
      m.capital_cost += capex;
      m.operational_cost += opex;
      m.emissions += em;
      m.zone_cost[z] += capex + opex;
      m.zone_emissions[z] += em;
    }
  }
  return m;
}

}  // namespace mgca::cem
