#pragma once

// HTTP/JSON exploration service.
//
// Service::handle maps (method, path, body) to a Response and is usable
// without a network; mount() wires it into an httplib::Server.
//
//   GET    /health
//   GET    /datasets
//   POST   /datasets                          {id?, iterates_csv, metadata}
//   GET    /datasets/{id}/dimensions
//   POST   /sessions                          {dataset}
//   GET    /sessions/{id}
//   POST   /sessions/{id}/constraints         {constraint}
//   DELETE /sessions/{id}/constraints/{idx}
//   GET    /sessions/{id}/summary
//   POST   /sessions/{id}/explore             {objective, sense}
//   POST   /sessions/{id}/pareto              {objective, sense, trace, steps}
//   POST   /sessions/{id}/budget              {slack}
//   POST   /sessions/{id}/interpolate         {weights} | {count, seed, support_size | support}
//   POST   /sessions/{id}/localmga            {iterations, method, seed}
//   POST   /sessions/{id}/export              {weights}  -> capacities.csv
//
// Errors: {"error": {"code", "message", "detail"}}.

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mgca/dataset_io.hpp"
#include "mgca/exploration.hpp"
#include "mgca/export.hpp"
#include "mgca/json_io.hpp"

namespace mgca::service {

using nlohmann::json;

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  /// Set for cacheable endpoints: true when served from the result cache.
  std::optional<bool> cache_hit;

  json json_body() const { return json::parse(body); }
};

class ApiError : public std::runtime_error {
public:
  ApiError(int status, std::string code, const std::string& message, json detail = json::object())
      : std::runtime_error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const json& detail() const { return detail_; }

private:
  int status_;
  std::string code_;
  json detail_;
};

inline Response error_response(int status, const std::string& code, const std::string& message,
                               const json& detail = json::object()) {
  return {status, json{{"error", {{"code", code}, {"message", message}, {"detail", detail}}}}.dump(), "application/json",
          std::nullopt};
}

struct Session {
  std::string id;
  std::string dataset;
  std::shared_ptr<const VertexMatrix> vertices;
  std::vector<LinearConstraintSpec> constraints;
  std::int64_t created_ms = 0;
  std::int64_t touched_ms = 0;
  mutable std::mutex mutex;
};

struct ServiceOptions {
  std::size_t cache_capacity = 1024;
};

inline std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

inline bool valid_id(const std::string& id) {
  static const std::regex re("[A-Za-z0-9_.-]{1,128}");
  return std::regex_match(id, re) && id != "." && id != "..";
}

class Service {
public:
  explicit Service(ServiceOptions opt = {}) : opt_(opt) {}

  /// Loads every subdirectory of `dir` holding iterates.csv and
  /// metadata.json; the directory name becomes the dataset id.
  std::vector<std::string> load_data_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ValidationError("data directory not found: " + dir.string());
    std::vector<std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_directory() && std::filesystem::exists(entry.path() / kIteratesFile) &&
          std::filesystem::exists(entry.path() / kMetadataFile)) {
        found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> ids;
    for (const auto& p : found) {
      const std::string id = p.filename().string();
      add_dataset(id, load_dataset_dir(p));
      ids.push_back(id);
    }
    return ids;
  }

  void add_dataset(const std::string& id, VertexMatrix vm) {
    if (!valid_id(id)) throw ValidationError("invalid dataset id '" + id + "'");
    std::unique_lock lock(mutex_);
    if (datasets_.count(id)) throw ApiError(409, "conflict", "dataset '" + id + "' already exists");
    datasets_.emplace(id, std::make_shared<const VertexMatrix>(std::move(vm)));
  }

  std::vector<std::string> dataset_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, vm] : datasets_) ids.push_back(id);
    return ids;
  }

  Response handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, path, body);
    } catch (const ApiError& e) {
      return error_response(e.status(), e.code(), e.what(), e.detail());
    } catch (const ParseError& e) {
      return error_response(400, "parse_error", e.what(),
                            {{"text", e.text()}, {"position", e.position()}, {"caret", e.caret()}});
    } catch (const InfeasibleError& e) {
      return error_response(409, "infeasible", e.what(), {{"label", e.label()}});
    } catch (const ValidationError& e) {
      return error_response(400, "validation_error", e.what());
    } catch (const json::exception& e) {
      return error_response(400, "bad_request", e.what());
    } catch (const Error& e) {
      return error_response(500, "solver_error", e.what());
    } catch (const std::exception& e) {
      return error_response(500, "internal", e.what());
    }
  }

  /// Sessions and their constraint lists; datasets are not included.
  json snapshot() const {
    std::shared_lock lock(mutex_);
    json sessions = json::array();
    for (const auto& [id, s] : sessions_) {
      std::lock_guard guard(s->mutex);
      json labels = json::array();
      for (const auto& c : s->constraints) labels.push_back(c.label);
      sessions.push_back({{"id", s->id},
                          {"dataset", s->dataset},
                          {"constraints", labels},
                          {"created_ms", s->created_ms},
                          {"touched_ms", s->touched_ms}});
    }
    return {{"next_session", next_session_}, {"sessions", sessions}};
  }

  /// Restores sessions whose dataset is loaded; returns how many were skipped.
  std::size_t restore(const json& snap) {
    std::unique_lock lock(mutex_);
    std::size_t skipped = 0;
    next_session_ = std::max(next_session_, snap.value("next_session", std::uint64_t{1}));
    for (const auto& j : snap.at("sessions")) {
      auto it = datasets_.find(j.at("dataset").get<std::string>());
      if (it == datasets_.end()) {
        ++skipped;
        continue;
      }
      auto s = std::make_shared<Session>();
      s->id = j.at("id").get<std::string>();
      s->dataset = it->first;
      s->vertices = it->second;
      for (const auto& label : j.at("constraints")) {
        auto c = parse_constraint(label.get<std::string>());
        validate_constraint(*s->vertices, c);
        s->constraints.push_back(std::move(c));
      }
      s->created_ms = j.value("created_ms", now_ms());
      s->touched_ms = j.value("touched_ms", s->created_ms);
      sessions_[s->id] = std::move(s);
    }
    return skipped;
  }

private:
  using Params = std::smatch;

  Response route(const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex dataset_dims(R"(/datasets/([^/]+)/dimensions)");
    static const std::regex session_root(R"(/sessions/([^/]+))");
    static const std::regex session_action(R"(/sessions/([^/]+)/(constraints|summary|explore|pareto|budget|interpolate|localmga|export))");
    static const std::regex constraint_item(R"(/sessions/([^/]+)/constraints/([^/]+))");
    std::smatch m;
    if (path == "/health") {
      require(method, "GET");
      return ok({{"status", "ok"}});
    }
    if (path == "/datasets") {
      if (method == "GET") return ok({{"datasets", dataset_ids()}});
      require(method, "POST");
      return upload_dataset(parse_body(body));
    }
    if (std::regex_match(path, m, dataset_dims)) {
      require(method, "GET");
      const std::string id = m[1];
      return ok(json_io::catalog_json(id, *dataset(id)));
    }
    if (path == "/sessions") {
      require(method, "POST");
      return create_session(parse_body(body));
    }
    if (std::regex_match(path, m, session_root)) {
      require(method, "GET");
      return ok(session_json(*session(m[1])));
    }
    if (std::regex_match(path, m, constraint_item)) {
      require(method, "DELETE");
      return delete_constraint(*session(m[1]), m[2]);
    }
    if (std::regex_match(path, m, session_action)) {
      auto s = session(m[1]);
      const std::string action = m[2];
      if (action == "summary") {
        require(method, "GET");
        return summary(*s);
      }
      require(method, "POST");
      const json req = parse_body(body);
      if (action == "constraints") return add_constraint(*s, req);
      if (action == "export") return export_point(*s, req);
      return run_cached(*s, action, req);
    }
    throw ApiError(404, "not_found", "no route for " + method + " " + path);
  }

  static void require(const std::string& method, const char* expected) {
    if (method != expected) throw ApiError(405, "method_not_allowed", "use " + std::string(expected));
  }

  static json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    json j = json::parse(body);
    if (!j.is_object()) throw ApiError(400, "bad_request", "request body must be a JSON object");
    return j;
  }

  static Response ok(const json& j, int status = 200) { return {status, j.dump(), "application/json", std::nullopt}; }

  std::shared_ptr<const VertexMatrix> dataset(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = datasets_.find(id);
    if (it == datasets_.end()) throw ApiError(404, "unknown_dataset", "unknown dataset '" + id + "'", {{"dataset", id}});
    return it->second;
  }

  std::shared_ptr<Session> session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown_session", "unknown session '" + id + "'", {{"session", id}});
    return it->second;
  }

  Response upload_dataset(const json& req) {
    if (!req.contains("iterates_csv") || !req["iterates_csv"].is_string()) {
      throw ValidationError("body needs 'iterates_csv' as a string");
    }
    if (!req.contains("metadata") || !req["metadata"].is_object()) throw ValidationError("body needs a 'metadata' object");
    std::string id;
    if (req.contains("id")) {
      id = req["id"].get<std::string>();
    } else {
      std::unique_lock lock(mutex_);
      do {
        id = "upload-" + std::to_string(next_upload_++);
      } while (datasets_.count(id));
    }
    auto vm = parse_vertex_matrix(req["iterates_csv"].get<std::string>(), req["metadata"]);
    add_dataset(id, std::move(vm));
    return ok(json_io::catalog_json(id, *dataset(id)), 201);
  }

  Response create_session(const json& req) {
    if (!req.contains("dataset") || !req["dataset"].is_string()) throw ValidationError("body needs 'dataset'");
    const std::string id = req["dataset"].get<std::string>();
    auto vm = dataset(id);
    auto s = std::make_shared<Session>();
    s->dataset = id;
    s->vertices = vm;
    s->created_ms = s->touched_ms = now_ms();
    {
      std::unique_lock lock(mutex_);
      s->id = "s" + std::to_string(next_session_++);
      sessions_[s->id] = s;
    }
    json out = session_json(*s);
    out["session_id"] = s->id;
    out["catalog"] = json_io::catalog_json(id, *vm);
    return ok(out, 201);
  }

  static std::vector<LinearConstraintSpec> constraints_of(const Session& s) {
    std::lock_guard guard(s.mutex);
    return s.constraints;
  }

  static json constraints_json(const std::vector<LinearConstraintSpec>& cs) {
    json out = json::array();
    for (std::size_t i = 0; i < cs.size(); ++i) out.push_back({{"index", i}, {"label", cs[i].label}});
    return out;
  }

  static json session_json(const Session& s) {
    std::lock_guard guard(s.mutex);
    return {{"id", s.id},
            {"dataset", s.dataset},
            {"constraints", constraints_json(s.constraints)},
            {"created_ms", s.created_ms},
            {"touched_ms", s.touched_ms}};
  }

  /// Summary for a given constraint list; an infeasible list is flagged, not rejected.
  json summary_for(const Session& s, const std::vector<LinearConstraintSpec>& cs) {
    return cached(s, cs, "summary", json::object(), [&] {
      json out = {{"constraints", constraints_json(cs)}};
      try {
        out["summary"] = json_io::range_json(*s.vertices, hull_summary(*s.vertices, cs));
        out["feasible"] = true;
        out["infeasible_label"] = nullptr;
      } catch (const InfeasibleError& e) {
        out["summary"] = nullptr;
        out["feasible"] = false;
        out["infeasible_label"] = e.label();
      }
      return out;
    }).first;
  }

  Response summary(const Session& s) { return ok(summary_for(s, constraints_of(s))); }

  Response add_constraint(Session& s, const json& req) {
    if (!req.contains("constraint") || !req["constraint"].is_string()) throw ValidationError("body needs 'constraint'");
    auto c = parse_constraint(req["constraint"].get<std::string>());
    validate_constraint(*s.vertices, c);
    std::vector<LinearConstraintSpec> cs;
    std::size_t index = 0;
    {
      std::lock_guard guard(s.mutex);
      index = s.constraints.size();
      s.constraints.push_back(std::move(c));
      s.touched_ms = now_ms();
      cs = s.constraints;
    }
    json out = summary_for(s, cs);
    out["index"] = index;
    return ok(out);
  }

  Response delete_constraint(Session& s, const std::string& index_text) {
    std::vector<LinearConstraintSpec> cs;
    {
      std::lock_guard guard(s.mutex);
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(index_text, &used);
        if (used != index_text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ApiError(400, "validation_error", "constraint index must be a nonnegative integer");
      }
      if (idx >= s.constraints.size()) {
        throw ApiError(404, "unknown_constraint", "no constraint at index " + index_text,
                       {{"count", s.constraints.size()}});
      }
      s.constraints.erase(s.constraints.begin() + static_cast<std::ptrdiff_t>(idx));
      s.touched_ms = now_ms();
      cs = s.constraints;
    }
    return ok(summary_for(s, cs));
  }

  static ObjectiveSpec objective_from(const json& req, const char* key = "objective") {
    if (!req.contains(key)) throw ValidationError(std::string("body needs '") + key + "'");
    ObjectiveSpec obj;
    const json& o = req[key];
    if (o.is_string()) {
      obj.terms = parse_expression(o.get<std::string>());
    } else if (o.is_object() && o.contains("terms")) {
      obj.terms = o["terms"].get<std::map<std::string, double>>();
    } else {
      throw ValidationError(std::string("'") + key + "' must be an expression string or {\"terms\": {...}}");
    }
    const std::string sense = req.value("sense", std::string("min"));
    if (sense == "min" || sense == "minimize") {
      obj.sense = lp::Sense::minimize;
    } else if (sense == "max" || sense == "maximize") {
      obj.sense = lp::Sense::maximize;
    } else {
      throw ValidationError("sense must be 'min' or 'max'");
    }
    return obj;
  }

  static WeightVector weights_from(const VertexMatrix& vm, const json& w) {
    WeightVector out{std::vector<double>(vm.num_vertices(), 0.0)};
    if (w.is_array()) {
      if (w.size() != vm.num_vertices()) {
        throw ValidationError("weights need " + std::to_string(vm.num_vertices()) + " entries, got " +
                              std::to_string(w.size()));
      }
      for (std::size_t i = 0; i < w.size(); ++i) out.values[i] = w[i].get<double>();
    } else if (w.is_object()) {
      for (const auto& [id, value] : w.items()) out.values[vm.index_of_vertex(id)] = value.get<double>();
    } else {
      throw ValidationError("'weights' must be an array or an object keyed by vertex id");
    }
    validate_weights(out, vm.num_vertices());
    return out;
  }

  Response export_point(const Session& s, const json& req) {
    if (!req.contains("weights")) throw ValidationError("body needs 'weights'");
    const auto w = weights_from(*s.vertices, req["weights"]);
    return {200, capacities_csv(capacities_from_weights(*s.vertices, w)), "text/csv", std::nullopt};
  }

  json run_action(const Session& s, const std::vector<LinearConstraintSpec>& cs, const std::string& action,
                  const json& req) {
    const VertexMatrix& vm = *s.vertices;
    if (action == "explore") {
      const auto r = explore(vm, objective_from(req), cs);
      if (r.status == ExplorationStatus::infeasible) {
        throw InfeasibleError("constraint set is infeasible", r.infeasible_label);
      }
      return json_io::exploration_json(vm, r);
    }
    if (action == "pareto") {
      if (!req.contains("trace")) throw ValidationError("body needs 'trace'");
      const auto f = pareto_frontier(vm, objective_from(req), req["trace"].get<std::string>(),
                                     req.value("steps", std::size_t{11}), cs);
      return json_io::frontier_json(vm, f);
    }
    if (action == "budget") {
      if (!req.contains("slack")) throw ValidationError("body needs 'slack'");
      const double slack = req["slack"].get<double>();
      const auto pts = budget_interpolate(vm, slack);
      json points = json::array();
      std::size_t k = 0;
      for (std::size_t i = 0; i < vm.num_vertices(); ++i) {
        if (i == vm.least_cost_index()) continue;
        const auto& p = pts[k++];
        bool inside = true;
        for (const auto& c : cs) inside = inside && constraint_violation(vm, c, p.coords) <= kConstraintTolerance;
        json entry = json_io::point_json(vm, p);
        entry["vertex_id"] = vm.vertex_ids()[i];
        entry["satisfies_constraints"] = inside;
        points.push_back(std::move(entry));
      }
      json out = {{"slack", slack}, {"points", points}};
      out["budget_limit"] = vm.cost_index() ? json(vm.budget_limit(slack)) : json(nullptr);
      return out;
    }
    if (action == "interpolate") {
      std::vector<InterpolatedPoint> pts;
      if (req.contains("weights")) {
        pts.push_back(interpolate(vm, weights_from(vm, req["weights"])));
      } else {
        const auto count = req.value("count", std::size_t{1});
        const auto seed = req.value("seed", std::uint64_t{0});
        if (req.contains("support")) {
          std::vector<std::size_t> support;
          for (const auto& id : req["support"]) support.push_back(vm.index_of_vertex(id.get<std::string>()));
          pts = batch_interpolate(vm, count, seed, support);
        } else {
          pts = random_interpolates(vm, count, seed, req.value("support_size", std::min<std::size_t>(4, vm.num_vertices())));
        }
      }
      json points = json::array();
      for (const auto& p : pts) points.push_back(json_io::point_json(vm, p));
      return {{"points", points}};
    }
    if (action == "localmga") {
      const auto r = local_mga(vm, cs, req.value("iterations", std::size_t{10}),
                               parse_mga_method(req.value("method", std::string("random_vector"))),
                               req.value("seed", std::uint64_t{0}));
      if (r.infeasible_label) throw InfeasibleError("constraint set is infeasible", *r.infeasible_label);
      json results = json::array();
      for (std::size_t k = 0; k < r.results.size(); ++k) {
        json entry = json_io::exploration_json(vm, r.results[k]);
        entry["objective"] = json_io::objective_json(r.objectives[k]);
        results.push_back(std::move(entry));
      }
      return {{"results", results}};
    }
    throw ApiError(404, "not_found", "unknown action '" + action + "'");
  }

  Response run_cached(Session& s, const std::string& action, const json& req) {
    const auto cs = constraints_of(s);
    {
      std::lock_guard guard(s.mutex);
      s.touched_ms = now_ms();
    }
    auto [body, hit] = cached(s, cs, action, req, [&] { return run_action(s, cs, action, req); });
    Response r = ok(body);
    r.cache_hit = hit;
    return r;
  }

  /// Results are pure in (dataset, constraints, action, body), so equal keys
  /// share one cached body across sessions.
  template <class F>
  std::pair<json, bool> cached(const Session& s, const std::vector<LinearConstraintSpec>& cs, const std::string& action,
                               const json& req, F&& compute) {
    json labels = json::array();
    for (const auto& c : cs) labels.push_back(c.label);
    const std::string key =
        json{{"dataset", s.dataset}, {"constraints", labels}, {"endpoint", action}, {"body", req}}.dump();
    {
      std::lock_guard guard(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return {it->second, true};
    }
    json value = compute();
    std::lock_guard guard(cache_mutex_);
    auto [it, inserted] = cache_.emplace(key, value);
    if (inserted) {
      cache_order_.push_back(key);
      while (cache_order_.size() > opt_.cache_capacity) {
        cache_.erase(cache_order_.front());
        cache_order_.pop_front();
      }
    }
    return {it->second, !inserted};
  }

  ServiceOptions opt_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const VertexMatrix>> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
  std::uint64_t next_upload_ = 1;
  std::mutex cache_mutex_;
  std::unordered_map<std::string, json> cache_;
  std::deque<std::string> cache_order_;
};

/// Routes every request through `service`. Adds permissive CORS headers so
/// a browser dashboard on another origin can call the API.
inline void mount(httplib::Server& server, Service& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    if (r.cache_hit) res.set_header("X-Cache", *r.cache_hit ? "hit" : "miss");
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Delete(".*", handler);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

}  // namespace mgca::service
