#pragma once

// Subcommands of the `mgca` tool. run_cli takes explicit streams so tests can
// drive it in-process; stdout carries data only, diagnostics go to `err`.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 infeasible model/constraints.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "mgca/dataset_io.hpp"
#include "mgca/dispatch.hpp"
#include "mgca/exploration.hpp"
#include "mgca/export.hpp"
#include "mgca/json_io.hpp"
#include "mgca/mga.hpp"
#include "mgca/service.hpp"

namespace mgca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

namespace detail {

inline std::atomic<bool>& shutdown_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

extern "C" inline void on_signal(int) { shutdown_flag().store(true); }

/// Writes to `path`, or to `out` when the path is empty or "-".
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

/// First column `iterate_id` (a point label), then every dimension, then one
/// `w:<vertex id>` column per vertex unless weights are disabled.
inline std::string points_csv(const VertexMatrix& vm, const std::vector<std::string>& labels,
                              const std::vector<const InterpolatedPoint*>& points, bool weights) {
  std::string out = "iterate_id";
  for (const auto& d : vm.dims()) out += "," + d.name;
  if (weights) {
    for (const auto& id : vm.vertex_ids()) out += ",w:" + id;
  }
  out += "\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    out += labels[k];
    for (double v : points[k]->coords) out += "," + format_double(v);
    if (weights) {
      for (double w : points[k]->weights.values) out += "," + format_double(w);
    }
    out += "\n";
  }
  return out;
}

inline std::string numbered(const std::string& prefix, std::size_t k, std::size_t total) {
  const std::size_t width = std::to_string(total).size();
  std::string digits = std::to_string(k);
  return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline std::vector<LinearConstraintSpec> parse_constraints(const VertexMatrix& vm, const std::vector<std::string>& texts) {
  std::vector<LinearConstraintSpec> out;
  for (const auto& t : texts) {
    auto c = parse_constraint(t);
    validate_constraint(vm, c);
    out.push_back(std::move(c));
  }
  return out;
}

/// One weight vector per non-empty line; entries separated by commas or spaces.
inline std::vector<WeightVector> read_weights_file(const std::string& path, std::size_t m) {
  std::istringstream in(read_text_file(path));
  std::vector<WeightVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> w;
    std::string f;
    while (fields >> f) w.push_back(parse_double(f, path + ":" + std::to_string(line_no)));
    if (w.empty()) continue;
    if (w.size() != m) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(m) + " weights, got " +
                            std::to_string(w.size()));
    }
    WeightVector wv{std::move(w)};
    validate_weights(wv, m);
    out.push_back(std::move(wv));
  }
  if (out.empty()) throw ValidationError(path + ": no weight vectors");
  return out;
}

}  // namespace detail

/// Makes a running `serve` return as if it had received SIGINT.
inline void request_shutdown() { detail::shutdown_flag().store(true); }

struct DataOptions {
  std::string data;
  std::vector<std::string> constraints;
  std::string format = "csv";
  std::string out;
  bool no_weights = false;
};

inline void add_data_options(CLI::App* cmd, DataOptions& o, bool with_constraints = true) {
  cmd->add_option("--data", o.data, "Dataset directory (iterates.csv + metadata.json)")->required();
  if (with_constraints) cmd->add_option("-c,--constraint", o.constraints, "Linear constraint, e.g. 'z1.gas<=400'");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("-o,--out", o.out, "Output file (default stdout)");
  cmd->add_flag("--no-weights", o.no_weights, "Omit weight columns from CSV output");
}

inline int cmd_toycem(std::size_t zones, std::size_t hours, const std::string& instance_path, const cem::MgaRunConfig& cfg,
                      const std::string& out_dir, std::ostream& err) {
  const auto inst = instance_path.empty() ? cem::make_default_instance(zones, hours) : cem::load_instance(instance_path);
  const auto run = cem::run_mga(inst, cfg);
  cem::write_mga_dataset(out_dir, inst, run, cfg);
  err << "wrote " << run.vertices.num_vertices() << " iterates to " << out_dir << " (least cost "
      << format_double(run.least_cost) << ", " << run.simplex_iterations << " simplex iterations)\n";
  return kExitOk;
}

inline int cmd_explore(const DataOptions& o, const std::string& min_expr, const std::string& max_expr, std::ostream& out,
                       std::ostream& err) {
  if (min_expr.empty() == max_expr.empty()) throw ValidationError("give exactly one of --min or --max");
  const auto vm = load_dataset_dir(o.data);
  ObjectiveSpec obj{parse_expression(min_expr.empty() ? max_expr : min_expr),
                    min_expr.empty() ? lp::Sense::maximize : lp::Sense::minimize};
  const auto r = explore(vm, obj, detail::parse_constraints(vm, o.constraints));
  if (r.status == ExplorationStatus::infeasible) {
    err << "infeasible: constraint '" << r.infeasible_label << "' empties the hull\n";
    return kExitInfeasible;
  }
  if (o.format == "json") {
    detail::emit(o.out, json_io::exploration_json(vm, r).dump(2) + "\n", out);
  } else {
    detail::emit(o.out, detail::points_csv(vm, {"explore"}, {&*r.point}, !o.no_weights), out);
  }
  err << "objective " << format_double(r.objective_value) << (r.is_vertex ? " (vertex)" : "") << " in "
      << r.solve_millis << " ms\n";
  return kExitOk;
}

inline int cmd_pareto(const DataOptions& o, const std::string& objective, const std::string& sense,
                      const std::string& trace, std::size_t steps, std::ostream& out, std::ostream& err) {
  const auto vm = load_dataset_dir(o.data);
  ObjectiveSpec obj{parse_expression(objective), sense == "max" ? lp::Sense::maximize : lp::Sense::minimize};
  ParetoFrontier f;
  try {
    f = pareto_frontier(vm, obj, trace, steps, detail::parse_constraints(vm, o.constraints));
  } catch (const InfeasibleError& e) {
    err << "infeasible: constraint '" << e.label() << "' empties the hull\n";
    return kExitInfeasible;
  }
  if (o.format == "json") {
    detail::emit(o.out, json_io::frontier_json(vm, f).dump(2) + "\n", out);
  } else {
    std::vector<std::string> labels;
    std::vector<const InterpolatedPoint*> pts;
    for (std::size_t k = 0; k < f.points.size(); ++k) {
      labels.push_back(detail::numbered("pareto_", k + 1, f.points.size()));
      pts.push_back(&f.points[k].point);
    }
    detail::emit(o.out, detail::points_csv(vm, labels, pts, !o.no_weights), out);
  }
  err << f.points.size() << " frontier points in " << f.solve_millis << " ms\n";
  return kExitOk;
}

inline int cmd_budget(const DataOptions& o, double slack, const std::string& dataset_out, std::ostream& out,
                      std::ostream& err) {
  const auto vm = load_dataset_dir(o.data);
  const auto pts = budget_interpolate(vm, slack);
  std::vector<std::string> ids;
  std::vector<const InterpolatedPoint*> ptrs;
  for (std::size_t i = 0, k = 0; i < vm.num_vertices(); ++i) {
    if (i == vm.least_cost_index()) continue;
    ids.push_back(vm.vertex_ids()[i]);
    ptrs.push_back(&pts[k++]);
  }
  if (!dataset_out.empty()) {
    // Rescaled iterates plus the least-cost vertex form a loadable dataset at the new slack.
    std::vector<std::string> all_ids{vm.vertex_ids()[vm.least_cost_index()]};
    const auto lc = vm.row(vm.least_cost_index());
    std::vector<double> values(lc.begin(), lc.end());
    for (std::size_t k = 0; k < ptrs.size(); ++k) {
      all_ids.push_back(ids[k]);
      values.insert(values.end(), ptrs[k]->coords.begin(), ptrs[k]->coords.end());
    }
    std::optional<std::string> cost;
    if (vm.cost_index()) cost = vm.dim(*vm.cost_index()).name;
    const auto rescaled = VertexMatrix::create(vm.dims(), all_ids, values, 0, slack, cost);
    write_dataset_dir(rescaled, dataset_out);
    err << "wrote rescaled dataset to " << dataset_out << "\n";
  }
  if (o.format == "json") {
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t k = 0; k < ptrs.size(); ++k) {
      auto j = json_io::point_json(vm, *ptrs[k]);
      j["vertex_id"] = ids[k];
      points.push_back(std::move(j));
    }
    detail::emit(o.out, nlohmann::json{{"slack", slack}, {"points", points}}.dump(2) + "\n", out);
  } else {
    detail::emit(o.out, detail::points_csv(vm, ids, ptrs, !o.no_weights), out);
  }
  err << ptrs.size() << " rescaled iterates, weight " << format_double(slack / vm.budget_slack()) << "\n";
  return kExitOk;
}

inline int cmd_localmga(const DataOptions& o, std::size_t iterations, const std::string& method, std::uint64_t seed,
                        std::ostream& out, std::ostream& err) {
  const auto vm = load_dataset_dir(o.data);
  const auto r = local_mga(vm, detail::parse_constraints(vm, o.constraints), iterations, parse_mga_method(method), seed);
  if (r.infeasible_label) {
    err << "infeasible: constraint '" << *r.infeasible_label << "' empties the hull\n";
    return kExitInfeasible;
  }
  if (o.format == "json") {
    nlohmann::json results = nlohmann::json::array();
    for (std::size_t k = 0; k < r.results.size(); ++k) {
      auto j = json_io::exploration_json(vm, r.results[k]);
      j["objective"] = json_io::objective_json(r.objectives[k]);
      results.push_back(std::move(j));
    }
    detail::emit(o.out, nlohmann::json{{"results", results}}.dump(2) + "\n", out);
  } else {
    std::vector<std::string> labels;
    std::vector<const InterpolatedPoint*> pts;
    for (std::size_t k = 0; k < r.results.size(); ++k) {
      labels.push_back(detail::numbered("local_", k + 1, r.results.size()));
      pts.push_back(&*r.results[k].point);
    }
    detail::emit(o.out, detail::points_csv(vm, labels, pts, !o.no_weights), out);
  }
  double total_ms = 0.0;
  for (const auto& res : r.results) total_ms += res.solve_millis;
  err << r.results.size() << " local MGA solutions in " << total_ms << " ms\n";
  return kExitOk;
}

inline std::vector<InterpolatedPoint> interpolates_for(const VertexMatrix& vm, const std::string& weights_file,
                                                       std::size_t count, std::uint64_t seed, std::size_t support) {
  std::vector<InterpolatedPoint> pts;
  if (!weights_file.empty()) {
    for (const auto& w : detail::read_weights_file(weights_file, vm.num_vertices())) pts.push_back(interpolate(vm, w));
  } else {
    pts = random_interpolates(vm, count, seed, std::min(support, vm.num_vertices()));
  }
  return pts;
}

inline int cmd_interp(const DataOptions& o, const std::string& weights_file, std::size_t count, std::uint64_t seed,
                      std::size_t support, std::ostream& out, std::ostream& err) {
  const auto vm = load_dataset_dir(o.data);
  const auto pts = interpolates_for(vm, weights_file, count, seed, support);
  if (o.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back(json_io::point_json(vm, p));
    detail::emit(o.out, nlohmann::json{{"points", arr}}.dump(2) + "\n", out);
  } else {
    std::vector<std::string> labels;
    std::vector<const InterpolatedPoint*> ptrs;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      labels.push_back(detail::numbered("interp_", k + 1, pts.size()));
      ptrs.push_back(&pts[k]);
    }
    detail::emit(o.out, detail::points_csv(vm, labels, ptrs, !o.no_weights), out);
  }
  err << pts.size() << " interpolates\n";
  return kExitOk;
}

inline int cmd_accuracy(const DataOptions& o, const std::string& instance_path, const std::string& weights_file,
                        std::size_t count, std::uint64_t seed, std::size_t support, const std::string& summary_path,
                        std::ostream& out, std::ostream& err) {
  const auto vm = load_dataset_dir(o.data);
  const std::string inst_file =
      instance_path.empty() ? (std::filesystem::path(o.data) / cem::kInstanceFile).string() : instance_path;
  const auto inst = cem::load_instance(inst_file);
  const auto pts = interpolates_for(vm, weights_file, count, seed, support);
  const auto rep = cem::accuracy_report(inst, vm, pts);
  const auto summary = cem::summary_json(rep);
  if (o.format == "json") {
    detail::emit(o.out, nlohmann::json{{"summary", summary}, {"report_csv", cem::report_csv(rep)}}.dump(2) + "\n", out);
  } else {
    detail::emit(o.out, cem::report_csv(rep), out);
  }
  if (!summary_path.empty()) {
    write_text_file(summary_path, summary.dump(2) + "\n");
  } else {
    err << summary.dump(2) << "\n";
  }
  if (rep.infeasible_count > 0) err << rep.infeasible_count << " interpolates could not be dispatched\n";
  return kExitOk;
}

inline int cmd_serve(const std::string& host, int port, const std::string& data, const std::string& snapshot_path,
                     std::ostream& err) {
  service::Service svc;
  try {
    const auto ids = svc.load_data_dir(data);
    err << "loaded " << ids.size() << " dataset(s) from " << data << "\n";
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!snapshot_path.empty() && std::filesystem::exists(snapshot_path)) {
    const auto skipped = svc.restore(nlohmann::json::parse(read_text_file(snapshot_path)));
    err << "restored sessions from " << snapshot_path << (skipped ? " (some skipped: dataset missing)" : "") << "\n";
  }
  httplib::Server server;
  service::mount(server, svc);
  // The library default adds SO_REUSEPORT, which lets a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) {
    err << "error: cannot bind " << host << ":" << port << "\n";
    return kExitUsage;
  }
  detail::shutdown_flag().store(false);
  auto previous_int = std::signal(SIGINT, detail::on_signal);
  auto previous_term = std::signal(SIGTERM, detail::on_signal);
  std::atomic<bool> finished{false};
  std::thread watcher([&] {
    while (!detail::shutdown_flag().load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    // stop() is a no-op until the listen loop runs, so repeat until it has returned.
    while (!finished.load()) {
      server.stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  });
  err << "listening on http://" << host << ":" << bound << "\n";
  server.listen_after_bind();
  finished.store(true);
  detail::shutdown_flag().store(true);
  watcher.join();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  if (!snapshot_path.empty()) {
    write_text_file(snapshot_path, svc.snapshot().dump(2) + "\n");
    err << "wrote session snapshot to " << snapshot_path << "\n";
  }
  return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Explore near-optimal MGA iterate sets by convex combination and small LPs", "mgca"};
  app.require_subcommand(1);

  // toycem
  std::size_t zones = 3, hours = 24;
  std::string instance_path, out_dir;
  cem::MgaRunConfig cfg;
  std::string method = "random_vector";
  auto* toycem = app.add_subcommand("toycem", "Build the toy CEM, run MGA, write a dataset directory");
  toycem->add_option("--zones", zones, "Zones in the default instance")->check(CLI::Range(1, 64));
  toycem->add_option("--hours", hours, "Hours in the default instance")->check(CLI::Range(1, 8760));
  toycem->add_option("--instance", instance_path, "instance.json to use instead of the default")->check(CLI::ExistingFile);
  toycem->add_option("--mga", cfg.iterations, "MGA iterations (rows written = iterations + 1)");
  toycem->add_option("--slack", cfg.budget_slack, "Budget slack epsilon");
  toycem->add_option("--method", method, "MGA objective method")->check(CLI::IsMember({"random_vector", "random", "minmax"}));
  toycem->add_option("--seed", cfg.seed, "Random seed");
  toycem->add_option("-o,--out", out_dir, "Output directory")->required();

  // explore
  DataOptions ex;
  std::string min_expr, max_expr;
  auto* explore_cmd = app.add_subcommand("explore", "Optimize a linear objective over the hull");
  add_data_options(explore_cmd, ex);
  explore_cmd->add_option("--min", min_expr, "Expression to minimize");
  explore_cmd->add_option("--max", max_expr, "Expression to maximize");

  // pareto
  DataOptions pa;
  std::string objective, sense = "min", trace;
  std::size_t steps = 11;
  auto* pareto_cmd = app.add_subcommand("pareto", "Trace an epsilon-constraint frontier");
  add_data_options(pareto_cmd, pa);
  pareto_cmd->add_option("--objective", objective, "Objective expression")->required();
  pareto_cmd->add_option("--sense", sense, "Objective sense")->check(CLI::IsMember({"min", "max"}));
  pareto_cmd->add_option("--trace", trace, "Dimension traced on the epsilon grid")->required();
  pareto_cmd->add_option("--steps", steps, "Grid points (>= 2)");

  // budget
  DataOptions bu;
  double slack = 0.0;
  std::string dataset_out;
  auto* budget_cmd = app.add_subcommand("budget", "Re-interpolate iterates toward the least-cost vertex");
  add_data_options(budget_cmd, bu, false);
  budget_cmd->add_option("--slack", slack, "Target budget slack")->required();
  budget_cmd->add_option("--dataset-out", dataset_out, "Also write a loadable dataset directory");

  // localmga
  DataOptions lm;
  std::size_t iterations = 10;
  std::string lm_method = "random_vector";
  std::uint64_t lm_seed = 0;
  auto* localmga_cmd = app.add_subcommand("localmga", "Repeated exploration with generated objectives");
  add_data_options(localmga_cmd, lm);
  localmga_cmd->add_option("--iterations", iterations, "Number of solves");
  localmga_cmd->add_option("--method", lm_method, "Objective method")->check(CLI::IsMember({"random_vector", "random", "minmax"}));
  localmga_cmd->add_option("--seed", lm_seed, "Random seed");

  // interp
  DataOptions in;
  std::string weights_file;
  std::size_t count = 1, support = 4;
  std::uint64_t in_seed = 0;
  auto* interp_cmd = app.add_subcommand("interp", "Convex combinations of iterates");
  add_data_options(interp_cmd, in, false);
  interp_cmd->add_option("--weights-file", weights_file, "One weight vector per line")->check(CLI::ExistingFile);
  interp_cmd->add_option("--count", count, "Random interpolates to draw");
  interp_cmd->add_option("--seed", in_seed, "Random seed");
  interp_cmd->add_option("--support-size", support, "Vertices per random interpolate");

  // accuracy
  DataOptions ac;
  std::string ac_instance, ac_weights, summary_path;
  std::size_t ac_count = 50, ac_support = 4;
  std::uint64_t ac_seed = 0;
  auto* accuracy_cmd = app.add_subcommand("accuracy", "Dispatch interpolates and compare metric estimates");
  add_data_options(accuracy_cmd, ac, false);
  accuracy_cmd->add_option("--instance", ac_instance, "instance.json (default: <data>/instance.json)");
  accuracy_cmd->add_option("--weights-file", ac_weights, "One weight vector per line")->check(CLI::ExistingFile);
  accuracy_cmd->add_option("--n", ac_count, "Random interpolates to draw");
  accuracy_cmd->add_option("--seed", ac_seed, "Random seed");
  accuracy_cmd->add_option("--support-size", ac_support, "Vertices per random interpolate");
  accuracy_cmd->add_option("--summary", summary_path, "Write the summary JSON here (default stderr)");

  // serve
  std::string host = "127.0.0.1", serve_data, snapshot_path;
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP exploration service");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data", serve_data, "Directory of dataset directories")->required();
  serve_cmd->add_option("--snapshot", snapshot_path, "Session snapshot file, restored at start and written at shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*toycem) {
      cfg.method = parse_mga_method(method);
      return cmd_toycem(zones, hours, instance_path, cfg, out_dir, err);
    }
    if (*explore_cmd) return cmd_explore(ex, min_expr, max_expr, out, err);
    if (*pareto_cmd) return cmd_pareto(pa, objective, sense, trace, steps, out, err);
    if (*budget_cmd) return cmd_budget(bu, slack, dataset_out, out, err);
    if (*localmga_cmd) return cmd_localmga(lm, iterations, lm_method, lm_seed, out, err);
    if (*interp_cmd) return cmd_interp(in, weights_file, count, in_seed, support, out, err);
    if (*accuracy_cmd) {
      return cmd_accuracy(ac, ac_instance, ac_weights, ac_count, ac_seed, ac_support, summary_path, out, err);
    }
    if (*serve_cmd) return cmd_serve(host, port, serve_data, snapshot_path, err);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what();
    if (!e.label().empty()) err << " (" << e.label() << ")";
    err << "\n";
    return kExitInfeasible;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n" << e.caret() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mgca::cli
