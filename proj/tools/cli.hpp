#pragma once

#include "sirbal/sirbal.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sirbal::cli {

/// Process exit codes.
enum Exit : int {
  Ok = 0,
  BadInput = 1,
  Reducible = 2,
  NotConverged = 3,
  GenerateExhausted = 4,
  Internal = 5,
  Disagree = 6,
};

struct Report {
  std::string method;
  Vector p_bar;
  double beta = 0.0;
  double level = 0.0;
  std::size_t n0 = 0;
  std::vector<std::size_t> N0;
  Vector sir;
  Vector rho_B;
  std::map<std::string, double> residuals;

  bool operator==(const Report& o) const {
    return method == o.method && p_bar == o.p_bar && beta == o.beta && level == o.level &&
           n0 == o.n0 && N0 == o.N0 && sir == o.sir && rho_B == o.rho_B &&
           residuals == o.residuals;
  }
};

inline nlohmann::json report_to_json(const Report& r) {
  using json_io::from_vector;
  nlohmann::json j;
  j["method"] = r.method;
  j["p_bar"] = from_vector(r.p_bar);
  j["beta"] = r.beta;
  j["level"] = r.level;
  j["n0"] = r.n0;
  j["N0"] = r.N0;
  j["sir"] = from_vector(r.sir);
  j["rho_B"] = from_vector(r.rho_B);
  j["residuals"] = r.residuals;
  return j;
}

inline Report report_from_json(const nlohmann::json& j) {
  using namespace json_io;
  if (!j.is_object()) throw ParseError("report must be a JSON object");
  Report r;
  try {
    r.method = require(j, "method").get<std::string>();
    r.p_bar = to_vector(require(j, "p_bar"), "p_bar");
    r.beta = require(j, "beta").get<double>();
    r.level = require(j, "level").get<double>();
    r.n0 = require(j, "n0").get<std::size_t>();
    r.N0 = require(j, "N0").get<std::vector<std::size_t>>();
    r.sir = to_vector(require(j, "sir"), "sir");
    r.rho_B = to_vector(require(j, "rho_B"), "rho_B");
    r.residuals = require(j, "residuals").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

/// Solver knobs shared by the subcommands.
struct Flags {
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> utility;
  std::string method = "eigen";
  /// Saddle method only: write the iteration trace here as CSV.
  std::string trace_path;
};

inline UtilitySpec pick_utility(const Flags& f, const Scenario& s) {
  return f.utility ? parse_utility(*f.utility) : s.utility;
}

inline SolverConfig solver_config(const Flags& f) {
  SolverConfig cfg;
  if (f.tol) cfg.perron.tol = *f.tol;
  if (f.max_iter) cfg.perron.max_iter = *f.max_iter;
  return cfg;
}

inline AscentConfig ascent_config(const Flags& f) {
  AscentConfig cfg;
  if (f.tol) cfg.grad_tol = *f.tol;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
  return cfg;
}

inline SaddleConfig saddle_config(const Flags& f) {
  SaddleConfig cfg;
  cfg.record_trace = !f.trace_path.empty();
  if (f.tol) cfg.primal_tol = *f.tol;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
  return cfg;
}

inline oracle::BisectOptions bisect_options(const Flags& f) {
  oracle::BisectOptions opt;
  if (f.tol) opt.tol_t = *f.tol;
  return opt;
}

/// Fills the fields every method shares from a power vector.
inline Report describe(const std::string& method, const Scenario& s, const Vector& p,
                       const Vector& rho_b, double tol_active) {
  Report r;
  r.method = method;
  r.p_bar = p;
  r.sir = sir(s.model, p);
  const Vector inverse = s.model.targets().cwiseQuotient(r.sir);
  r.beta = inverse.maxCoeff();
  r.level = 1.0 / r.beta;
  const Vector levels = constraint_levels(s.poly, p);
  Eigen::Index top = 0;
  levels.maxCoeff(&top);
  r.n0 = static_cast<std::size_t>(top);
  for (Eigen::Index n = 0; n < levels.size(); ++n)
    if (levels[n] >= 1.0 - tol_active) r.N0.push_back(static_cast<std::size_t>(n));
  r.rho_B = rho_b;
  r.residuals["balance_spread"] = (inverse.array() - r.beta).abs().maxCoeff() / r.beta;
  r.residuals["constraint_level"] = levels.maxCoeff();
  return r;
}

inline Report eigen_report(const MaxMinSolution& sol) {
  Report r;
  r.method = "eigen";
  r.p_bar = sol.p_bar;
  r.beta = sol.beta;
  r.level = sol.level;
  r.n0 = sol.n0;
  r.N0 = sol.active_set;
  r.sir = sol.sir;
  r.rho_B = sol.rho_B;
  const auto& d = sol.diagnostics;
  r.residuals["eigen"] = d.eigen_residual;
  r.residuals["a_route"] = d.a_route_residual;
  r.residuals["balance_spread"] = d.balance_spread;
  r.residuals["constraint_level"] = d.max_constraint_level;
  r.residuals["active_set_consistent"] = d.active_set_consistent ? 1.0 : 0.0;
  return r;
}

/// Runs one method. Throws the library errors unchanged.
inline Report solve_with(const Scenario& s, const Flags& f) {
  pick_utility(f, s);
  const SolverConfig cfg = solver_config(f);
  const ExtendedMatrices ext = build_extended(s.model, s.poly, cfg);
  if (f.method == "eigen") return eigen_report(solve_maxmin(s.model, s.poly, cfg));
  if (f.method == "bisect") {
    const auto b = oracle::bisect_maxmin(s.model, s.poly, bisect_options(f));
    Report r = describe("bisect", s, b.p, ext.rho_B, cfg.tol_active);
    r.residuals["bisect_steps"] = static_cast<double>(b.steps);
    return r;
  }
  if (f.method == "utility") {
    const auto w = maxmin_weights(s.model, s.poly, cfg);
    const auto a = maximize_F(s.model, s.poly, pick_utility(f, s), w, ascent_config(f));
    Report r = describe("utility", s, a.p, ext.rho_B, cfg.tol_active);
    r.residuals["stationarity"] = a.stationarity;
    r.residuals["iterations"] = static_cast<double>(a.iterations);
    return r;
  }
  if (f.method == "saddle") {
    const auto sol = solve_maxmin(s.model, s.poly, cfg);
    const auto res =
        saddle_solve(s.model, s.poly, pick_utility(f, s), saddle_config(f), &sol.p_bar);
    if (!f.trace_path.empty()) {
      std::ofstream file(f.trace_path, std::ios::binary);
      if (!file) throw ParseError("cannot write '" + f.trace_path + "'");
      write_trace_csv(res.trace, file);
    }
    Report r = describe("saddle", s, res.p, ext.rho_B, cfg.tol_active);
    r.residuals["primal_stationarity"] = res.primal_stationarity;
    r.residuals["dual_stationarity"] = res.dual_stationarity;
    r.residuals["iterations"] = static_cast<double>(res.iterations);
    return r;
  }
  throw DomainError("unknown method '" + f.method + "' (expected eigen, bisect, utility or saddle)");
}

inline std::string reducible_message(const NotIrreducible& e) {
  std::string names;
  for (auto n : e.indices()) names += (names.empty() ? "B[" : ", B[") + std::to_string(n) + "]";
  return std::string(e.what()) + " (reducible: " + names + ")";
}

/// Maps a library error to its exit code and prints the diagnostic.
inline int report_error(const std::exception& ex, const std::string& source, std::ostream& err) {
  if (const auto* e = dynamic_cast<const ParseError*>(&ex)) {
    err << "error: " << source;
    if (e->line() > 0) err << ":" << e->line() << ":" << e->column();
    err << ": " << e->what() << "\n";
    return BadInput;
  }
  if (const auto* e = dynamic_cast<const NotIrreducible*>(&ex)) {
    err << "error: " << reducible_message(*e) << "\n";
    return Reducible;
  }
  if (dynamic_cast<const NoConvergence*>(&ex)) {
    err << "error: " << ex.what() << "\n";
    return NotConverged;
  }
  if (dynamic_cast<const GenerationFailed*>(&ex)) {
    err << "error: " << ex.what() << "\n";
    return GenerateExhausted;
  }
  if (dynamic_cast<const DimensionError*>(&ex) || dynamic_cast<const InvalidModel*>(&ex) ||
      dynamic_cast<const InvalidChannel*>(&ex) || dynamic_cast<const DomainError*>(&ex) ||
      dynamic_cast<const UnsupportedDimension*>(&ex)) {
    err << "error: " << source << ": " << ex.what() << "\n";
    return BadInput;
  }
  err << "internal error: " << ex.what() << "\n";
  return Internal;
}

inline int cmd_solve(const std::string& path, const Flags& f, std::ostream& out,
                     std::ostream& err) {
  try {
    const Scenario s = load_scenario(path);
    out << report_to_json(solve_with(s, f)).dump(2) << "\n";
    return Ok;
  } catch (const std::exception& e) {
    return report_error(e, path, err);
  }
}

struct CrosscheckFlags {
  Flags solver;
  double agree_tol = 1e-3;
};

inline int cmd_crosscheck(const std::string& path, const CrosscheckFlags& cf, std::ostream& out,
                          std::ostream& err) {
  std::optional<Scenario> loaded;
  try {
    loaded = load_scenario(path);
  } catch (const std::exception& e) {
    return report_error(e, path, err);
  }
  const Scenario& s = *loaded;

  nlohmann::json j;
  j["routes"] = nlohmann::json::object();
  std::map<std::string, Vector> powers;
  int code = Ok;
  for (const std::string method : {"eigen", "bisect", "utility", "saddle"}) {
    Flags f = cf.solver;
    f.method = method;
    try {
      const Report r = solve_with(s, f);
      j["routes"][method] = report_to_json(r);
      powers[method] = r.p_bar;
    } catch (const NoConvergence& e) {
      j["routes"][method] = {{"error", e.what()},
                             {"last_iterate", json_io::from_vector(e.last_iterate())},
                             {"iterations", e.iterations()}};
      code = NotConverged;
    } catch (const std::exception& e) {
      return report_error(e, path, err);
    }
  }

  double scale = 1.0;
  if (powers.count("eigen")) scale = powers["eigen"].cwiseAbs().maxCoeff();
  j["deviations"] = nlohmann::json::object();
  bool agree = true;
  for (auto a = powers.begin(); a != powers.end(); ++a)
    for (auto b = std::next(a); b != powers.end(); ++b) {
      const double dev = (a->second - b->second).cwiseAbs().maxCoeff() / scale;
      j["deviations"][a->first + "-" + b->first] = dev;
      agree = agree && dev <= cf.agree_tol;
    }
  j["agree_tol"] = cf.agree_tol;
  j["agree"] = agree && code == Ok;
  out << j.dump(2) << "\n";
  if (code != Ok) {
    err << "error: crosscheck: a route did not converge\n";
    return code;
  }
  if (!agree) {
    err << "error: crosscheck: routes disagree beyond " << format_double(cf.agree_tol) << "\n";
    return Disagree;
  }
  return Ok;
}

struct GenerateFlags {
  GenerateOptions options;
  std::string kind = "individual";
  std::string output;
};

inline int cmd_generate(GenerateFlags g, std::ostream& out, std::ostream& err) {
  try {
    g.options.kind = parse_constraint_kind(g.kind);
    const std::string text = scenario_to_json(generate_scenario(g.options)).dump(2) + "\n";
    if (g.output.empty()) {
      out << text;
    } else {
      std::ofstream file(g.output, std::ios::binary);
      if (!file) throw ParseError("cannot write '" + g.output + "'");
      file << text;
    }
    return Ok;
  } catch (const std::exception& e) {
    return report_error(e, "generate", err);
  }
}

struct SweepFlags {
  Flags solver;
  std::size_t points = 91;
  std::vector<double> thetas;
};

/// Angles strictly inside (0, pi/2), evenly spaced.
inline std::vector<double> sweep_angles(const SweepFlags& sf) {
  if (!sf.thetas.empty()) return sf.thetas;
  std::vector<double> out;
  const double half_pi = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < sf.points; ++i)
    out.push_back(half_pi * static_cast<double>(i + 1) / static_cast<double>(sf.points + 1));
  return out;
}

inline int cmd_sweep(const std::string& path, const SweepFlags& sf, std::ostream& out,
                     std::ostream& err) {
  try {
    const Scenario s = load_scenario(path);
    if (s.model.links() != 2) throw UnsupportedDimension("sweep supports K = 2 only");
    const UtilitySpec u = pick_utility(sf.solver, s);
    const SolverConfig cfg = solver_config(sf.solver);
    std::ostringstream csv;
    csv << "theta,sir1,sir2,q1,q2,active_set\n";
    for (double theta : sweep_angles(sf)) {
      if (!(theta > 0.0 && theta < std::numbers::pi / 2.0))
        throw DomainError("sweep angles must lie strictly inside (0, pi/2)");
      Vector direction(2);
      direction << std::cos(theta), std::sin(theta);
      const auto sol = solve_maxmin(s.model.with_targets(direction), s.poly, cfg);
      const QosPoint q = qos_of_power(s.model, u, sol.p_bar);
      std::string active;
      for (auto n : sol.active_set) active += (active.empty() ? "" : ";") + std::to_string(n);
      csv << format_double(theta) << ',' << format_double(sol.sir[0]) << ','
          << format_double(sol.sir[1]) << ',' << format_double(q.q[0]) << ','
          << format_double(q.q[1]) << ',' << active << '\n';
    }
    out << csv.str();
    return Ok;
  } catch (const std::exception& e) {
    return report_error(e, path, err);
  }
}

inline void add_solver_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tol", f.tol, "Convergence tolerance of the chosen method");
  cmd->add_option("--max-iter", f.max_iter, "Iteration budget of the chosen method");
  cmd->add_option("--utility", f.utility, "log or negpow:<n> (overrides the scenario)");
}

/// Entry point shared by the binary and the tests. args[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Max-min SIR balancing under polytope power constraints"};
  app.require_subcommand(1);

  std::string scenario;
  Flags solve_flags;
  auto* solve = app.add_subcommand("solve", "Solve a scenario and print a JSON report");
  solve->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_solver_flags(solve, solve_flags);
  solve->add_option("--method", solve_flags.method, "eigen, bisect, utility or saddle")
      ->check(CLI::IsMember({"eigen", "bisect", "utility", "saddle"}));
  solve->add_option("--trace", solve_flags.trace_path, "Saddle method: trace CSV output file");

  CrosscheckFlags cross_flags;
  auto* cross = app.add_subcommand("crosscheck", "Run every route and compare the powers");
  cross->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_solver_flags(cross, cross_flags.solver);
  cross->add_option("--agree-tol", cross_flags.agree_tol,
                    "Largest allowed relative max-norm deviation between routes");

  GenerateFlags gen_flags;
  auto* gen = app.add_subcommand("generate", "Write a random irreducible scenario");
  gen->add_option("--links,-K", gen_flags.options.links, "Number of links")->required();
  gen->add_option("--constraints,-N", gen_flags.options.constraints, "Number of constraints")
      ->required();
  gen->add_option("--seed", gen_flags.options.seed, "Random seed");
  gen->add_option("--kind", gen_flags.kind, "individual, sum or mixed");
  gen->add_option("--density", gen_flags.options.density,
                  "Probability that an off-diagonal gain is nonzero")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--random-targets", gen_flags.options.random_targets,
                "Draw targets from U(0.5, 2) instead of all ones");
  gen->add_option("--output,-o", gen_flags.output, "Output file (default: stdout)");

  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Trace the boundary of the SIR region (K = 2)");
  sweep->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_solver_flags(sweep, sweep_flags.solver);
  sweep->add_option("--points", sweep_flags.points, "Number of evenly spaced directions");
  sweep->add_option("--theta", sweep_flags.thetas, "Explicit direction angles in radians");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return BadInput;
  }

  try {
    if (*solve) return cmd_solve(scenario, solve_flags, out, err);
    if (*cross) return cmd_crosscheck(scenario, cross_flags, out, err);
    if (*gen) return cmd_generate(gen_flags, out, err);
    if (*sweep) return cmd_sweep(scenario, sweep_flags, out, err);
  } catch (const std::exception& e) {
    return report_error(e, scenario, err);
  }
  return Internal;
}

}  // namespace sirbal::cli
