#pragma once

// Batch front-end: JSON configuration, experiment dispatch, JSON reports and
// CSV field dumps.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spgs/checks.hpp"
#include "spgs/critical.hpp"
#include "spgs/energies.hpp"
#include "spgs/errors.hpp"
#include "spgs/manifolds.hpp"
#include "spgs/radial_core.hpp"
#include "spgs/solver.hpp"

namespace spgs::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kSuccess = 0, kFailure = 1, kInconclusive = 2, kStagnation = 3, kInvalid = 4 };

/// Malformed JSON; carries the byte offset reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position) : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Every violation found in a configuration, not only the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& x : v) s += "\n  " + x;
    return s;
  }
  std::vector<std::string> violations_;
};

enum class Experiment { Solve, CertifyCritical, Nonexistence, Bubbles, Continuation, Check };

inline const std::map<std::string, Experiment>& experiment_names() {
  static const std::map<std::string, Experiment> m{{"solve", Experiment::Solve},
                                                   {"certify-critical", Experiment::CertifyCritical},
                                                   {"nonexistence", Experiment::Nonexistence},
                                                   {"bubbles", Experiment::Bubbles},
                                                   {"continuation", Experiment::Continuation},
                                                   {"check", Experiment::Check}};
  return m;
}

inline std::string to_string(Experiment e) {
  for (const auto& [k, v] : experiment_names())
    if (v == e) return k;
  return "?";
}

struct GridSpec {
  double R = 20.0;
  std::size_t N = 2000;
  RadialGrid build() const { return make_grid(R, N); }
};

/// constant: V = value. table: V at the N + 1 nodes of the solve grid.
/// gaussian_well: V = v_infinity - depth exp(-(r / width)^2).
struct PotentialSpec {
  std::string kind = "constant";
  double value = 1.0;
  std::vector<double> values;
  double v_infinity = 1.0;
  double depth = 0.5;
  double width = 1.0;

  Potential build(const RadialGrid& g) const {
    if (kind == "constant") return Potential::constant(value);
    if (kind == "gaussian_well") {
      auto t = RadialField::sample(g, [&](double r) { return v_infinity - depth * std::exp(-std::pow(r / width, 2)); });
      return Potential::radial(std::move(t), v_infinity);
    }
    if (values.size() != g.size()) throw GridMismatch("potential table does not match the grid");
    return Potential::radial(RadialField(g, values), v_infinity);
  }

  /// V = v_infinity everywhere: the comparison level c_infinity.
  Potential at_infinity() const { return Potential::constant(kind == "constant" ? value : v_infinity); }
};

struct RunConfig {
  Experiment experiment = Experiment::Solve;
  GridSpec grid;
  std::string family = "subcritical";
  double exponent = 3.0;
  PotentialSpec potential;
  SolveOptions solver;
  std::size_t probes = 100;
  struct {
    std::vector<double> epsilons{1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6};
    double r_cut = 1.0;
    GridSpec grid{2.0, 50000};
    GridSpec s_grid{200.0, 20000};
  } critical;
  struct {
    std::vector<double> epsilons{1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1};
    std::vector<double> s{2.0, 3.0, 4.0};
    double r_cut = 1.6;
    GridSpec grid{3.2, 6400};
    GridSpec s_grid{200.0, 20000};
  } bubbles;
  struct {
    std::vector<double> deltas{0.1, 0.01};
  } continuation;
  struct {
    GridSpec grid{5.0, 50000};
    std::size_t max_iterations = 300;
    std::size_t window = 100;
  } nonexistence;

  Family family_value() const {
    if (family == "critical_perturbed") return Family::critical_perturbed(exponent);
    if (family == "critical_pure") return Family::critical_pure();
    return Family::subcritical(exponent);
  }
  ProblemSpec problem() const {
    const auto g = grid.build();
    return ProblemSpec(family_value(), potential.build(g), g);
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Reader {
 public:
  std::vector<std::string> errors;

  // Records keys of `obj` that are not in `allowed`.
  void keys(const nlohmann::json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      errors.push_back(path + ": expected an object");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) errors.push_back(path + (path.empty() ? "" : ".") + k + ": unknown key \"" + k + "\"");
  }

  template <class T>
  void get(const nlohmann::json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const auto& v = obj.at(key);
    const std::string where = path + (path.empty() ? "" : ".") + key;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw std::invalid_argument("");
        out = v.get<T>();
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("");
        out = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("");
        out = v.get<std::string>();
      } else {
        if (!v.is_array()) throw std::invalid_argument("");
        out.clear();
        for (const auto& x : v) {
          if (!x.is_number()) throw std::invalid_argument("");
          out.push_back(x.get<double>());
        }
      }
    } catch (const std::exception&) {
      errors.push_back(where + ": wrong type");
    }
  }

  void grid(const nlohmann::json& obj, const char* key, const std::string& path, GridSpec& g) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const std::string where = path + (path.empty() ? "" : ".") + key;
    keys(obj.at(key), where, {"R", "N"});
    get(obj.at(key), "R", where, g.R);
    get(obj.at(key), "N", where, g.N);
    if (!(g.R > 0.0) || !std::isfinite(g.R)) errors.push_back(where + ".R: radius must be positive");
    if (g.N < 16) errors.push_back(where + ".N: at least 16 intervals required");
  }
};

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  return obj.is_object() && obj.contains(key) ? obj.at(key) : empty;
}

}  // namespace detail

/// Parses and fully validates a configuration document.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
  RunConfig c;
  detail::Reader rd;
  rd.keys(doc, "", {"experiment", "grid", "problem", "solver", "critical", "bubbles", "continuation", "nonexistence"});

  if (doc.is_object() && doc.contains("experiment")) {
    std::string name;
    rd.get(doc, "experiment", "", name);
    const auto it = experiment_names().find(name);
    if (it == experiment_names().end()) rd.errors.push_back("experiment: unknown experiment \"" + name + "\"");
    else c.experiment = it->second;
  }
  rd.grid(doc, "grid", "", c.grid);

  const auto& prob = detail::member(doc, "problem");
  rd.keys(prob, "problem", {"family", "p", "q", "potential"});
  rd.get(prob, "family", "problem", c.family);
  if (c.family == "subcritical") {
    rd.get(prob, "p", "problem", c.exponent);
    if (prob.contains("q")) rd.errors.push_back("problem.q: not used by the subcritical family (use p)");
  } else if (c.family == "critical_perturbed") {
    c.exponent = 4.0;
    rd.get(prob, "q", "problem", c.exponent);
    if (prob.contains("p")) rd.errors.push_back("problem.p: not used by the critical_perturbed family (use q)");
  } else if (c.family == "critical_pure") {
    c.exponent = 0.0;
    if (prob.contains("p") || prob.contains("q")) rd.errors.push_back("problem: critical_pure takes no exponent");
  } else {
    rd.errors.push_back("problem.family: unknown family \"" + c.family + "\"");
  }
  if (auto v = c.family_value().violation(); v && c.family != "critical_pure") rd.errors.push_back(*v);

  const auto& pot = detail::member(prob, "potential");
  rd.keys(pot, "problem.potential", {"kind", "value", "values", "v_infinity", "depth", "width"});
  auto& P = c.potential;
  rd.get(pot, "kind", "problem.potential", P.kind);
  rd.get(pot, "value", "problem.potential", P.value);
  rd.get(pot, "values", "problem.potential", P.values);
  rd.get(pot, "v_infinity", "problem.potential", P.v_infinity);
  rd.get(pot, "depth", "problem.potential", P.depth);
  rd.get(pot, "width", "problem.potential", P.width);
  if (P.kind == "constant") {
    if (!(P.value > 0.0) || !std::isfinite(P.value))
      rd.errors.push_back("problem.potential.value: (V2) lower bound violated, constant V must be positive");
  } else if (P.kind == "table") {
    if (P.values.size() != c.grid.N + 1)
      rd.errors.push_back("problem.potential.values: table needs N + 1 = " + std::to_string(c.grid.N + 1) +
                          " entries, got " + std::to_string(P.values.size()));
    bool strict = false;
    for (std::size_t i = 0; i < P.values.size(); ++i) {
      const double x = P.values[i];
      if (!(x > 0.0) || !std::isfinite(x))
        rd.errors.push_back("problem.potential.values[" + std::to_string(i) + "]: (V2) lower bound violated, V must be positive");
      if (x > P.v_infinity)
        rd.errors.push_back("problem.potential.values[" + std::to_string(i) + "]: (V3) violated, V exceeds v_infinity");
      if (x < P.v_infinity) strict = true;
    }
    if (!strict) rd.errors.push_back("problem.potential.values: (V3) violated, V < v_infinity must hold somewhere");
  } else if (P.kind == "gaussian_well") {
    if (!(P.depth > 0.0 && P.depth < P.v_infinity))
      rd.errors.push_back("problem.potential.depth: (V2) lower bound violated, need 0 < depth < v_infinity");
    if (!(P.width > 0.0)) rd.errors.push_back("problem.potential.width: must be positive");
  } else {
    rd.errors.push_back("problem.potential.kind: unknown kind \"" + P.kind + "\"");
  }
  if (P.kind != "constant" && !(P.v_infinity > 0.0))
    rd.errors.push_back("problem.potential.v_infinity: (V2) lower bound violated, must be positive");
  if (c.family == "subcritical" && P.kind != "constant" && !(c.exponent > 3.0))
    rd.errors.push_back("problem.p: a non-constant potential uses the Nehari manifold, which needs p in (3, 5)");

  const auto& sol = detail::member(doc, "solver");
  rd.keys(sol, "solver",
          {"max_iterations", "tol_gradient", "tol_manifold", "initial_step", "backtrack_factor", "seed",
           "allow_critical_pure", "stagnation_window", "barzilai_borwein", "probes"});
  auto& S = c.solver;
  rd.get(sol, "max_iterations", "solver", S.max_iterations);
  rd.get(sol, "tol_gradient", "solver", S.tol_gradient);
  rd.get(sol, "tol_manifold", "solver", S.tol_manifold);
  rd.get(sol, "initial_step", "solver", S.initial_step);
  rd.get(sol, "backtrack_factor", "solver", S.backtrack_factor);
  rd.get(sol, "seed", "solver", S.seed);
  rd.get(sol, "allow_critical_pure", "solver", S.allow_critical_pure);
  rd.get(sol, "stagnation_window", "solver", S.stagnation_window);
  rd.get(sol, "barzilai_borwein", "solver", S.barzilai_borwein);
  rd.get(sol, "probes", "solver", c.probes);
  for (auto& v : S.violations()) rd.errors.push_back(std::move(v));

  const auto& cr = detail::member(doc, "critical");
  rd.keys(cr, "critical", {"epsilons", "r_cut", "grid", "S_grid"});
  rd.get(cr, "epsilons", "critical", c.critical.epsilons);
  rd.get(cr, "r_cut", "critical", c.critical.r_cut);
  rd.grid(cr, "grid", "critical", c.critical.grid);
  rd.grid(cr, "S_grid", "critical", c.critical.s_grid);
  if (c.critical.epsilons.empty()) rd.errors.push_back("critical.epsilons: at least one value required");
  for (double e : c.critical.epsilons)
    if (!(e > 0.0)) rd.errors.push_back("critical.epsilons: values must be positive");
  if (!(c.critical.r_cut > 0.0 && 2.0 * c.critical.r_cut <= c.critical.grid.R))
    rd.errors.push_back("critical.r_cut: need 0 < 2 r_cut <= critical.grid.R");

  const auto& bb = detail::member(doc, "bubbles");
  rd.keys(bb, "bubbles", {"epsilons", "s", "r_cut", "grid", "S_grid"});
  rd.get(bb, "epsilons", "bubbles", c.bubbles.epsilons);
  rd.get(bb, "s", "bubbles", c.bubbles.s);
  rd.get(bb, "r_cut", "bubbles", c.bubbles.r_cut);
  rd.grid(bb, "grid", "bubbles", c.bubbles.grid);
  rd.grid(bb, "S_grid", "bubbles", c.bubbles.s_grid);
  for (double e : c.bubbles.epsilons)
    if (!(e > 0.0)) rd.errors.push_back("bubbles.epsilons: values must be positive");
  for (double s : c.bubbles.s)
    if (!(s >= 2.0 && s < 6.0)) rd.errors.push_back("bubbles.s: exponents must lie in [2, 6)");
  if (!(c.bubbles.r_cut > 0.0 && 2.0 * c.bubbles.r_cut <= c.bubbles.grid.R))
    rd.errors.push_back("bubbles.r_cut: need 0 < 2 r_cut <= bubbles.grid.R");

  const auto& co = detail::member(doc, "continuation");
  rd.keys(co, "continuation", {"deltas"});
  rd.get(co, "deltas", "continuation", c.continuation.deltas);

  const auto& ne = detail::member(doc, "nonexistence");
  rd.keys(ne, "nonexistence", {"grid", "max_iterations", "window"});
  rd.grid(ne, "grid", "nonexistence", c.nonexistence.grid);
  rd.get(ne, "max_iterations", "nonexistence", c.nonexistence.max_iterations);
  rd.get(ne, "window", "nonexistence", c.nonexistence.window);
  if (c.nonexistence.window < 2 || c.nonexistence.window > c.nonexistence.max_iterations)
    rd.errors.push_back("nonexistence.window: need 2 <= window <= max_iterations");

  if (rd.errors.empty()) {
    // shifted potentials must stay admissible
    const double lowest = P.kind == "constant"        ? P.value
                          : P.kind == "gaussian_well" ? P.v_infinity - P.depth
                          : P.values.empty()          ? 0.0
                                                      : *std::min_element(P.values.begin(), P.values.end());
    for (double d : c.continuation.deltas)
      if (!(lowest + d > 0.0)) rd.errors.push_back("continuation.deltas: (V2) lower bound violated by V + delta");
  }
  if (!rd.errors.empty()) throw ConfigError(rd.errors);
  return c;
}

inline Json grid_json(const GridSpec& g) { return Json{{"R", g.R}, {"N", g.N}}; }

/// Normalized configuration; parse_config(to_json(c)) reproduces c.
inline Json to_json(const RunConfig& c) {
  Json pot{{"kind", c.potential.kind}};
  if (c.potential.kind == "constant") {
    pot["value"] = c.potential.value;
  } else {
    if (c.potential.kind == "table") pot["values"] = c.potential.values;
    else pot["depth"] = c.potential.depth, pot["width"] = c.potential.width;
    pot["v_infinity"] = c.potential.v_infinity;
  }
  Json prob{{"family", c.family}};
  if (c.family == "subcritical") prob["p"] = c.exponent;
  if (c.family == "critical_perturbed") prob["q"] = c.exponent;
  prob["potential"] = pot;
  const auto& S = c.solver;
  return Json{{"experiment", to_string(c.experiment)},
              {"grid", grid_json(c.grid)},
              {"problem", prob},
              {"solver",
               {{"max_iterations", S.max_iterations},
                {"tol_gradient", S.tol_gradient},
                {"tol_manifold", S.tol_manifold},
                {"initial_step", S.initial_step},
                {"backtrack_factor", S.backtrack_factor},
                {"seed", S.seed},
                {"allow_critical_pure", S.allow_critical_pure},
                {"stagnation_window", S.stagnation_window},
                {"barzilai_borwein", S.barzilai_borwein},
                {"probes", c.probes}}},
              {"critical",
               {{"epsilons", c.critical.epsilons},
                {"r_cut", c.critical.r_cut},
                {"grid", grid_json(c.critical.grid)},
                {"S_grid", grid_json(c.critical.s_grid)}}},
              {"bubbles",
               {{"epsilons", c.bubbles.epsilons},
                {"s", c.bubbles.s},
                {"r_cut", c.bubbles.r_cut},
                {"grid", grid_json(c.bubbles.grid)},
                {"S_grid", grid_json(c.bubbles.s_grid)}}},
              {"continuation", {{"deltas", c.continuation.deltas}}},
              {"nonexistence",
               {{"grid", grid_json(c.nonexistence.grid)},
                {"max_iterations", c.nonexistence.max_iterations},
                {"window", c.nonexistence.window}}}};
}

// ---------------------------------------------------------------------------
// Experiments

struct Outcome {
  int exit_code = kSuccess;
  Json result;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
};

namespace detail {

inline std::string csv_of(const RadialField& u) {
  std::ostringstream os;
  write_csv(os, u);
  return os.str();
}

inline const char* manifold_name(Manifold m) {
  switch (m) {
    case Manifold::M: return "M";
    case Manifold::N: return "N";
    case Manifold::NStar: return "N*";
  }
  return "?";
}

inline Json panel_json(const Residuals& r) {
  return Json{{"manifold", r.manifold},
              {"pohozaev", r.pohozaev},
              {"gradient", r.gradient},
              {"gradient_full", r.gradient_full}};
}

inline Json report_json(const SolveReport& rep) {
  return Json{{"level", rep.level},
              {"label", rep.label},
              {"manifold", manifold_name(rep.manifold)},
              {"converged", rep.converged},
              {"iterations", rep.iterations},
              {"residuals", panel_json(rep.residuals)},
              {"fields", {{"u_star", "u_star.csv"}, {"phi_star", "phi_star.csv"}}}};
}

inline Json certificate_json(const NonexistenceCertificate& c) {
  return Json{{"value", c.value}, {"lower_bound", c.lower_bound}, {"v5_holds", c.v5_holds}, {"certifies", c.certifies()}};
}

inline bool shrinking(const std::vector<IterationRecord>& h, std::size_t window) {
  if (h.size() < window + 1) return false;
  for (std::size_t i = h.size() - window; i < h.size(); ++i)
    if (!(h[i].mass_radius < h[i - 1].mass_radius)) return false;
  return true;
}

}  // namespace detail

inline Outcome run_solve(const RunConfig& c, unsigned threads) {
  const auto spec = c.problem();
  auto rep = solve_ground_state(spec, c.solver);
  Outcome out;
  out.result = detail::report_json(rep);
  if (spec.family().kind != FamilyKind::CriticalPure) {
    const auto fm = fiber_max(rep.u_star, spec);
    out.result["fiber_max"] = {{"level", fm.level}, {"scale", fm.scale}, {"gap", std::abs(fm.level - rep.level)}};
    rep.probe_bounds = probe_upper_bounds(rep, spec, c.probes, c.solver.seed, threads);
    const double lowest = rep.probe_bounds.empty()
                              ? rep.level
                              : *std::min_element(rep.probe_bounds.begin(), rep.probe_bounds.end());
    out.result["probes"] = {{"count", rep.probe_bounds.size()},
                            {"min_level", lowest},
                            {"all_above_level", lowest >= rep.level - 1e-8 * (1.0 + std::abs(rep.level))},
                            {"levels", rep.probe_bounds}};
    const double half = spec.grid().radius() / 2.0;
    out.result["concentration"] = {{"fraction_at_half_R", concentration_profile(rep.u_star, spec, {half})[0]},
                                   {"radius_90", mass_radius(rep.u_star, spec)}};
    if (spec.potential().is_constant()) out.result["J"] = eval_J(rep.u_star, spec);
  } else {
    out.result["certificate"] = detail::certificate_json(*rep.certificate);
  }
  if (!rep.converged && spec.family().kind != FamilyKind::CriticalPure) out.exit_code = kStagnation;
  out.csv = {{"u_star.csv", detail::csv_of(rep.u_star)}, {"phi_star.csv", detail::csv_of(rep.phi_star)}};
  return out;
}

inline Outcome run_certify(const RunConfig& c) {
  if (c.family != "critical_perturbed")
    throw ConfigError({"problem.family: certify-critical needs the critical_perturbed family"});
  const auto S = estimate_S(c.critical.s_grid.build());
  const auto cg = c.critical.grid.build();
  const auto cert =
      critical_level_certificate(c.exponent, c.potential.build(cg), c.critical.epsilons, c.critical.r_cut, cg, S.S);
  Outcome out;
  Json per = Json::array();
  for (const auto& [e, lvl] : cert.per_epsilon) per.push_back({{"epsilon", e}, {"bound", lvl}});
  out.result["certificate"] = {{"S_estimate", S.S},
                               {"S_epsilon", S.epsilon},
                               {"threshold", cert.threshold},
                               {"best_bound", cert.best_bound},
                               {"best_epsilon", cert.best_epsilon},
                               {"margin", cert.margin},
                               {"safety", cert.safety},
                               {"verdict", to_string(cert.verdict)},
                               {"per_epsilon", per}};
  const auto spec = c.problem();
  const auto rep = solve_ground_state(spec, c.solver);
  out.result["solve"] = detail::report_json(rep);
  out.result["solve"]["below_threshold"] = rep.level < cert.threshold;
  out.csv = {{"u_star.csv", detail::csv_of(rep.u_star)}, {"phi_star.csv", detail::csv_of(rep.phi_star)}};
  if (cert.verdict == Verdict::Inconclusive) out.exit_code = kInconclusive;
  else if (!rep.converged) out.exit_code = kStagnation;
  return out;
}

inline Outcome run_nonexistence(const RunConfig& c) {
  const auto g = c.nonexistence.grid.build();
  const ProblemSpec spec(Family::critical_pure(), c.potential.build(g), g);
  SolveOptions opts = c.solver;
  opts.allow_critical_pure = true;
  opts.max_iterations = c.nonexistence.max_iterations;
  const auto rep = solve_ground_state(spec, opts);
  Outcome out;
  out.result = detail::report_json(rep);
  out.result["certificate"] = detail::certificate_json(*rep.certificate);
  Json radii = Json::array();
  for (const auto& h : rep.history) radii.push_back(h.mass_radius);
  out.result["mass_radius_90"] = radii;
  out.result["shrinking_over_window"] = detail::shrinking(rep.history, c.nonexistence.window);
  out.result["hit_iteration_cap"] = rep.iterations == opts.max_iterations;
  out.csv = {{"u_star.csv", detail::csv_of(rep.u_star)}, {"phi_star.csv", detail::csv_of(rep.phi_star)}};
  if (!rep.certificate->certifies()) out.exit_code = kFailure;
  return out;
}

inline Outcome run_bubbles(const RunConfig& c) {
  const auto S = estimate_S(c.bubbles.s_grid.build());
  const auto table =
      bubble_scaling_table(c.bubbles.epsilons, c.bubbles.s, c.bubbles.r_cut, c.bubbles.grid.build(), S.S);
  Outcome out;
  Json fits = Json::array();
  for (const auto& f : table.fits)
    fits.push_back({{"s", f.s},
                    {"slope", f.slope},
                    {"expected", f.expected},
                    {"relative_error", std::abs(f.slope - f.expected) / f.expected},
                    {"residual", f.residual}});
  out.result = {{"S_estimate", S.S}, {"fits", fits}, {"table", "bubbles.csv"}};
  std::ostringstream os;
  os << std::setprecision(17) << "epsilon,s,norm,fitted_slope\n";
  for (const auto& r : table.rows) os << r.epsilon << ',' << r.s << ',' << r.value << ',' << r.fitted_slope << '\n';
  out.csv = {{"bubbles.csv", os.str()}};
  return out;
}

inline Outcome run_continuation(const RunConfig& c, unsigned threads) {
  const auto spec = c.problem();
  const auto cont = continuation_c_of_V(spec.potential(), c.continuation.deltas, spec, c.solver, threads);
  Outcome out;
  Json pts = Json::array();
  for (const auto& p : cont.points) pts.push_back({{"delta", p.delta}, {"level", p.level}, {"iterations", p.iterations}});
  out.result = {{"points", pts}, {"modulus", cont.modulus}, {"monotone", cont.monotone}};
  if (!spec.potential().is_constant()) {
    const auto ref = solve_ground_state(spec.with_potential(c.potential.at_infinity()), c.solver);
    const auto base = std::find_if(cont.points.begin(), cont.points.end(), [](auto& p) { return p.delta == 0.0; });
    out.result["c_infinity"] = ref.level;
    out.result["gap"] = ref.level - base->level;
    out.result["below_c_infinity"] = base->level < ref.level;
  }
  return out;
}

inline Outcome run_check(std::uint64_t seed) {
  Outcome out;
  Json rows = Json::array();
  bool ok = true;
  for (const auto& r : run_checks(seed)) {
    rows.push_back({{"name", r.name}, {"passed", r.passed}, {"measured", r.measured}, {"bound", r.bound}});
    ok = ok && r.passed;
  }
  out.result = {{"checks", rows}, {"all_passed", ok}};
  if (!ok) out.exit_code = kFailure;
  return out;
}

inline Outcome dispatch(const RunConfig& c, unsigned threads) {
  switch (c.experiment) {
    case Experiment::Solve: return run_solve(c, threads);
    case Experiment::CertifyCritical: return run_certify(c);
    case Experiment::Nonexistence: return run_nonexistence(c);
    case Experiment::Bubbles: return run_bubbles(c);
    case Experiment::Continuation: return run_continuation(c, threads);
    case Experiment::Check: return run_check(c.solver.seed);
  }
  return {};
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Runs the configured experiment and assembles the report. Errors become
/// exit codes with their diagnostics in the report.
inline std::pair<int, Json> run(const RunConfig& c, unsigned threads, std::vector<std::pair<std::string, std::string>>* csv) {
  Json report{{"config", to_json(c)}, {"experiment", to_string(c.experiment)}};
  int code = kSuccess;
  try {
    auto out = dispatch(c, threads);
    code = out.exit_code;
    report["result"] = std::move(out.result);
    if (csv) *csv = std::move(out.csv);
  } catch (const Stagnation& e) {
    code = kStagnation;
    report["error"] = {{"kind", "stagnation"}, {"message", e.what()}, {"diagnostic", e.diagnostic()}};
  } catch (const ConfigError& e) {
    code = kInvalid;
    report["error"] = {{"kind", "validation"}, {"violations", e.violations()}};
  } catch (const SpecError& e) {
    code = kInvalid;
    report["error"] = {{"kind", "validation"}, {"violations", {e.what()}}};
  } catch (const Error& e) {
    code = kFailure;
    report["error"] = {{"kind", "error"}, {"message", e.what()}};
  }
  report["exit_code"] = code;
  report["metadata"] = {{"timestamp", utc_timestamp()}, {"threads", threads}};
  return {code, report};
}

/// The report minus its metadata block: the part that is reproducible.
inline Json deterministic_part(Json report) {
  report.erase("metadata");
  return report;
}

inline void write_outputs(const std::filesystem::path& dir, const Json& report,
                          const std::vector<std::pair<std::string, std::string>>& csv) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  for (const auto& [name, body] : csv) std::ofstream(dir / name) << body;
}

}  // namespace spgs::cli
