#pragma once

// JSON problem files, JSON reports and CSV sweep output. Reports are built
// with insertion-ordered keys and nlohmann's shortest round-trip float
// serialization, so identical inputs produce byte-identical documents.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nxent/distribution.hpp"
#include "nxent/errors.hpp"
#include "nxent/solvers.hpp"
#include "nxent/triangle.hpp"

namespace nxent {

using ordered_json = nlohmann::ordered_json;

struct ProblemFile {
  SupportGrid grid;
  std::optional<Distribution> prior;
  std::optional<Distribution> l;
  std::vector<MomentFunction> functions;
  std::optional<Eigen::VectorXd> targets;
  ConstraintKind kind = ConstraintKind::QExpectation;
  std::vector<double> q_values;
  bool q_is_list = false;
  SolverOptions options;

  ConstraintSet constraints() const {
    if (static_cast<Eigen::Index>(functions.size()) > 0 && !targets) {
      throw ParseError("$.constraints.targets: required for this command");
    }
    return ConstraintSet(functions,
                         targets ? *targets : Eigen::VectorXd(0), kind);
  }
};

namespace io_detail {

inline const nlohmann::json& member(const nlohmann::json& j, const char* key,
                                    const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing");
  return *it;
}

inline double number_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline Eigen::ArrayXd array_at(const nlohmann::json& j,
                               const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array of numbers");
  Eigen::ArrayXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(path + "[" + std::to_string(i) + "]: expected a number");
    }
    out[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return out;
}

inline ordered_json to_json(const Eigen::ArrayXd& a) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

inline ordered_json to_json(const Eigen::VectorXd& v) {
  return to_json(Eigen::ArrayXd(v.array()));
}

}  // namespace io_detail

inline SupportGrid parse_grid(const nlohmann::json& j,
                              const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  try {
    if (j.contains("uniform")) {
      const auto& u = j.at("uniform");
      const double a = io_detail::number_at(
          io_detail::member(u, "a", path + ".uniform"), path + ".uniform.a");
      const double b = io_detail::number_at(
          io_detail::member(u, "b", path + ".uniform"), path + ".uniform.b");
      const double n = io_detail::number_at(
          io_detail::member(u, "n", path + ".uniform"), path + ".uniform.n");
      return SupportGrid::trapezoid(a, b, static_cast<Eigen::Index>(n));
    }
    Eigen::ArrayXd pts = io_detail::array_at(
        io_detail::member(j, "points", path), path + ".points");
    if (j.contains("weights")) {
      return SupportGrid(std::move(pts),
                         io_detail::array_at(j.at("weights"),
                                             path + ".weights"));
    }
    return SupportGrid::discrete(std::move(pts));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline ProblemFile parse_problem(const nlohmann::json& j) {
  const std::string root = "$";
  SupportGrid grid = parse_grid(io_detail::member(j, "grid", root), "$.grid");

  ProblemFile pf{.grid = std::move(grid)};

  auto parse_density = [&](const char* key) -> std::optional<Distribution> {
    if (!j.contains(key)) return std::nullopt;
    const std::string path = "$." + std::string(key);
    try {
      return Distribution(pf.grid, io_detail::array_at(j.at(key), path));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path + ": " + e.what());
    }
  };
  pf.prior = parse_density("prior");
  pf.l = parse_density("l");

  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    if (!c.is_object()) throw ParseError("$.constraints: expected an object");
    if (c.contains("kind")) {
      const auto& k = c.at("kind");
      if (!k.is_string()) {
        throw ParseError("$.constraints.kind: expected \"q\" or \"normalized\"");
      }
      const std::string ks = k.get<std::string>();
      if (ks == "q") {
        pf.kind = ConstraintKind::QExpectation;
      } else if (ks == "normalized") {
        pf.kind = ConstraintKind::NormalizedQExpectation;
      } else {
        throw ParseError("$.constraints.kind: unknown kind '" + ks + "'");
      }
    }
    if (c.contains("functions")) {
      const auto& fns = c.at("functions");
      if (!fns.is_array()) {
        throw ParseError("$.constraints.functions: expected an array");
      }
      for (std::size_t m = 0; m < fns.size(); ++m) {
        const std::string path =
            "$.constraints.functions[" + std::to_string(m) + "]";
        const auto& f = fns[m];
        if (!f.is_object()) throw ParseError(path + ": expected an object");
        MomentFunction mf;
        mf.values = io_detail::array_at(io_detail::member(f, "values", path),
                                        path + ".values");
        if (mf.values.size() != pf.grid.size()) {
          throw ParseError(path + ".values: length " +
                           std::to_string(mf.values.size()) +
                           " does not match grid size " +
                           std::to_string(pf.grid.size()));
        }
        mf.label = f.contains("label") && f.at("label").is_string()
                       ? f.at("label").get<std::string>()
                       : "u" + std::to_string(m + 1);
        pf.functions.push_back(std::move(mf));
      }
    }
    if (c.contains("targets")) {
      const Eigen::ArrayXd t =
          io_detail::array_at(c.at("targets"), "$.constraints.targets");
      if (t.size() != static_cast<Eigen::Index>(pf.functions.size())) {
        throw ParseError("$.constraints.targets: " + std::to_string(t.size()) +
                         " targets for " +
                         std::to_string(pf.functions.size()) + " functions");
      }
      pf.targets = t.matrix();
    }
  }

  const bool has_q = j.contains("q");
  const bool has_list = j.contains("q_list");
  if (has_q == has_list) {
    throw ParseError("$.q: exactly one of \"q\" and \"q_list\" is required");
  }
  if (has_q) {
    pf.q_values.push_back(io_detail::number_at(j.at("q"), "$.q"));
  } else {
    const auto& ql = j.at("q_list");
    if (!ql.is_array()) throw ParseError("$.q_list: expected an array");
    for (std::size_t i = 0; i < ql.size(); ++i) {
      pf.q_values.push_back(io_detail::number_at(
          ql[i], "$.q_list[" + std::to_string(i) + "]"));
    }
    pf.q_is_list = true;
  }
  for (std::size_t i = 0; i < pf.q_values.size(); ++i) {
    if (!(pf.q_values[i] > 0.0)) {
      throw ParseError((has_q ? std::string("$.q")
                              : "$.q_list[" + std::to_string(i) + "]") +
                       ": q must be positive");
    }
  }

  if (j.contains("options")) {
    const auto& o = j.at("options");
    if (!o.is_object()) throw ParseError("$.options: expected an object");
    if (o.contains("tolerance")) {
      pf.options.tolerance =
          io_detail::number_at(o.at("tolerance"), "$.options.tolerance");
      if (!(pf.options.tolerance > 0.0)) {
        throw ParseError("$.options.tolerance: must be positive");
      }
    }
    if (o.contains("max_iterations")) {
      pf.options.max_iterations = static_cast<int>(io_detail::number_at(
          o.at("max_iterations"), "$.options.max_iterations"));
    }
  }
  return pf;
}

inline ProblemFile parse_problem_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("$: ") + e.what());
  }
  return parse_problem(j);
}

inline ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

inline const char* branch_name(SolveBranch b) {
  switch (b) {
    case SolveBranch::MaxEnt: return "maxent";
    case SolveBranch::MinXent: return "minxent";
    case SolveBranch::MinXentNormalized: return "minxent_normalized";
    case SolveBranch::Classical: return "classical";
  }
  return "unknown";
}

inline const char* kind_name(ConstraintKind k) {
  return k == ConstraintKind::QExpectation ? "q" : "normalized";
}

inline ordered_json solve_report(const ProblemFile& pf,
                                 const SolveResult& res,
                                 const ThermoReport& thermo, double q) {
  ordered_json doc;
  doc["command"] = "solve";
  doc["q"] = q;
  doc["kind"] = kind_name(pf.kind);
  doc["branch"] = branch_name(res.branch);
  doc["converged"] = true;
  doc["iterations"] = res.iterations;
  doc["outer_iterations"] = res.outer_iterations;
  doc["residual_norm"] = res.residual_norm;
  doc["multipliers"] = io_detail::to_json(res.multipliers);
  if (res.multipliers_escort.size() > 0) {
    doc["multipliers_escort"] = io_detail::to_json(res.multipliers_escort);
  }
  doc["partition_value"] = res.partition_value;
  doc["divergence"] = res.divergence;
  doc["escort_mass"] = res.escort_mass;
  doc["density"] = io_detail::to_json(res.distribution.density());
  doc["grid"] = {{"points", io_detail::to_json(pf.grid.points())},
                 {"weights", io_detail::to_json(pf.grid.weights())}};
  if (pf.targets) doc["targets"] = io_detail::to_json(*pf.targets);
  doc["thermo"] = {
      {"identity_residual", thermo.potential_identity_residual},
      {"log_partition_derivative_residuals",
       io_detail::to_json(thermo.log_partition_derivative_residuals)},
      {"divergence_derivative_residuals",
       io_detail::to_json(thermo.divergence_derivative_residuals)},
      {"fd_step", thermo.fd_step}};
  return doc;
}

inline ordered_json triangle_report(const TriangleReport& rep, double q,
                                    double pass_threshold) {
  ordered_json doc;
  doc["command"] = "verify-triangle";
  doc["q"] = q;
  doc["kind"] = kind_name(rep.kind);
  doc["d_lr"] = rep.d_lr;
  doc["d_lp"] = rep.d_lp;
  doc["d_pr"] = rep.d_pr;
  doc["residual"] = rep.residual;
  doc["matched_targets"] = io_detail::to_json(rep.matched_targets);
  doc["fixed_point_iterations"] = rep.fixed_point_iterations;
  doc["inequality"] =
      q > 1.0 ? "d_lr >= d_lp + d_pr" : "d_lr <= d_lp + d_pr";
  doc["inequality_holds"] = q > 1.0
                                ? rep.d_lr >= rep.d_lp + rep.d_pr - 1e-12
                                : rep.d_lr <= rep.d_lp + rep.d_pr + 1e-12;
  doc["matching_minimizes_dlp"] = rep.matching_minimizes_dlp;
  doc["pass"] = std::abs(rep.residual) < pass_threshold;
  return doc;
}

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[48];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace nxent
