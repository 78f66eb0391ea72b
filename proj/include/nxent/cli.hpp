#pragma once

// Drivers behind the nxent command-line subcommands. Exit codes: 0 success,
// 1 solver failure (or triangle residual above threshold), 2 parse error,
// 3 matching-degenerate.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nxent/problem_io.hpp"

namespace nxent::cli {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitParseError = 2;
constexpr int kExitMatchingDegenerate = 3;

constexpr double kTriangleResidualThreshold = 1e-8;

struct CommonFlags {
  std::string input;
  std::string output;  // empty -> stdout
  std::optional<std::string> kind;
  std::optional<double> tolerance;
};

namespace cli_detail {

inline void apply_overrides(ProblemFile& pf, const CommonFlags& flags) {
  if (flags.kind) {
    if (*flags.kind == "q") {
      pf.kind = ConstraintKind::QExpectation;
    } else if (*flags.kind == "normalized") {
      pf.kind = ConstraintKind::NormalizedQExpectation;
    } else {
      throw ParseError("--kind: expected 'q' or 'normalized'");
    }
  }
  if (flags.tolerance) {
    if (!(*flags.tolerance > 0.0)) {
      throw ParseError("--tolerance: must be positive");
    }
    pf.options.tolerance = *flags.tolerance;
  }
}

inline void write_output(const std::string& path, const std::string& body,
                         std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + path + "'");
  out << body;
}

inline double single_q(const ProblemFile& pf) {
  if (pf.q_is_list || pf.q_values.size() != 1) {
    throw ParseError("$.q: this command requires a single q, not a q_list");
  }
  return pf.q_values[0];
}

inline SolveResult dispatch_solve(const ProblemFile& pf, const QIndex& q) {
  const ConstraintSet cs = pf.constraints();
  if (!pf.prior) {
    if (pf.kind == ConstraintKind::NormalizedQExpectation) {
      throw ParseError("$.prior: required when kind is 'normalized'");
    }
    return solve_maxent(pf.grid, cs, q, pf.options);
  }
  return solve(*pf.prior, cs, q, pf.options);
}

}  // namespace cli_detail

inline int run_solve(const CommonFlags& flags, std::ostream& out,
                     std::ostream& diag) {
  try {
    ProblemFile pf = load_problem(flags.input);
    cli_detail::apply_overrides(pf, flags);
    const QIndex q{cli_detail::single_q(pf)};
    const SolveResult res = cli_detail::dispatch_solve(pf, q);
    const ThermoReport thermo =
        thermo_identities(res, pf.constraints(), q, pf.options);
    cli_detail::write_output(
        flags.output, solve_report(pf, res, thermo, q.value()).dump(2) + "\n",
        out);
    return kExitOk;
  } catch (const ParseError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

inline int run_verify_triangle(const CommonFlags& flags, std::ostream& out,
                               std::ostream& diag) {
  try {
    ProblemFile pf = load_problem(flags.input);
    cli_detail::apply_overrides(pf, flags);
    const QIndex q{cli_detail::single_q(pf)};
    if (!pf.l) throw ParseError("$.l: required for verify-triangle");
    if (!pf.prior) throw ParseError("$.prior: required for verify-triangle");
    const TriangleReport rep =
        pf.kind == ConstraintKind::QExpectation
            ? verify_triangle(*pf.l, *pf.prior, pf.functions, q, pf.options)
            : verify_triangle_normalized(*pf.l, *pf.prior, pf.functions, q,
                                         pf.options);
    cli_detail::write_output(
        flags.output,
        triangle_report(rep, q.value(), kTriangleResidualThreshold).dump(2) +
            "\n",
        out);
    return std::abs(rep.residual) < kTriangleResidualThreshold
               ? kExitOk
               : kExitSolverFailure;
  } catch (const ParseError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const MatchingDegenerateError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitMatchingDegenerate;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

// One CSV row per q. Row-level failures land in the last column and the
// sweep keeps going.
inline int run_sweep_q(const CommonFlags& flags, std::ostream& out,
                       std::ostream& diag) {
  try {
    ProblemFile pf = load_problem(flags.input);
    cli_detail::apply_overrides(pf, flags);
    const bool triangle_mode = pf.l.has_value();
    const std::size_t mcount = pf.functions.size();

    std::vector<std::string> header{"q"};
    if (triangle_mode) {
      header.insert(header.end(), {"d_lr", "d_lp", "d_pr", "triangle_residual"});
      for (std::size_t m = 0; m < mcount; ++m) {
        header.push_back("target_" + std::to_string(m));
      }
    } else {
      header.insert(header.end(), {"branch", "divergence", "partition_value",
                                   "residual_norm", "iterations"});
      for (std::size_t m = 0; m < mcount; ++m) {
        header.push_back("beta_" + std::to_string(m));
      }
    }
    header.push_back("error");

    auto join = [](const std::vector<std::string>& cells) {
      std::string line;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
      }
      return line + "\n";
    };

    std::string csv = join(header);
    for (double qv : pf.q_values) {
      std::vector<std::string> row{format_double(qv)};
      try {
        const QIndex q{qv};
        if (triangle_mode) {
          if (!pf.prior) {
            throw ParseError("$.prior: required when l is present");
          }
          const TriangleReport rep =
              pf.kind == ConstraintKind::QExpectation
                  ? verify_triangle(*pf.l, *pf.prior, pf.functions, q,
                                    pf.options)
                  : verify_triangle_normalized(*pf.l, *pf.prior, pf.functions,
                                               q, pf.options);
          row.insert(row.end(),
                     {format_double(rep.d_lr), format_double(rep.d_lp),
                      format_double(rep.d_pr), format_double(rep.residual)});
          for (Eigen::Index m = 0; m < rep.matched_targets.size(); ++m) {
            row.push_back(format_double(rep.matched_targets[m]));
          }
          row.emplace_back();
        } else {
          const SolveResult res = cli_detail::dispatch_solve(pf, q);
          row.insert(row.end(),
                     {branch_name(res.branch), format_double(res.divergence),
                      format_double(res.partition_value),
                      format_double(res.residual_norm),
                      std::to_string(res.iterations)});
          for (Eigen::Index m = 0; m < res.multipliers.size(); ++m) {
            row.push_back(format_double(res.multipliers[m]));
          }
          row.emplace_back();
        }
      } catch (const Error& e) {
        row.resize(header.size() - 1);
        row.push_back(csv_quote(e.what()));
      }
      csv += join(row);
    }
    cli_detail::write_output(flags.output, csv, out);
    return kExitOk;
  } catch (const ParseError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace nxent::cli
