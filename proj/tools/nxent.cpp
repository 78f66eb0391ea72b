#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nxent/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "nxent: nonextensive (Tsallis) maximum-entropy and minimum "
      "relative-entropy inference"};
  app.require_subcommand(1);

  nxent::cli::CommonFlags flags;
  std::string kind;
  double tolerance = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-i,--input", flags.input, "problem file (JSON)")
        ->required();
    sub->add_option("-o,--output", flags.output,
                    "output file (default: stdout)");
    sub->add_option("--kind", kind, "constraint kind override")
        ->check(CLI::IsMember({"q", "normalized"}));
    sub->add_option("--tolerance", tolerance, "solver residual tolerance");
  };

  CLI::App* cmd_solve = app.add_subcommand(
      "solve", "solve for the generalized equilibrium distribution");
  CLI::App* cmd_verify = app.add_subcommand(
      "verify-triangle", "verify the nonextensive triangle equality");
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep-q", "solve across a q list and emit plot-ready CSV");
  add_common(cmd_solve);
  add_common(cmd_verify);
  add_common(cmd_sweep);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--kind") > 0) flags.kind = kind;
  if (sub->count("--tolerance") > 0) flags.tolerance = tolerance;

  if (sub == cmd_solve) {
    return nxent::cli::run_solve(flags, std::cout, std::cerr);
  }
  if (sub == cmd_verify) {
    return nxent::cli::run_verify_triangle(flags, std::cout, std::cerr);
  }
  return nxent::cli::run_sweep_q(flags, std::cout, std::cerr);
}
