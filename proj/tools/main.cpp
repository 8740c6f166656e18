#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, sced::cli::CommonOptions& opt, bool solves) {
  if (solves) {
    cmd->add_option("--mode", opt.mode, "reservation mode")
        ->check(CLI::IsMember({"positive-only", "bidirectional", "up", "down", "updown"}));
    cmd->add_option("--tol", opt.tol, "solver tolerance")->check(CLI::Range(1e-10, 1e-4));
  }
  cmd->add_option("--out-dir", opt.out_dir, "artifact directory (default $SCED_OUT_DIR)");
  cmd->add_option("--format", opt.format, "stdout layout")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, sced::cli::Format>{{"table", sced::cli::Format::Table},
                                                   {"csv", sced::cli::Format::Csv}}));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sced::cli;
  CLI::App app{"security-constrained dispatch with inertia and PFR services"};
  app.set_version_flag("--version", std::string("sced ") + kToolVersion);
  app.require_subcommand(1);

  CommonOptions opt;
  std::string scenario, parameter, run_dir, trace;
  std::vector<double> values;
  VerifyOptions vopt;
  SettleFlags sflags;
  bool no_eta_adjust = false;

  auto* run = app.add_subcommand("run", "solve a scenario and write run artifacts");
  run->add_option("scenario", scenario, "scenario file")->required();
  add_common(run, opt, true);

  auto* sweep = app.add_subcommand("sweep", "solve a scenario over a parameter range");
  sweep->add_option("scenario", scenario, "scenario file")->required();
  sweep->add_option("--param", parameter, "h, demand, rocof_max, dfnad_max, eta or d_max")
      ->required();
  sweep->add_option("--values", values, "values to solve at")->delimiter(',')->required();
  add_common(sweep, opt, true);

  auto* verify = app.add_subcommand("verify", "simulate the loss event for a run");
  verify->add_option("run_dir", run_dir, "directory holding run.json")->required();
  verify->add_option("--loss", vopt.loss, "MW, defaults to the largest contingency");
  verify->add_option("--step", vopt.step, "s, defaults to t_pfr/1000");
  verify->add_option("--horizon", vopt.horizon, "s, defaults to the dispatch interval");
  add_common(verify, opt, false);

  auto* settle = app.add_subcommand("settle", "settle a run against a frequency trace");
  settle->add_option("run_dir", run_dir, "directory holding run.json")->required();
  settle->add_option("--trace", trace, "trace file (t,df,dfdot)")->required();
  settle->add_option("--rtp", sflags.rtp, "real-time price, $/MWh")->required();
  settle->add_option("--rtp-negative", sflags.rtp_negative, "price for absorbed energy");
  settle->add_flag("--no-eta-adjust", no_eta_adjust, "settle IBR absorption without 1/eta");
  add_common(settle, opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*run) return cmd_run(scenario, opt, std::cout);
    if (*sweep) return cmd_sweep(scenario, parameter, values, opt, std::cout);
    if (*verify) return cmd_verify(run_dir, vopt, opt, std::cout);
    sflags.eta_adjust_ibrs = !no_eta_adjust;
    return cmd_settle(run_dir, trace, sflags, opt, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
