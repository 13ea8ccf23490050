// vns: command-line front end (validate, run, sweep, mms, oracle-compare).

#include "vns/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Degenerate-viscosity compressible Navier-Stokes solver and verification harness"};
  app.require_subcommand(1);

  vns::CliOptions opt;
  std::string out;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub, bool with_workers) {
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--out", out, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "seed for randomized checks (overrides solver.seed)");
    sub->add_flag("--snapshots", opt.snapshots, "write binary field snapshots");
    if (with_workers) sub->add_option("--workers", opt.workers, "concurrent sweep rows")->check(CLI::PositiveNumber);
  };
  CLI::App* validate = app.add_subcommand("validate", "check parameters and initial data");
  CLI::App* run = app.add_subcommand("run", "continuation pipeline with diagnostics");
  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian product of the [sweep] ranges");
  CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence orders");
  CLI::App* compare = app.add_subcommand("oracle-compare", "reform solver against the primitive-variable oracle");
  add_common(validate, false);
  add_common(run, false);
  add_common(sweep, true);
  add_common(mms, false);
  add_common(compare, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(vns::ExitCode::validation);
  }
  if (!out.empty()) opt.out = out;
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opt.seed = seed;

  try {
    if (sub == validate) return vns::cmd_validate(opt, std::cout, std::cerr);
    if (sub == run) return vns::cmd_run(opt, std::cout, std::cerr);
    if (sub == sweep) return vns::cmd_sweep(opt, std::cout, std::cerr);
    if (sub == mms) return vns::cmd_mms(opt, std::cout, std::cerr);
    return vns::cmd_oracle_compare(opt, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(vns::ExitCode::solver);
  }
}
