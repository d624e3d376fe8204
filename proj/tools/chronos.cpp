#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "chronos/commands.hpp"

namespace {

bool use_color() { return std::getenv("CHRONOS_NO_COLOR") == nullptr; }

void diagnostic(const std::string& level, const std::string& text) {
  if (use_color()) {
    const char* code = level == "error" ? "\033[31m" : "\033[33m";
    std::cerr << code << level << "\033[0m: " << text << '\n';
  } else {
    std::cerr << level << ": " << text << '\n';
  }
}

int emit(const chronos::CommandResult& r, const std::optional<std::string>& out_path) {
  for (const auto& d : r.diagnostics) diagnostic("warning", d);
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      diagnostic("error", "cannot write '" + *out_path + "'");
      return chronos::exit_usage;
    }
    r.table.write_csv(out);
    out << r.trailer;
  } else {
    r.table.write_csv(std::cout);
    std::cout << r.trailer;
    std::cout.flush();
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete simulator for quantum systems with operators of time and energy"};
  app.require_subcommand(1);

  chronos::CommandOptions opts;
  std::string config, out;
  double tol = 0.0;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Scenario JSON file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Write the table to this file instead of stdout");
    sub->add_option("--tol", tol, "Constraint tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "Threads for dense linear algebra")->check(CLI::PositiveNumber);
  };

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues of H and G against the predicted discrete times");
  add_common(spectrum);
  spectrum->add_option("--levels", opts.levels, "Number of rows")->check(CLI::NonNegativeNumber);

  auto* check = app.add_subcommand("check", "Run an invariant suite");
  add_common(check);
  check->add_option("--suite", opts.suite, "commutators | constraint1 | constraint2 | generalized | uncertainty | ladder")
      ->required();

  auto* run = app.add_subcommand("run", "Run a scenario and write its trajectory");
  add_common(run);

  auto* subspace = app.add_subcommand("subspace", "Physical subspace of a constraint");
  add_common(subspace);
  subspace->add_option("--equation", opts.equation, "first | second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chronos::exit_usage;
  }

  CLI::App* active = app.get_subcommands().front();
  if (active->count("--config")) opts.config = config;
  if (active->count("--out")) opts.out = out;
  if (active->count("--tol")) opts.tol = tol;
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    chronos::CommandResult result;
    if (active == spectrum)
      result = chronos::cmd_spectrum(opts);
    else if (active == check)
      result = chronos::cmd_check(opts);
    else if (active == run)
      result = chronos::cmd_run(opts);
    else
      result = chronos::cmd_subspace(opts);
    return emit(result, opts.out);
  } catch (const chronos::Error& e) {
    diagnostic("error", std::string(chronos::to_string(e.code())) + ": " + e.what());
    return chronos::exit_code_for(e.code());
  } catch (const std::exception& e) {
    diagnostic("error", e.what());
    return chronos::exit_usage;
  }
}
