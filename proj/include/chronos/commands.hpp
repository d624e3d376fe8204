#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chronos/dynamics.hpp"
#include "chronos/table.hpp"

namespace chronos {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_no_convergence = 3 };

struct CommandOptions {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::string suite;
  Index levels = 8;
  std::optional<double> tol;
  std::string equation = "first";  // subspace: first | second
};

struct CommandResult {
  ResultTable table;
  int exit_code = exit_ok;
  std::vector<std::string> diagnostics;
  /// Extra text appended after the table (the abort line of a failed run).
  std::string trailer;
};

/// Scenario from --config, or unit constants on the energy-aligned preset.
Scenario scenario_or_default(const CommandOptions& opts, GridPreset fallback = GridPreset::energy_aligned);

/// n, E_n, t_n, t_n_predicted, abs_error for the lowest `levels` states.
CommandResult cmd_spectrum(const CommandOptions& opts);

inline const std::vector<std::string> kCheckSuites = {"commutators", "constraint1", "constraint2",
                                                      "generalized", "uncertainty", "ladder"};

/// name, value, bound, status per check; status is pass, fail or
/// pass-empty (nothing to check, e.g. no matched constraint pairs).
/// Throws UnknownSuite for names outside kCheckSuites.
CommandResult cmd_check(const CommandOptions& opts);

/// Trajectory CSV of the scenario in --config. A failing step yields the
/// records so far plus "# aborted: <reason>".
CommandResult cmd_run(const CommandOptions& opts);

/// index, label, multiplet, residual of the physical subspace of the first
/// (or second) constraint.
CommandResult cmd_subspace(const CommandOptions& opts);

/// Maps a library error to the process exit code.
int exit_code_for(Errc code);

}  // namespace chronos
