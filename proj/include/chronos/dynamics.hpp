#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chronos/axes.hpp"
#include "chronos/constraints.hpp"
#include "chronos/models.hpp"

namespace chronos {

/// exp(s dt / i hbar): shifts band-limited sampled functions f(t) -> f(t + dt).
OperatorMatrix time_translation(const AxisGrid& time_grid, const PhysicalConstants& k, double dt);

/// exp(t dE / i hbar) = diag(exp(-i dE t_j / hbar)): maps |E> to |E + dE>.
OperatorMatrix energy_shift(const AxisGrid& time_grid, const PhysicalConstants& k, double d_energy);

/// Two-level swap of eigenvectors i and j, identity on their complement.
OperatorMatrix eigen_swap_unitary(Index i, Index j, const EigenSystemXcd& levels);

/// Everything the ladder steps need for one oscillator on one time grid.
struct OscillatorClock {
  ModelSpec model;
  AxisGrid time_grid;
  EigenSystemXcd levels;  // lowest n_max eigenpairs of H
  LadderPair ladder;
  double time_quantum = 0.0;
  OperatorMatrix forward;   // time_translation(-dt): t_n -> t_{n+1}
  OperatorMatrix backward;  // time_translation(+dt): t_n -> t_{n-1}

  Index n_max() const { return ladder.levels; }
};

OscillatorClock make_oscillator_clock(const ModelSpec& model, const AxisGrid& time_grid, Index n_max = kDefaultLevels);

/// psi_n (x) (delta at t_n), the discrete-time solution at level n.
CompositeState discrete_time_state(const OscillatorClock& clock, Index n);

/// Level whose eigenvector carries most of the system-factor weight.
Index dominant_level(const CompositeState& s, const EigenSystemXcd& levels);

struct LadderStep {
  CompositeState state;  // unnormalized
  double coefficient = 0.0;
  Index from_level = 0;
};

/// a^dagger (x) exp(-s dt / i hbar). Throws TruncationTop at the top level.
LadderStep ladder_step_up(const CompositeState& s, const OscillatorClock& clock);
/// a (x) exp(+s dt / i hbar). Level 0 is annihilated to the exact zero vector.
LadderStep ladder_step_down(const CompositeState& s, const OscillatorClock& clock);

/// U(i, j) (x) exp(t dE / i hbar) with dE = E_j - E_i. Both energies must
/// lie on the energy lattice of the time grid (OffLattice otherwise).
CompositeState energy_jump(const CompositeState& s, Index i, Index j, const EigenSystemXcd& levels,
                           const AxisGrid& time_grid, const PhysicalConstants& k);

// ---------------------------------------------------------------------------
// Scenarios

enum class GridPreset { energy_aligned, time_aligned, explicit_grids };

struct EvolveStep {
  double duration = 0.0;
  bool operator==(const EvolveStep&) const = default;
};

struct JumpStep {
  Index from = 0;
  Index to = 0;
  double at = 0.0;
  bool operator==(const JumpStep&) const = default;
};

using Step = std::variant<EvolveStep, JumpStep>;

struct InitialLevel {
  Index level = 0;
  bool operator==(const InitialLevel&) const = default;
};
struct InitialEnergy {
  double energy = 0.0;
  bool operator==(const InitialEnergy&) const = default;
};
struct InitialAmplitudes {
  std::vector<std::complex<double>> amplitudes;
  bool operator==(const InitialAmplitudes&) const = default;
};
using InitialCondition = std::variant<InitialLevel, InitialEnergy, InitialAmplitudes>;

struct Tolerances {
  double constraint_tol = 1e-6;
  double eigen_tol = 1e-9;
  bool operator==(const Tolerances&) const = default;
};

struct Scenario {
  PhysicalConstants constants;
  GridPreset preset = GridPreset::energy_aligned;
  AxisGrid q_grid;
  AxisGrid t_grid;
  ModelKind model = ModelKind::oscillator;
  InitialCondition initial = InitialLevel{0};
  std::vector<Step> steps;
  Tolerances tolerances;

  bool operator==(const Scenario&) const = default;
  ModelSpec model_spec() const { return {model, constants, q_grid}; }
};

/// Resolves a preset name to grids (default q-grid plus the matching time grid).
void apply_preset(Scenario& sc, GridPreset preset);

/// Throws ValidationError naming the offending field: grid labels, finite
/// durations, jump levels below n_max with from != to, and every jump time
/// within constraint_tol of an eigenvalue of G.
void validate_scenario(const Scenario& sc);

enum class StepKind { initial, evolve, jump };
std::string_view to_string(StepKind kind);

struct TrajectoryRecord {
  Index step_index = 0;
  StepKind kind = StepKind::initial;
  double q_mean = 0.0;
  double p_mean = 0.0;
  double energy_mean = 0.0;
  double residual1 = 0.0;
  double subspace_weight = 0.0;
  std::vector<double> probabilities;  // over the physical-subspace basis
  /// ||kron(I, T_s) psi - kron(T_H, I) psi|| for evolve steps on
  /// constraint-satisfying states; NaN when not checked.
  double equivalence_gap = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<double> energy_labels;  // label of each probability slot
  std::vector<std::string> warnings;
};

/// Raised when a step fails; carries the records produced so far.
class ScenarioError : public Error {
 public:
  ScenarioError(const Error& cause, Index step, Trajectory partial)
      : Error(cause.code(), "step " + std::to_string(step) + ": " + cause.what()),
        step_(step),
        partial_(std::move(partial)) {}

  Index step() const { return step_; }
  const Trajectory& partial() const { return partial_; }

 private:
  Index step_;
  Trajectory partial_;
};

/// Equivalence bound between the two evolution operators on solutions.
inline constexpr double kEvolutionEquivalenceTol = 1e-6;

Trajectory run_scenario(const Scenario& sc);

}  // namespace chronos
