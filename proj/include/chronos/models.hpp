#pragma once

#include "chronos/axes.hpp"

namespace chronos {

enum class ModelKind { oscillator, free_particle };

struct ModelSpec {
  ModelKind kind = ModelKind::oscillator;
  PhysicalConstants constants;
  AxisGrid grid;  // position grid

  bool operator==(const ModelSpec&) const = default;
};

/// Throws WrongAxis unless the grid is a position grid.
ModelSpec make_model(ModelKind kind, const PhysicalConstants& k, const AxisGrid& position_grid);

using EigenSystemXcd = EigenSystem<std::complex<double>>;

/// Default number of oscillator levels kept for ladder algebra and jumps.
inline constexpr Index kDefaultLevels = 16;

/// p^2 / 2m + m omega^2 q^2 / 2
OperatorMatrix harmonic_hamiltonian(const ModelSpec& m);
/// p^2 / 2m
OperatorMatrix free_hamiltonian(const ModelSpec& m);
/// Dispatches on the model kind.
OperatorMatrix hamiltonian(const ModelSpec& m);

/// (hbar / m^2 c^4) times the oscillator Hamiltonian.
OperatorMatrix oscillator_G(const ModelSpec& m);
/// (hbar / m^3 c^4) p^2
OperatorMatrix free_particle_G(const ModelSpec& m);
/// Dispatches on the model kind.
OperatorMatrix time_generator(const ModelSpec& m);

/// hbar^2 omega / (m^2 c^4) (n + 1/2)
double predicted_tn(Index n, const PhysicalConstants& k);

/// Ascending (hbar / m^3 c^4) p_k^2 over the momentum lattice of `grid`.
Eigen::VectorXd predicted_free_times(const AxisGrid& grid, const PhysicalConstants& k);

struct LadderPair {
  OperatorMatrix lower;  // a
  OperatorMatrix raise;  // a^dagger
  Index levels = 0;
};

/// a|n> = sqrt(n)|n-1>, a^dagger|n> = sqrt(n+1)|n+1> on the lowest
/// `levels` eigenvectors of the oscillator Hamiltonian, with
/// a^dagger|levels-1> = 0. Returned in the grid basis.
LadderPair ladder_operators(const ModelSpec& m, const EigenSystemXcd& levels_of_h, Index levels = kDefaultLevels);

}  // namespace chronos
