#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "chronos/numkernel.hpp"

namespace chronos {

enum class AxisLabel { position, time };

/// Uniform periodic sample grid for one continuous variable.
///
/// Samples are origin + j * spacing for j = 0..n-1, with period
/// L = n * spacing. The induced Fourier lattice is w_k = 2 pi k / L for
/// k = -n/2 .. n - 1 - n/2.
struct AxisGrid {
  Index n = 0;
  double origin = 0.0;
  double spacing = 1.0;
  AxisLabel label = AxisLabel::position;

  bool operator==(const AxisGrid&) const = default;

  double period() const { return static_cast<double>(n) * spacing; }
  double sample(Index j) const { return origin + static_cast<double>(j) * spacing; }
  Index lowest_mode() const { return -(n / 2); }
  /// Wavenumber of Fourier slot `slot` (0-based), i.e. k = lowest_mode() + slot.
  double frequency(Index slot) const;

  Eigen::VectorXd samples() const;
  Eigen::VectorXd frequencies() const;
};

/// Throws InvalidArgument unless n >= 2 and spacing is finite and positive.
AxisGrid make_axis(Index n, double origin, double spacing, AxisLabel label);

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  double c = 1.0;
  double omega = 1.0;

  bool operator==(const PhysicalConstants&) const = default;

  /// hbar^2 omega / (m^2 c^4): spacing of the oscillator's discrete times.
  double time_quantum() const { return hbar * hbar * omega / (mass * mass * c * c * c * c); }
  double oscillator_length() const { return std::sqrt(hbar / (mass * omega)); }
};

void validate(const PhysicalConstants& k);

// Grid recipes. The q-grid spans [-10, 10) oscillator lengths with 128
// samples. The energy-aligned time grid has period 4 pi / omega, which puts
// every hbar omega (n + 1/2) on the energy lattice; the time-aligned grid has
// spacing and half-spacing origin equal to the time quantum, which puts
// every discrete oscillator time on a sample.
inline constexpr Index kDefaultPositionSamples = 128;
inline constexpr Index kDefaultTimeSamples = 32;

AxisGrid default_position_grid(const PhysicalConstants& k);
/// 48 samples on [-9, 9) oscillator lengths; keeps composite spaces small
/// enough for dense near-null solves.
AxisGrid compact_position_grid(const PhysicalConstants& k);
AxisGrid energy_aligned_time_grid(const PhysicalConstants& k, Index n_t = kDefaultTimeSamples);
AxisGrid time_aligned_time_grid(const PhysicalConstants& k, Index n_t = kDefaultTimeSamples);
/// 128 samples spaced 1/(4 omega) from t = 0. Wide and fine enough for
/// time-localized Gaussians with widths between one and two in 1/omega.
AxisGrid wide_time_grid(const PhysicalConstants& k);

/// Amplitudes on H_q (x) H_t, index q * n_t + t.
class CompositeState {
 public:
  CompositeState() = default;
  /// Normalizes `amplitudes`; throws ZeroOverlap on a zero vector.
  static CompositeState normalized(Index n_q, Index n_t, Eigen::VectorXcd amplitudes);
  /// Keeps the amplitudes as given (ladder outputs, annihilated states).
  static CompositeState unnormalized(Index n_q, Index n_t, Eigen::VectorXcd amplitudes);
  /// Normalized kron(system_part, time_part).
  static CompositeState separable(const Eigen::VectorXcd& system_part, const Eigen::VectorXcd& time_part);

  Index n_q() const { return n_q_; }
  Index n_t() const { return n_t_; }
  Index size() const { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }
  bool is_normalized() const { return normalized_; }

  /// Column-major n_t x n_q view: entry (t, q).
  Eigen::Map<const Eigen::MatrixXcd> grid() const { return {amplitudes_.data(), n_t_, n_q_}; }

 private:
  CompositeState(Index n_q, Index n_t, Eigen::VectorXcd amplitudes, bool normalized);

  Index n_q_ = 0;
  Index n_t_ = 0;
  Eigen::VectorXcd amplitudes_;
  bool normalized_ = false;
};

/// |<a|b>|
double overlap(const CompositeState& a, const CompositeState& b);

/// <v|A|v> / <v|v> for Hermitian A.
double expectation(const OperatorMatrix& op, const Eigen::VectorXcd& v);

OperatorMatrix position_operator(const AxisGrid& g);
/// -i hbar d/dq, realised as F^H diag(hbar w_k) F.
OperatorMatrix momentum_operator(const AxisGrid& g, const PhysicalConstants& k);
/// F^H diag((hbar w_k)^2) F
OperatorMatrix momentum_squared_operator(const AxisGrid& g, const PhysicalConstants& k);
OperatorMatrix time_operator(const AxisGrid& g);
/// +i hbar d/dt, realised as F^H diag(-hbar w_k) F.
OperatorMatrix energy_operator(const AxisGrid& g, const PhysicalConstants& k);

/// F^H diag(symbol) F for a real symbol indexed by Fourier slot. Exactly
/// Hermitian by construction.
OperatorMatrix spectral_operator(const AxisGrid& g, const Eigen::VectorXd& symbol);

/// Energy values -hbar w_k representable on a time grid, one per Fourier slot.
Eigen::VectorXd energy_lattice(const AxisGrid& g, const PhysicalConstants& k);
/// Distance from E to the nearest lattice energy, in units of the lattice spacing.
double lattice_offset(const AxisGrid& g, double energy, const PhysicalConstants& k);
inline constexpr double kLatticeTolerance = 1e-6;

struct EnergyEigenvector {
  Eigen::VectorXcd state;
  bool on_lattice = false;
  std::optional<std::string> warning;
};

/// Sampled exp(-i E t_j / hbar) / sqrt(n). Throws OutOfBand when
/// |E| > hbar pi / spacing; warns when E is off the Fourier lattice.
EnergyEigenvector energy_eigenvector(const AxisGrid& g, double energy, const PhysicalConstants& k);

/// Grid delta at sample j.
Eigen::VectorXcd grid_delta(const AxisGrid& g, Index j);

/// Normalized Gaussian with |psi|^2 standard deviation `sigma`, optionally
/// carrying a plane-wave factor exp(i k0 x).
Eigen::VectorXcd gaussian_state(const AxisGrid& g, double center, double sigma, double wavenumber = 0.0);

/// kron(A, I_{n_t})
OperatorMatrix lift_system(const OperatorMatrix& a, Index n_t);
/// kron(I_{n_q}, B)
OperatorMatrix lift_time(const OperatorMatrix& b, Index n_q);

}  // namespace chronos
