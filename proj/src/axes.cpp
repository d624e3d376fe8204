#include "chronos/axes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace chronos {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_label(const AxisGrid& g, AxisLabel label, const char* op) {
  if (g.label != label) {
    std::ostringstream msg;
    msg << op << ": expected a " << (label == AxisLabel::position ? "position" : "time") << " grid";
    throw Error(Errc::wrong_axis, msg.str());
  }
}

}  // namespace

double AxisGrid::frequency(Index slot) const {
  return kTwoPi * static_cast<double>(lowest_mode() + slot) / period();
}

Eigen::VectorXd AxisGrid::samples() const {
  Eigen::VectorXd out(n);
  for (Index j = 0; j < n; ++j) out(j) = sample(j);
  return out;
}

Eigen::VectorXd AxisGrid::frequencies() const {
  Eigen::VectorXd out(n);
  for (Index s = 0; s < n; ++s) out(s) = frequency(s);
  return out;
}

AxisGrid make_axis(Index n, double origin, double spacing, AxisLabel label) {
  if (n < 2) throw Error(Errc::invalid_argument, "axis grid needs at least 2 samples");
  if (!std::isfinite(origin)) throw Error(Errc::invalid_argument, "axis origin must be finite");
  if (!std::isfinite(spacing) || spacing <= 0.0)
    throw Error(Errc::invalid_argument, "axis spacing must be finite and positive");
  return {n, origin, spacing, label};
}

void validate(const PhysicalConstants& k) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
      throw Error(Errc::invalid_argument, std::string("physical constant '") + name + "' must be finite and positive");
  };
  check(k.hbar, "hbar");
  check(k.mass, "mass");
  check(k.c, "c");
  check(k.omega, "omega");
}

AxisGrid default_position_grid(const PhysicalConstants& k) {
  const double len = k.oscillator_length();
  return make_axis(kDefaultPositionSamples, -10.0 * len, 20.0 * len / kDefaultPositionSamples, AxisLabel::position);
}

AxisGrid compact_position_grid(const PhysicalConstants& k) {
  const double len = k.oscillator_length();
  return make_axis(48, -9.0 * len, 18.0 * len / 48.0, AxisLabel::position);
}

AxisGrid energy_aligned_time_grid(const PhysicalConstants& k, Index n_t) {
  const double period = 2.0 * kTwoPi / k.omega;
  return make_axis(n_t, 0.0, period / static_cast<double>(n_t), AxisLabel::time);
}

AxisGrid time_aligned_time_grid(const PhysicalConstants& k, Index n_t) {
  const double dt = k.time_quantum();
  return make_axis(n_t, 0.5 * dt, dt, AxisLabel::time);
}

AxisGrid wide_time_grid(const PhysicalConstants& k) { return make_axis(128, 0.0, 0.25 / k.omega, AxisLabel::time); }

// ---------------------------------------------------------------------------

CompositeState::CompositeState(Index n_q, Index n_t, Eigen::VectorXcd amplitudes, bool normalized)
    : n_q_(n_q), n_t_(n_t), amplitudes_(std::move(amplitudes)), normalized_(normalized) {
  if (n_q <= 0 || n_t <= 0 || amplitudes_.size() != n_q * n_t)
    throw Error(Errc::dimension_mismatch, "composite state length must equal n_q * n_t");
}

CompositeState CompositeState::normalized(Index n_q, Index n_t, Eigen::VectorXcd amplitudes) {
  const double nrm = amplitudes.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(Errc::zero_overlap, "cannot normalize a zero state");
  amplitudes /= nrm;
  return CompositeState(n_q, n_t, std::move(amplitudes), true);
}

CompositeState CompositeState::unnormalized(Index n_q, Index n_t, Eigen::VectorXcd amplitudes) {
  return CompositeState(n_q, n_t, std::move(amplitudes), false);
}

CompositeState CompositeState::separable(const Eigen::VectorXcd& system_part, const Eigen::VectorXcd& time_part) {
  return normalized(system_part.size(), time_part.size(), kron(system_part, time_part));
}

double overlap(const CompositeState& a, const CompositeState& b) {
  if (a.size() != b.size()) throw Error(Errc::dimension_mismatch, "overlap: state sizes differ");
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

double expectation(const OperatorMatrix& op, const Eigen::VectorXcd& v) {
  if (op.dim() != v.size()) throw Error(Errc::dimension_mismatch, "expectation: dimension mismatch");
  return std::real(v.dot(op.matrix() * v)) / v.squaredNorm();
}

// ---------------------------------------------------------------------------

OperatorMatrix spectral_operator(const AxisGrid& g, const Eigen::VectorXd& symbol) {
  const Index n = g.n;
  if (symbol.size() != n) throw Error(Errc::dimension_mismatch, "spectral symbol length must equal grid size");
  const Index k0 = g.lowest_mode();

  // Circulant: M(j, l) = c[(j - l) mod n], c_d = (1/n) sum_k symbol_k exp(2 pi i k d / n).
  Eigen::VectorXcd c(n);
  for (Index d = 0; d <= n / 2; ++d) {
    std::complex<double> acc = 0.0;
    for (Index s = 0; s < n; ++s) {
      const Index phase_index = (((k0 + s) * d) % n + n) % n;
      const double angle = kTwoPi * static_cast<double>(phase_index) / static_cast<double>(n);
      acc += symbol(s) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    c(d) = acc / static_cast<double>(n);
  }
  c(0) = c(0).real();
  if (n % 2 == 0) c(n / 2) = c(n / 2).real();
  for (Index d = n / 2 + 1; d < n; ++d) c(d) = std::conj(c(n - d));

  Eigen::MatrixXcd m(n, n);
  for (Index l = 0; l < n; ++l)
    for (Index j = 0; j < n; ++j) m(j, l) = c(((j - l) % n + n) % n);
  return OperatorMatrix::trusted(std::move(m), {.hermitian = true});
}

OperatorMatrix position_operator(const AxisGrid& g) {
  require_label(g, AxisLabel::position, "position_operator");
  Eigen::MatrixXcd m = g.samples().cast<std::complex<double>>().asDiagonal();
  return OperatorMatrix::trusted(std::move(m), {.hermitian = true, .diagonal = true});
}

OperatorMatrix momentum_operator(const AxisGrid& g, const PhysicalConstants& k) {
  require_label(g, AxisLabel::position, "momentum_operator");
  return spectral_operator(g, k.hbar * g.frequencies());
}

OperatorMatrix momentum_squared_operator(const AxisGrid& g, const PhysicalConstants& k) {
  require_label(g, AxisLabel::position, "momentum_squared_operator");
  return spectral_operator(g, (k.hbar * g.frequencies()).array().square().matrix());
}

OperatorMatrix time_operator(const AxisGrid& g) {
  require_label(g, AxisLabel::time, "time_operator");
  Eigen::MatrixXcd m = g.samples().cast<std::complex<double>>().asDiagonal();
  return OperatorMatrix::trusted(std::move(m), {.hermitian = true, .diagonal = true});
}

OperatorMatrix energy_operator(const AxisGrid& g, const PhysicalConstants& k) {
  require_label(g, AxisLabel::time, "energy_operator");
  return spectral_operator(g, energy_lattice(g, k));
}

Eigen::VectorXd energy_lattice(const AxisGrid& g, const PhysicalConstants& k) {
  return -k.hbar * g.frequencies();
}

double lattice_offset(const AxisGrid& g, double energy, const PhysicalConstants& k) {
  const double step = kTwoPi * k.hbar / g.period();
  const double r = energy / step;
  return std::abs(r - std::round(r));
}

EnergyEigenvector energy_eigenvector(const AxisGrid& g, double energy, const PhysicalConstants& k) {
  require_label(g, AxisLabel::time, "energy_eigenvector");
  const double band = k.hbar * std::numbers::pi / g.spacing;
  if (!std::isfinite(energy) || std::abs(energy) > band * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "energy " << energy << " outside the representable band |E| <= " << band;
    throw Error(Errc::out_of_band, msg.str());
  }
  EnergyEigenvector out;
  out.state.resize(g.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.n));
  for (Index j = 0; j < g.n; ++j)
    out.state(j) = scale * std::exp(std::complex<double>(0.0, -energy * g.sample(j) / k.hbar));
  out.on_lattice = lattice_offset(g, energy, k) <= kLatticeTolerance;
  if (!out.on_lattice) {
    std::ostringstream msg;
    msg << "energy " << energy << " is off the Fourier lattice (spacing " << kTwoPi * k.hbar / g.period()
        << "); the sampled vector is not an exact energy eigenvector";
    out.warning = msg.str();
  }
  return out;
}

Eigen::VectorXcd grid_delta(const AxisGrid& g, Index j) {
  if (j < 0 || j >= g.n) throw Error(Errc::out_of_range, "grid_delta: sample index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(g.n);
  v(j) = 1.0;
  return v;
}

Eigen::VectorXcd gaussian_state(const AxisGrid& g, double center, double sigma, double wavenumber) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "gaussian_state: sigma must be positive");
  Eigen::VectorXcd v(g.n);
  for (Index j = 0; j < g.n; ++j) {
    const double x = g.sample(j) - center;
    v(j) = std::exp(-x * x / (4.0 * sigma * sigma)) * std::exp(std::complex<double>(0.0, wavenumber * g.sample(j)));
  }
  return v / v.norm();
}

OperatorMatrix lift_system(const OperatorMatrix& a, Index n_t) {
  return kron(a, OperatorMatrix::identity(n_t));
}

OperatorMatrix lift_time(const OperatorMatrix& b, Index n_q) {
  return kron(OperatorMatrix::identity(n_q), b);
}

}  // namespace chronos
