#include "chronos/models.hpp"

#include <algorithm>
#include <cmath>

namespace chronos {

namespace {

void require_kind(const ModelSpec& m, ModelKind kind, const char* op) {
  if (m.kind != kind)
    throw Error(Errc::wrong_kind, std::string(op) + ": model kind is " +
                                      (m.kind == ModelKind::oscillator ? "oscillator" : "free_particle"));
}

OperatorMatrix scaled(const OperatorMatrix& a, double factor) {
  return OperatorMatrix::trusted(factor * a.matrix(), {.hermitian = a.is_hermitian(), .diagonal = a.is_diagonal()});
}

}  // namespace

ModelSpec make_model(ModelKind kind, const PhysicalConstants& k, const AxisGrid& position_grid) {
  validate(k);
  if (position_grid.label != AxisLabel::position)
    throw Error(Errc::wrong_axis, "model grid must be a position grid");
  return {kind, k, position_grid};
}

OperatorMatrix harmonic_hamiltonian(const ModelSpec& m) {
  require_kind(m, ModelKind::oscillator, "harmonic_hamiltonian");
  const auto& k = m.constants;
  const Eigen::VectorXd q = m.grid.samples();
  Eigen::MatrixXcd h = momentum_squared_operator(m.grid, k).matrix() / (2.0 * k.mass);
  h.diagonal().array() += 0.5 * k.mass * k.omega * k.omega * q.array().square();
  return OperatorMatrix::trusted(std::move(h), {.hermitian = true});
}

OperatorMatrix free_hamiltonian(const ModelSpec& m) {
  require_kind(m, ModelKind::free_particle, "free_hamiltonian");
  return scaled(momentum_squared_operator(m.grid, m.constants), 1.0 / (2.0 * m.constants.mass));
}

OperatorMatrix hamiltonian(const ModelSpec& m) {
  return m.kind == ModelKind::oscillator ? harmonic_hamiltonian(m) : free_hamiltonian(m);
}

OperatorMatrix oscillator_G(const ModelSpec& m) {
  require_kind(m, ModelKind::oscillator, "oscillator_G");
  const auto& k = m.constants;
  return scaled(harmonic_hamiltonian(m), k.hbar / (k.mass * k.mass * std::pow(k.c, 4)));
}

OperatorMatrix free_particle_G(const ModelSpec& m) {
  require_kind(m, ModelKind::free_particle, "free_particle_G");
  const auto& k = m.constants;
  return scaled(momentum_squared_operator(m.grid, k), k.hbar / (std::pow(k.mass, 3) * std::pow(k.c, 4)));
}

OperatorMatrix time_generator(const ModelSpec& m) {
  return m.kind == ModelKind::oscillator ? oscillator_G(m) : free_particle_G(m);
}

double predicted_tn(Index n, const PhysicalConstants& k) {
  return k.time_quantum() * (static_cast<double>(n) + 0.5);
}

Eigen::VectorXd predicted_free_times(const AxisGrid& grid, const PhysicalConstants& k) {
  const double scale = k.hbar / (std::pow(k.mass, 3) * std::pow(k.c, 4));
  Eigen::VectorXd p = k.hbar * grid.frequencies();
  Eigen::VectorXd t = scale * p.array().square().matrix();
  std::sort(t.data(), t.data() + t.size());
  return t;
}

LadderPair ladder_operators(const ModelSpec& m, const EigenSystemXcd& levels_of_h, Index levels) {
  require_kind(m, ModelKind::oscillator, "ladder_operators");
  if (levels < 2) throw Error(Errc::invalid_argument, "ladder_operators: need at least 2 levels");
  if (levels > levels_of_h.size()) throw Error(Errc::index_out_of_range, "ladder_operators: not enough eigenpairs");
  if (levels_of_h.vectors.rows() != m.grid.n)
    throw Error(Errc::dimension_mismatch, "ladder_operators: eigenvectors do not match the model grid");

  // Eigenbasis matrix of a: A(n-1, n) = sqrt(n).
  Eigen::MatrixXcd lower_eig = Eigen::MatrixXcd::Zero(levels, levels);
  for (Index n = 1; n < levels; ++n) lower_eig(n - 1, n) = std::sqrt(static_cast<double>(n));

  const Eigen::MatrixXcd v = levels_of_h.vectors.leftCols(levels);
  Eigen::MatrixXcd a = v * lower_eig * v.adjoint();
  Eigen::MatrixXcd a_dag = a.adjoint();
  return {OperatorMatrix::trusted(std::move(a), {}), OperatorMatrix::trusted(std::move(a_dag), {}), levels};
}

}  // namespace chronos
