#include "chronos/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace chronos {

namespace {

void require_state_dims(const CompositeState& s, Index n_q, Index n_t, const char* op) {
  if (s.n_q() != n_q || s.n_t() != n_t) {
    std::ostringstream msg;
    msg << op << ": state is " << s.n_q() << "x" << s.n_t() << ", operator expects " << n_q << "x" << n_t;
    throw Error(Errc::dimension_mismatch, msg.str());
  }
}

// Throws NotHermitian when an unflagged operator fails the check.
OperatorMatrix require_hermitian(const OperatorMatrix& a) {
  if (a.is_hermitian()) return a;
  return OperatorMatrix(a.matrix(), {.hermitian = true});
}

/// Groups consecutive labels closer than the multiplet gap.
std::vector<Index> multiplet_ids(const std::vector<double>& labels) {
  std::vector<Index> ids(labels.size());
  Index id = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k > 0 && std::abs(labels[k] - labels[k - 1]) >= kMultipletGap) ++id;
    ids[k] = id;
  }
  return ids;
}

void finish_basis(SubspaceBasis& basis, const ConstraintOperator& d) {
  basis.residuals.resize(static_cast<std::size_t>(basis.dimension()));
  for (Index c = 0; c < basis.dimension(); ++c) {
    const double r = d.apply(basis.vectors.col(c)).norm();
    basis.residuals[static_cast<std::size_t>(c)] = r;
    if (r > 2.0 * basis.tol) {
      std::ostringstream msg;
      msg << "physical_subspace: basis vector " << c << " has residual " << r << " > 2 * tol";
      throw Error(Errc::no_convergence, msg.str());
    }
  }
}

/// Rotates a kernel basis to diagonalize the lifted system operator inside
/// it; the Rayleigh values become the labels.
void label_dense_kernel(SubspaceBasis& basis, const ConstraintOperator& d) {
  const Index m = basis.dimension();
  if (m == 0) return;
  Eigen::MatrixXcd lifted(basis.vectors.rows(), m);
  for (Index c = 0; c < m; ++c) lifted.col(c) = apply_outer(d.system_part().matrix(), d.n_t(), basis.vectors.col(c));
  Eigen::MatrixXcd compressed = basis.vectors.adjoint() * lifted;
  compressed = (0.5 * (compressed + compressed.adjoint())).eval();
  const auto es = eig_hermitian(OperatorMatrix::trusted(std::move(compressed), {.hermitian = true}));
  basis.vectors = (basis.vectors * es.vectors).eval();
  detail::canonicalize_phases(basis.vectors);
  basis.labels.assign(es.values.data(), es.values.data() + es.size());
  basis.multiplet = multiplet_ids(basis.labels);
}

/// Kernel of I (x) T - S (x) I from the factor spectra: v_n (x) w_k for
/// every pair with |b_k - a_n| <= tol.
SubspaceBasis kronecker_sum_kernel(const ConstraintOperator& d, double tol) {
  const auto sys = eig_hermitian(d.system_part());
  const auto tim = eig_hermitian(d.time_part());
  struct Pair {
    Index n, k;
  };
  std::vector<Pair> pairs;
  for (Index n = 0; n < sys.size(); ++n)
    for (Index k = 0; k < tim.size(); ++k)
      if (std::abs(tim.values(k) - sys.values(n)) <= tol) pairs.push_back({n, k});

  SubspaceBasis basis;
  basis.tol = tol;
  basis.n_q = d.n_q();
  basis.n_t = d.n_t();
  basis.vectors.resize(d.dim(), static_cast<Index>(pairs.size()));
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    basis.vectors.col(static_cast<Index>(c)) = kron(sys.vectors.col(pairs[c].n), tim.vectors.col(pairs[c].k));
    basis.labels.push_back(sys.values(pairs[c].n));
  }
  detail::canonicalize_phases(basis.vectors);
  basis.multiplet = multiplet_ids(basis.labels);
  return basis;
}

SubspaceBasis dense_kernel(const ConstraintOperator& d, double tol) {
  const auto null = near_null_space(d.materialize(), tol);
  SubspaceBasis basis;
  basis.tol = tol;
  basis.n_q = d.n_q();
  basis.n_t = d.n_t();
  basis.vectors = null.basis;
  return basis;
}

}  // namespace

// ---------------------------------------------------------------------------

ConstraintOperator ConstraintOperator::first(const OperatorMatrix& h, const AxisGrid& time_grid,
                                             const PhysicalConstants& k) {
  ConstraintOperator d;
  d.kind_ = ConstraintKind::first;
  d.c_s_ = 1.0;
  d.c_t_ = 0.0;
  d.system_ = require_hermitian(h);
  d.time_ = energy_operator(time_grid, k);
  d.time_grid_ = time_grid;
  d.n_q_ = h.dim();
  d.n_t_ = time_grid.n;
  return d;
}

ConstraintOperator ConstraintOperator::second(const OperatorMatrix& g, const AxisGrid& time_grid) {
  ConstraintOperator d;
  d.kind_ = ConstraintKind::second;
  d.c_s_ = 0.0;
  d.c_t_ = 1.0;
  d.system_ = require_hermitian(g);
  d.time_ = time_operator(time_grid);
  d.time_grid_ = time_grid;
  d.n_q_ = g.dim();
  d.n_t_ = time_grid.n;
  return d;
}

ConstraintOperator ConstraintOperator::generalized(double c_s, double c_t, const OperatorMatrix& f,
                                                   const AxisGrid& time_grid, const PhysicalConstants& k) {
  if (!std::isfinite(c_s) || !std::isfinite(c_t))
    throw Error(Errc::invalid_argument, "generalized constraint: c_s and c_t must be finite");
  if (time_grid.n <= 0 || f.dim() % time_grid.n != 0)
    throw Error(Errc::dimension_mismatch, "generalized constraint: F dimension is not a multiple of n_t");
  ConstraintOperator d;
  d.kind_ = ConstraintKind::generalized;
  d.c_s_ = c_s;
  d.c_t_ = c_t;
  d.composite_ = require_hermitian(f);
  const OperatorMatrix s = energy_operator(time_grid, k);
  const OperatorMatrix t = time_operator(time_grid);
  d.time_ = OperatorMatrix::trusted(c_s * s.matrix() + c_t * t.matrix(), {.hermitian = true});
  d.time_grid_ = time_grid;
  d.n_t_ = time_grid.n;
  d.n_q_ = f.dim() / time_grid.n;
  return d;
}

Eigen::VectorXcd ConstraintOperator::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != dim()) throw Error(Errc::dimension_mismatch, "constraint apply: vector length mismatch");
  Eigen::VectorXcd out = apply_inner(n_q_, time_.matrix(), x);
  if (kind_ == ConstraintKind::generalized)
    out -= composite_.matrix() * x;
  else
    out -= apply_outer(system_.matrix(), n_t_, x);
  return out;
}

double ConstraintOperator::residual(const CompositeState& s) const {
  require_state_dims(s, n_q_, n_t_, "constraint residual");
  const double nrm = s.norm();
  if (!(nrm > 0.0)) throw Error(Errc::zero_overlap, "constraint residual of a zero state");
  return apply(s.amplitudes()).norm() / nrm;
}

OperatorMatrix ConstraintOperator::materialize() const {
  Eigen::MatrixXcd m = lift_time(time_, n_q_).matrix();
  if (kind_ == ConstraintKind::generalized)
    m -= composite_.matrix();
  else
    m -= lift_system(system_, n_t_).matrix();
  return OperatorMatrix::trusted(std::move(m), {.hermitian = true});
}

// ---------------------------------------------------------------------------

CompositeState SubspaceBasis::state(Index k) const {
  if (k < 0 || k >= dimension()) throw Error(Errc::index_out_of_range, "subspace basis index out of range");
  return CompositeState::normalized(n_q, n_t, vectors.col(k));
}

Eigen::MatrixXcd SubspaceBasis::projector() const { return vectors * vectors.adjoint(); }

SeparableFirst separable_first(double energy, const Eigen::VectorXcd& psi, const AxisGrid& time_grid,
                               const PhysicalConstants& k) {
  auto ev = energy_eigenvector(time_grid, energy, k);
  return {CompositeState::separable(psi, ev.state), ev.on_lattice, std::move(ev.warning)};
}

double first_constraint_residual(const CompositeState& s, const OperatorMatrix& h, const AxisGrid& time_grid,
                                 const PhysicalConstants& k) {
  require_state_dims(s, h.dim(), time_grid.n, "first_constraint_residual");
  return ConstraintOperator::first(h, time_grid, k).residual(s);
}

SeparableSecond separable_second(double time, const Eigen::VectorXcd& psi, const AxisGrid& time_grid) {
  if (time_grid.label != AxisLabel::time) throw Error(Errc::wrong_axis, "separable_second: expected a time grid");
  const double first = time_grid.sample(0);
  const double last = time_grid.sample(time_grid.n - 1);
  const double half = 0.5 * time_grid.spacing;
  if (!std::isfinite(time) || time < first - half || time > last + half) {
    std::ostringstream msg;
    msg << "time " << time << " outside the grid range [" << first << ", " << last << "]";
    throw Error(Errc::out_of_range, msg.str());
  }
  const auto j = std::clamp<Index>(static_cast<Index>(std::llround((time - first) / time_grid.spacing)), 0,
                                   time_grid.n - 1);
  return {CompositeState::separable(psi, grid_delta(time_grid, j)), j, std::abs(time - time_grid.sample(j))};
}

double second_constraint_residual(const CompositeState& s, const OperatorMatrix& g, const AxisGrid& time_grid) {
  require_state_dims(s, g.dim(), time_grid.n, "second_constraint_residual");
  return ConstraintOperator::second(g, time_grid).residual(s);
}

SubspaceBasis physical_subspace(const ConstraintOperator& d, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::invalid_argument, "physical_subspace: tol must be positive");
  SubspaceBasis basis;
  if (d.kind() == ConstraintKind::generalized) {
    basis = dense_kernel(d, tol);
  } else if (d.dim() > kDenseCompositeLimit) {
    basis = kronecker_sum_kernel(d, tol);
  } else {
    basis = dense_kernel(d, tol);
    label_dense_kernel(basis, d);
  }
  finish_basis(basis, d);
  return basis;
}

double generalized_residual(const CompositeState& s, double c_s, double c_t, const OperatorMatrix& f,
                            const AxisGrid& time_grid, const PhysicalConstants& k) {
  if (f.dim() != s.size()) throw Error(Errc::dimension_mismatch, "generalized_residual: F does not match the state");
  return ConstraintOperator::generalized(c_s, c_t, f, time_grid, k).residual(s);
}

SubspaceBasis generalized_solve(double c_s, double c_t, const OperatorMatrix& f, const AxisGrid& time_grid,
                                const PhysicalConstants& k, double tol) {
  return physical_subspace(ConstraintOperator::generalized(c_s, c_t, f, time_grid, k), tol);
}

Index count_matched_pairs(const Eigen::VectorXd& system_values, const Eigen::VectorXd& time_values, double tol) {
  Index count = 0;
  for (Index n = 0; n < system_values.size(); ++n)
    for (Index k = 0; k < time_values.size(); ++k)
      if (std::abs(time_values(k) - system_values(n)) <= tol) ++count;
  return count;
}

Measurement measurement_probabilities(const CompositeState& s, const SubspaceBasis& basis) {
  if (basis.dimension() == 0) throw Error(Errc::empty_basis, "measurement_probabilities: empty basis");
  if (s.size() != basis.vectors.rows())
    throw Error(Errc::dimension_mismatch, "measurement_probabilities: state does not match basis");
  const Eigen::VectorXcd amps = basis.vectors.adjoint() * s.amplitudes();
  const double norm2 = s.amplitudes().squaredNorm();
  Measurement out;
  out.subspace_weight = amps.squaredNorm() / norm2;
  if (out.subspace_weight < 1e-14)
    throw Error(Errc::zero_overlap, "measurement_probabilities: state has no weight in the subspace");
  const double total = amps.squaredNorm();
  for (Index c = 0; c < basis.dimension(); ++c) {
    Outcome o;
    o.index = c;
    o.label = basis.labeled() ? basis.labels[static_cast<std::size_t>(c)] : std::numeric_limits<double>::quiet_NaN();
    o.probability = std::norm(amps(c)) / total;
    out.outcomes.push_back(o);
  }
  return out;
}

Uncertainty uncertainty_product(const Eigen::VectorXcd& phi, const AxisGrid& time_grid, const PhysicalConstants& k) {
  if (phi.size() != time_grid.n) throw Error(Errc::dimension_mismatch, "uncertainty_product: state size mismatch");
  const double norm2 = phi.squaredNorm();
  const Eigen::VectorXd t = time_grid.samples();
  const Eigen::VectorXd density = phi.cwiseAbs2() / norm2;
  const double t_mean = density.dot(t);
  const double t_var = density.dot((t.array() - t_mean).square().matrix());

  const OperatorMatrix s = energy_operator(time_grid, k);
  const Eigen::VectorXcd s_phi = s.matrix() * phi;
  const double s_mean = std::real(phi.dot(s_phi)) / norm2;
  const double s_var = (s_phi - s_mean * phi).squaredNorm() / norm2;

  Uncertainty u;
  u.delta_t = std::sqrt(std::max(0.0, t_var));
  u.delta_s = std::sqrt(s_var);
  u.product = u.delta_t * u.delta_s;
  return u;
}

}  // namespace chronos
