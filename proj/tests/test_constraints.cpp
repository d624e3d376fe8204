#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "check_error.hpp"
#include "chronos/constraints.hpp"
#include "oracles.hpp"

using namespace chronos;
using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

const PhysicalConstants unit;

// Small grids keep dense solves quick: levels 0..3 of the oscillator lie on
// the energy lattice of the 16-sample aligned time grid.
const AxisGrid small_q = make_axis(32, -8.0, 0.5, AxisLabel::position);
const AxisGrid small_t = energy_aligned_time_grid(unit, 16);
const ModelSpec small_model = make_model(ModelKind::oscillator, unit, small_q);

const ModelSpec default_model = make_model(ModelKind::oscillator, unit, default_position_grid(unit));

MatrixXcd first_matrix(const MatrixXcd& h, const AxisGrid& tg) {
  const MatrixXcd s = energy_operator(tg, unit).matrix();
  return oracle::kron(MatrixXcd::Identity(h.rows(), h.rows()), s) - oracle::kron(h, MatrixXcd::Identity(tg.n, tg.n));
}

CompositeState random_state(Index n_q, Index n_t, std::mt19937& rng) {
  return CompositeState::normalized(n_q, n_t, oracle::random_vector(n_q * n_t, rng));
}

}  // namespace

TEST_CASE("constraint operators are Hermitian and apply factor by factor") {
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const auto d = ConstraintOperator::first(h, small_t, unit);
  CHECK(d.kind() == ConstraintKind::first);
  CHECK(d.dim() == 512);
  const MatrixXcd ref = first_matrix(h.matrix(), small_t);
  CHECK(oracle::max_abs(d.materialize().matrix() - ref) <= 1e-12 * max_norm(ref));
  CHECK(hermiticity_defect(ref) <= 1e-12 * max_norm(ref));
  std::mt19937 rng(31);
  const VectorXcd x = oracle::random_vector(512, rng);
  CHECK((d.apply(x) - ref * x).norm() <= 1e-12 * (ref * x).norm() * 10);

  const OperatorMatrix g = oscillator_G(small_model);
  const auto d2 = ConstraintOperator::second(g, small_t);
  const MatrixXcd ref2 = oracle::kron(MatrixXcd::Identity(32, 32), time_operator(small_t).matrix()) -
                         oracle::kron(g.matrix(), MatrixXcd::Identity(16, 16));
  CHECK(oracle::max_abs(d2.materialize().matrix() - ref2) <= 1e-12 * max_norm(ref2));
  CHECK_ERRC(ConstraintOperator::first(h, small_q, unit), Errc::wrong_axis);
}

TEST_CASE("separable first-equation solutions") {
  const OperatorMatrix h = harmonic_hamiltonian(default_model);
  const auto es = eig_hermitian(h);
  const AxisGrid tg = energy_aligned_time_grid(unit);

  const auto ground = separable_first(es.values(0), es.vectors.col(0), tg, unit);
  CHECK(ground.on_lattice);
  CHECK(std::abs(ground.state.norm() - 1.0) <= 1e-12);
  CHECK(first_constraint_residual(ground.state, h, tg, unit) <= 1e-6);

  const auto off = separable_first(0.7, es.vectors.col(0), tg, unit);
  CHECK_FALSE(off.on_lattice);
  CHECK(off.warning.has_value());
  CHECK(first_constraint_residual(off.state, h, tg, unit) > 1e-3);

  // psi_E (x) |E'> with a different lattice energy E'.
  for (double e_prime : {1.5, -2.0, 6.0}) {
    const auto wrong = CompositeState::separable(es.vectors.col(0), energy_eigenvector(tg, e_prime, unit).state);
    CHECK(std::abs(first_constraint_residual(wrong, h, tg, unit) - std::abs(e_prime - es.values(0))) <= 1e-8);
  }

  std::mt19937 rng(32);
  CHECK(first_constraint_residual(random_state(128, 32, rng), h, tg, unit) > 0.0);
  CHECK_ERRC(separable_first(100.0, es.vectors.col(0), tg, unit), Errc::out_of_band);
  CHECK_ERRC(first_constraint_residual(random_state(4, 32, rng), h, tg, unit), Errc::dimension_mismatch);
}

TEST_CASE("separable second-equation solutions") {
  const OperatorMatrix g = oscillator_G(default_model);
  const auto es = eig_hermitian(g);
  const AxisGrid tg = time_aligned_time_grid(unit);

  const auto ground = separable_second(es.values(0), es.vectors.col(0), tg);
  CHECK(ground.sample == 0);
  CHECK(ground.rounding_distance <= 1e-8);
  CHECK(std::abs(ground.state.norm() - 1.0) <= 1e-12);
  CHECK(second_constraint_residual(ground.state, g, tg) <= 1e-8);

  // psi_t (x) (delta at another sample t').
  for (Index j : {3, 10}) {
    const auto wrong = CompositeState::separable(es.vectors.col(0), grid_delta(tg, j));
    CHECK(std::abs(second_constraint_residual(wrong, g, tg) - std::abs(tg.sample(j) - es.values(0))) <= 1e-8);
  }

  std::mt19937 rng(33);
  CHECK(second_constraint_residual(random_state(128, 32, rng), g, tg) > 0.0);
  CHECK_ERRC(separable_second(-3.0, es.vectors.col(0), tg), Errc::out_of_range);
  CHECK_ERRC(separable_second(tg.sample(tg.n - 1) + 0.6 * tg.spacing, es.vectors.col(0), tg), Errc::out_of_range);
}

TEST_CASE("free-particle modes with off-grid times") {
  const ModelSpec fp = make_model(ModelKind::free_particle, unit, default_position_grid(unit));
  const OperatorMatrix g = free_particle_G(fp);
  const auto es = eig_hermitian(g);
  const AxisGrid tg = make_axis(64, 0.0, 0.3, AxisLabel::time);
  for (Index n : {0, 1, 2, 5, 9}) {
    const auto sep = separable_second(es.values(n), es.vectors.col(n), tg);
    CHECK(sep.rounding_distance <= 0.5 * tg.spacing + 1e-12);
    CHECK(second_constraint_residual(sep.state, g, tg) <= sep.rounding_distance + 1e-8);
  }
}

TEST_CASE("physical subspace of the first equation, dense route") {
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const auto d = ConstraintOperator::first(h, small_t, unit);
  const double tol = 1e-6;
  const SubspaceBasis basis = physical_subspace(d, tol);

  const auto es = eig_hermitian(h);
  const Index matched = count_matched_pairs(es.values, energy_lattice(small_t, unit), tol);
  CHECK(matched == 4);
  CHECK(basis.dimension() == matched);
  CHECK(basis.dimension() == oracle::gram_null_count(first_matrix(h.matrix(), small_t), tol));

  CHECK(oracle::max_abs(basis.vectors.adjoint() * basis.vectors - MatrixXcd::Identity(4, 4)) <= 1e-10);
  for (Index c = 0; c < basis.dimension(); ++c) {
    CHECK(basis.residuals[static_cast<std::size_t>(c)] <= 2.0 * tol);
    CHECK(d.residual(basis.state(c)) <= 2.0 * tol);
    CHECK(std::abs(basis.labels[static_cast<std::size_t>(c)] - (static_cast<double>(c) + 0.5)) <= 1e-6);
    CHECK(basis.multiplet[static_cast<std::size_t>(c)] == c);
  }

  const MatrixXcd p = basis.projector();
  CHECK(oracle::max_abs(p * p - p) <= 1e-9);
  CHECK(hermiticity_defect(p) <= 1e-12);
  for (Index n = 0; n < 4; ++n) {
    const auto sep = separable_first(es.values(n), es.vectors.col(n), small_t, unit);
    CHECK((sep.state.amplitudes() - p * sep.state.amplitudes()).norm() <= 1e-6);
  }
}

TEST_CASE("physical subspace of the first equation, factored route") {
  const OperatorMatrix h = harmonic_hamiltonian(default_model);
  const AxisGrid tg = energy_aligned_time_grid(unit);
  const auto d = ConstraintOperator::first(h, tg, unit);
  REQUIRE(d.dim() > kDenseCompositeLimit);
  const SubspaceBasis basis = physical_subspace(d, 1e-6);
  CHECK(basis.dimension() == 8);
  const auto es = eig_hermitian(h);
  for (Index c = 0; c < basis.dimension(); ++c) {
    CHECK(d.residual(basis.state(c)) <= 2e-6);
    CHECK(std::abs(basis.labels[static_cast<std::size_t>(c)] - es.values(c)) <= 1e-12);
  }
  CHECK(oracle::max_abs(basis.vectors.adjoint() * basis.vectors - MatrixXcd::Identity(8, 8)) <= 1e-10);
}

TEST_CASE("detuned time grid leaves no physical states") {
  const AxisGrid detuned = make_axis(16, 0.0, 4.0 * std::numbers::pi * 1.1 / 16.0, AxisLabel::time);
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const auto d = ConstraintOperator::first(h, detuned, unit);
  CHECK(physical_subspace(d, 1e-6).dimension() == 0);
  CHECK(oracle::gram_null_count(first_matrix(h.matrix(), detuned), 1e-6) == 0);

  const AxisGrid wide_detuned = make_axis(32, 0.0, 4.0 * std::numbers::pi * 1.1 / 32.0, AxisLabel::time);
  const auto big = ConstraintOperator::first(harmonic_hamiltonian(default_model), wide_detuned, unit);
  CHECK(physical_subspace(big, 1e-6).dimension() == 0);
}

TEST_CASE("physical subspace of the second equation") {
  const OperatorMatrix g = oscillator_G(small_model);
  const AxisGrid tg = time_aligned_time_grid(unit, 8);
  const auto d = ConstraintOperator::second(g, tg);
  const SubspaceBasis basis = physical_subspace(d, 1e-6);
  const auto es = eig_hermitian(g);
  const Index matched = count_matched_pairs(es.values, tg.samples(), 1e-6);
  CHECK(matched >= 4);
  CHECK(basis.dimension() == matched);
  for (Index c = 0; c < basis.dimension(); ++c) CHECK(d.residual(basis.state(c)) <= 2e-6);
}

TEST_CASE("generalized equation reduces to the dedicated ones") {
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const OperatorMatrix g = oscillator_G(small_model);
  const OperatorMatrix fh = lift_system(h, small_t.n);
  const OperatorMatrix fg = lift_system(g, small_t.n);
  std::mt19937 rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const CompositeState s = random_state(small_q.n, small_t.n, rng);
    CHECK(std::abs(generalized_residual(s, 1.0, 0.0, fh, small_t, unit) -
                   first_constraint_residual(s, h, small_t, unit)) <= 1e-12);
    CHECK(std::abs(generalized_residual(s, 0.0, 1.0, fg, small_t, unit) -
                   second_constraint_residual(s, g, small_t)) <= 1e-12);
  }

  const OperatorMatrix both(MatrixXcd(fh.matrix() + fg.matrix()), {.hermitian = true});
  const auto es = eig_hermitian(h);
  for (Index n = 0; n < 4; ++n) {
    const CompositeState s = separable_first(es.values(n), es.vectors.col(n), small_t, unit).state;
    const double sum = first_constraint_residual(s, h, small_t, unit) + second_constraint_residual(s, g, small_t);
    CHECK(generalized_residual(s, 1.0, 1.0, both, small_t, unit) <= sum + 1e-12);
  }

  MatrixXcd skew = fh.matrix();
  skew(0, 1) += 1.0;
  CHECK_ERRC(generalized_residual(random_state(small_q.n, small_t.n, rng), 1.0, 0.0,
                                  OperatorMatrix::trusted(skew, {}), small_t, unit),
             Errc::not_hermitian);
  CHECK_ERRC(generalized_residual(random_state(small_q.n, small_t.n, rng), 1.0, 0.0, lift_system(h, 4), small_t, unit),
             Errc::dimension_mismatch);
}

TEST_CASE("generalized_solve reproduces the dedicated subspaces") {
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const SubspaceBasis a = generalized_solve(1.0, 0.0, lift_system(h, small_t.n), small_t, unit, 1e-6);
  const SubspaceBasis b = physical_subspace(ConstraintOperator::first(h, small_t, unit), 1e-6);
  CHECK_FALSE(a.labeled());
  REQUIRE(a.dimension() == b.dimension());
  CHECK(oracle::max_abs(a.projector() - b.projector()) <= 1e-8);

  const AxisGrid tg2 = time_aligned_time_grid(unit, 8);
  const OperatorMatrix g = oscillator_G(small_model);
  const SubspaceBasis c = generalized_solve(0.0, 1.0, lift_system(g, tg2.n), tg2, unit, 1e-6);
  const SubspaceBasis e = physical_subspace(ConstraintOperator::second(g, tg2), 1e-6);
  REQUIRE(c.dimension() == e.dimension());
  CHECK(oracle::max_abs(c.projector() - e.projector()) <= 1e-8);

  const AxisGrid detuned = make_axis(16, 0.0, 4.0 * std::numbers::pi * 1.1 / 16.0, AxisLabel::time);
  CHECK(generalized_solve(1.0, 0.0, lift_system(h, 16), detuned, unit, 1e-6).dimension() == 0);

  // Threshold nesting.
  const SubspaceBasis loose = generalized_solve(1.0, 0.0, lift_system(h, small_t.n), small_t, unit, 0.3);
  CHECK(loose.dimension() >= a.dimension());
  const MatrixXcd p_loose = loose.projector();
  for (Index k = 0; k < a.dimension(); ++k)
    CHECK((a.vectors.col(k) - p_loose * a.vectors.col(k)).norm() <= 1e-8);
}

TEST_CASE("count_matched_pairs") {
  Eigen::VectorXd a(3), b(4);
  a << 0.5, 1.5, 2.5;
  b << -1.0, 0.5, 1.5000001, 7.0;
  CHECK(count_matched_pairs(a, b, 1e-6) == 2);
  CHECK(count_matched_pairs(a, b, 1e-8) == 1);
}

TEST_CASE("measurement probabilities") {
  const OperatorMatrix h = harmonic_hamiltonian(small_model);
  const SubspaceBasis basis = physical_subspace(ConstraintOperator::first(h, small_t, unit), 1e-6);
  REQUIRE(basis.dimension() == 4);

  const Measurement m0 = measurement_probabilities(basis.state(0), basis);
  CHECK(std::abs(m0.outcomes[0].probability - 1.0) <= 1e-12);
  for (std::size_t k = 1; k < 4; ++k) CHECK(m0.outcomes[k].probability <= 1e-24);
  CHECK(m0.outcomes[0].label == doctest::Approx(0.5).epsilon(1e-6));

  const VectorXcd mix = (basis.vectors.col(0) + basis.vectors.col(1)) / std::sqrt(2.0);
  const Measurement m01 = measurement_probabilities(CompositeState::normalized(32, 16, mix), basis);
  CHECK(std::abs(m01.outcomes[0].probability - 0.5) <= 1e-12);
  CHECK(std::abs(m01.outcomes[1].probability - 0.5) <= 1e-12);

  std::mt19937 rng(35);
  const CompositeState r = random_state(32, 16, rng);
  const Measurement mr = measurement_probabilities(r, basis);
  double total = 0.0;
  for (const auto& o : mr.outcomes) {
    CHECK(o.probability >= 0.0);
    total += o.probability;
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(mr.subspace_weight > 0.0);
  CHECK(mr.subspace_weight < 1.0);

  const CompositeState rotated =
      CompositeState::normalized(32, 16, VectorXcd(std::polar(1.0, 1.234) * r.amplitudes()));
  const Measurement mrot = measurement_probabilities(rotated, basis);
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(std::abs(mrot.outcomes[k].probability - mr.outcomes[k].probability) <= 1e-14);

  // A state orthogonal to the subspace.
  VectorXcd orth = oracle::random_vector(512, rng);
  orth -= basis.projector() * orth;
  CHECK_ERRC(measurement_probabilities(CompositeState::normalized(32, 16, orth), basis), Errc::zero_overlap);

  SubspaceBasis empty = basis;
  empty.vectors.resize(512, 0);
  CHECK_ERRC(measurement_probabilities(r, empty), Errc::empty_basis);
}

TEST_CASE("uncertainty products") {
  const AxisGrid tg = wide_time_grid(unit);
  const double center = 0.5 * tg.period();

  const Uncertainty u1 = uncertainty_product(gaussian_state(tg, center, 1.0), tg, unit);
  CHECK(std::abs(u1.product - 0.5) <= 0.005);

  const Uncertainty u2 = uncertainty_product(gaussian_state(tg, center, 2.0), tg, unit);
  CHECK(std::abs(u2.delta_t - 2.0) <= 0.02);
  CHECK(u2.product >= 0.49 * unit.hbar);

  // Quadrature oracle for the spread in t.
  const VectorXcd phi = gaussian_state(tg, center, 1.5);
  const Eigen::VectorXd density = phi.cwiseAbs2() / oracle::periodic_sum(phi.cwiseAbs2(), tg.spacing);
  const Eigen::VectorXd t = tg.samples();
  const double mean = oracle::periodic_sum(density.cwiseProduct(t), tg.spacing);
  const double var =
      oracle::periodic_sum(density.cwiseProduct((t.array() - mean).square().matrix()), tg.spacing);
  CHECK(std::abs(uncertainty_product(phi, tg, unit).delta_t - std::sqrt(var)) <= 1e-12);

  const double e = energy_lattice(tg, unit)(70);
  CHECK(uncertainty_product(energy_eigenvector(tg, e, unit).state, tg, unit).delta_s <= 1e-8);

  std::mt19937 rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> sigma(4.0 * tg.spacing, tg.period() / 16.0);
    std::uniform_real_distribution<double> kick(-2.0, 2.0);
    const VectorXcd g = gaussian_state(tg, center, sigma(rng), kick(rng));
    CHECK(uncertainty_product(g, tg, unit).product >= 0.49 * unit.hbar);
  }
}
