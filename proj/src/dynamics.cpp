#include "chronos/dynamics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace chronos {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& reason) {
  throw Error(Errc::validation_error, field + ": " + reason);
}

void require_composite(const CompositeState& s, Index n_q, Index n_t, const char* op) {
  if (s.n_q() != n_q || s.n_t() != n_t)
    throw Error(Errc::dimension_mismatch, std::string(op) + ": state dimensions do not match the operators");
}

}  // namespace

OperatorMatrix time_translation(const AxisGrid& time_grid, const PhysicalConstants& k, double dt) {
  return unitary_exp(energy_operator(time_grid, k), dt / k.hbar);
}

OperatorMatrix energy_shift(const AxisGrid& time_grid, const PhysicalConstants& k, double d_energy) {
  if (time_grid.label != AxisLabel::time) throw Error(Errc::wrong_axis, "energy_shift: expected a time grid");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(time_grid.n, time_grid.n);
  for (Index j = 0; j < time_grid.n; ++j)
    u(j, j) = std::exp(std::complex<double>(0.0, -d_energy * time_grid.sample(j) / k.hbar));
  return OperatorMatrix(std::move(u), {.unitary = true, .diagonal = true});
}

OperatorMatrix eigen_swap_unitary(Index i, Index j, const EigenSystemXcd& levels) {
  const Index n = levels.size();
  if (i < 0 || j < 0 || i >= n || j >= n) throw Error(Errc::index_out_of_range, "eigen_swap_unitary: level out of range");
  if (i == j) throw Error(Errc::invalid_argument, "eigen_swap_unitary: i and j must differ");
  const Eigen::VectorXcd vi = levels.vectors.col(i);
  const Eigen::VectorXcd vj = levels.vectors.col(j);
  const Index dim = levels.vectors.rows();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  u -= vi * vi.adjoint() + vj * vj.adjoint();
  u += vj * vi.adjoint() + vi * vj.adjoint();
  u = (0.5 * (u + u.adjoint())).eval();
  return OperatorMatrix(std::move(u), {.hermitian = true, .unitary = true});
}

OscillatorClock make_oscillator_clock(const ModelSpec& model, const AxisGrid& time_grid, Index n_max) {
  if (model.kind != ModelKind::oscillator) throw Error(Errc::wrong_kind, "oscillator clock needs an oscillator model");
  if (time_grid.label != AxisLabel::time) throw Error(Errc::wrong_axis, "oscillator clock needs a time grid");
  OscillatorClock clock;
  clock.model = model;
  clock.time_grid = time_grid;
  clock.levels = eig_hermitian(harmonic_hamiltonian(model)).truncated(n_max);
  clock.ladder = ladder_operators(model, clock.levels, n_max);
  clock.time_quantum = model.constants.time_quantum();
  clock.forward = time_translation(time_grid, model.constants, -clock.time_quantum);
  clock.backward = time_translation(time_grid, model.constants, clock.time_quantum);
  return clock;
}

CompositeState discrete_time_state(const OscillatorClock& clock, Index n) {
  if (n < 0 || n >= clock.n_max()) throw Error(Errc::index_out_of_range, "discrete_time_state: level out of range");
  return separable_second(predicted_tn(n, clock.model.constants), clock.levels.vectors.col(n), clock.time_grid).state;
}

Index dominant_level(const CompositeState& s, const EigenSystemXcd& levels) {
  if (levels.vectors.rows() != s.n_q()) throw Error(Errc::dimension_mismatch, "dominant_level: grid size mismatch");
  // Coefficients C(n, t) = <psi_n | s(., t)>.
  const Eigen::MatrixXcd coeffs = levels.vectors.adjoint() * s.grid().transpose();
  Index best = 0;
  coeffs.rowwise().squaredNorm().maxCoeff(&best);
  return best;
}

LadderStep ladder_step_up(const CompositeState& s, const OscillatorClock& clock) {
  require_composite(s, clock.model.grid.n, clock.time_grid.n, "ladder_step_up");
  const Index n = dominant_level(s, clock.levels);
  if (n >= clock.n_max() - 1) throw Error(Errc::truncation_top, "ladder_step_up: state is at the truncation top");
  Eigen::VectorXcd out = apply_kron(clock.ladder.raise.matrix(), clock.forward.matrix(), s.amplitudes());
  const double coefficient = out.norm() / s.norm();
  return {CompositeState::unnormalized(s.n_q(), s.n_t(), std::move(out)), coefficient, n};
}

LadderStep ladder_step_down(const CompositeState& s, const OscillatorClock& clock) {
  require_composite(s, clock.model.grid.n, clock.time_grid.n, "ladder_step_down");
  const Index n = dominant_level(s, clock.levels);
  if (n == 0) return {CompositeState::unnormalized(s.n_q(), s.n_t(), Eigen::VectorXcd::Zero(s.size())), 0.0, 0};
  Eigen::VectorXcd out = apply_kron(clock.ladder.lower.matrix(), clock.backward.matrix(), s.amplitudes());
  const double coefficient = out.norm() / s.norm();
  return {CompositeState::unnormalized(s.n_q(), s.n_t(), std::move(out)), coefficient, n};
}

CompositeState energy_jump(const CompositeState& s, Index i, Index j, const EigenSystemXcd& levels,
                           const AxisGrid& time_grid, const PhysicalConstants& k) {
  require_composite(s, levels.vectors.rows(), time_grid.n, "energy_jump");
  if (i == j) throw Error(Errc::invalid_argument, "energy_jump: from and to levels must differ");
  if (i < 0 || j < 0 || i >= levels.size() || j >= levels.size())
    throw Error(Errc::index_out_of_range, "energy_jump: level out of range");
  const double e_i = levels.values(i);
  const double e_j = levels.values(j);
  for (const double e : {e_i, e_j}) {
    if (lattice_offset(time_grid, e, k) > kLatticeTolerance ||
        std::abs(e) > k.hbar * std::numbers::pi / time_grid.spacing) {
      std::ostringstream msg;
      msg << "energy_jump: energy " << e << " is not on the energy lattice of the time grid";
      throw Error(Errc::off_lattice, msg.str());
    }
  }
  const OperatorMatrix swap = eigen_swap_unitary(i, j, levels);
  const OperatorMatrix shift = energy_shift(time_grid, k, e_j - e_i);
  Eigen::VectorXcd out = apply_kron(swap.matrix(), shift.matrix(), s.amplitudes());
  return s.is_normalized() ? CompositeState::normalized(s.n_q(), s.n_t(), std::move(out))
                           : CompositeState::unnormalized(s.n_q(), s.n_t(), std::move(out));
}

// ---------------------------------------------------------------------------

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::initial: return "initial";
    case StepKind::evolve: return "evolve";
    case StepKind::jump: return "jump";
  }
  return "unknown";
}

void apply_preset(Scenario& sc, GridPreset preset) {
  sc.preset = preset;
  if (preset == GridPreset::explicit_grids) return;
  sc.q_grid = default_position_grid(sc.constants);
  sc.t_grid = preset == GridPreset::energy_aligned ? energy_aligned_time_grid(sc.constants)
                                                    : time_aligned_time_grid(sc.constants);
}

void validate_scenario(const Scenario& sc) {
  try {
    validate(sc.constants);
  } catch (const Error& e) {
    invalid("constants", e.what());
  }
  if (sc.q_grid.label != AxisLabel::position) invalid("grids.q", "must be a position grid");
  if (sc.t_grid.label != AxisLabel::time) invalid("grids.t", "must be a time grid");
  for (const auto* g : {&sc.q_grid, &sc.t_grid}) {
    const char* name = g == &sc.q_grid ? "grids.q" : "grids.t";
    if (g->n < 2) invalid(name, "needs at least 2 samples");
    if (!std::isfinite(g->origin)) invalid(name, "origin must be finite");
    if (!std::isfinite(g->spacing) || g->spacing <= 0.0) invalid(name, "spacing must be finite and positive");
  }
  const auto& tol = sc.tolerances;
  if (!std::isfinite(tol.constraint_tol) || tol.constraint_tol <= 0.0)
    invalid("tolerances.constraint_tol", "must be finite and positive");
  if (!std::isfinite(tol.eigen_tol) || tol.eigen_tol <= 0.0) invalid("tolerances.eigen_tol", "must be finite and positive");

  if (const auto* lvl = std::get_if<InitialLevel>(&sc.initial)) {
    if (lvl->level < 0 || lvl->level >= kDefaultLevels)
      invalid("initial.level", "must be in [0, " + std::to_string(kDefaultLevels) + ")");
  } else if (const auto* en = std::get_if<InitialEnergy>(&sc.initial)) {
    if (!std::isfinite(en->energy)) invalid("initial.energy", "must be finite");
  } else if (const auto* amps = std::get_if<InitialAmplitudes>(&sc.initial)) {
    if (static_cast<Index>(amps->amplitudes.size()) != sc.q_grid.n * sc.t_grid.n)
      invalid("initial.amplitudes", "length must equal n_q * n_t = " + std::to_string(sc.q_grid.n * sc.t_grid.n));
    double norm2 = 0.0;
    for (const auto& a : amps->amplitudes) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) invalid("initial.amplitudes", "entries must be finite");
      norm2 += std::norm(a);
    }
    if (!(norm2 > 0.0)) invalid("initial.amplitudes", "state must be nonzero");
  }

  bool has_jump = false;
  for (std::size_t s = 0; s < sc.steps.size(); ++s) {
    const std::string field = "steps[" + std::to_string(s) + "]";
    if (const auto* ev = std::get_if<EvolveStep>(&sc.steps[s])) {
      if (!std::isfinite(ev->duration)) invalid(field + ".evolve", "duration must be finite");
    } else {
      const auto& jp = std::get<JumpStep>(sc.steps[s]);
      has_jump = true;
      if (jp.from == jp.to) invalid(field + ".jump", "from and to levels must differ");
      if (jp.from < 0 || jp.from >= kDefaultLevels || jp.to < 0 || jp.to >= kDefaultLevels)
        invalid(field + ".jump", "levels must be in [0, " + std::to_string(kDefaultLevels) + ")");
      if (!std::isfinite(jp.at)) invalid(field + ".jump.at", "must be finite");
    }
  }
  if (!has_jump) return;

  // Jump times must belong to the spectrum of G.
  const auto g_values = eig_hermitian(time_generator(sc.model_spec())).values;
  for (std::size_t s = 0; s < sc.steps.size(); ++s) {
    const auto* jp = std::get_if<JumpStep>(&sc.steps[s]);
    if (!jp) continue;
    double nearest = g_values(0);
    for (Index k = 0; k < g_values.size(); ++k)
      if (std::abs(g_values(k) - jp->at) < std::abs(nearest - jp->at)) nearest = g_values(k);
    if (std::abs(nearest - jp->at) > tol.constraint_tol * std::max(1.0, std::abs(nearest))) {
      std::ostringstream msg;
      msg << "jump time " << jp->at << " is not in the spectrum of G (nearest eigenvalue " << nearest << ")";
      invalid("steps[" + std::to_string(s) + "].jump.at", msg.str());
    }
  }
}

namespace {

struct ScenarioContext {
  ModelSpec model;
  AxisGrid t_grid;
  PhysicalConstants k;
  OperatorMatrix q_op, p_op, h_op;
  EigenSystemXcd levels;
  ConstraintOperator first;
  SubspaceBasis physical;
  std::map<double, OperatorMatrix> translations;

  const OperatorMatrix& translation(double dt) {
    auto it = translations.find(dt);
    if (it == translations.end()) it = translations.emplace(dt, time_translation(t_grid, k, dt)).first;
    return it->second;
  }
};

TrajectoryRecord record(const ScenarioContext& ctx, const CompositeState& s, Index step, StepKind kind) {
  TrajectoryRecord r;
  r.step_index = step;
  r.kind = kind;
  const Eigen::VectorXcd& x = s.amplitudes();
  const double norm2 = x.squaredNorm();
  const Index n_t = ctx.t_grid.n;
  r.q_mean = std::real(x.dot(apply_outer(ctx.q_op.matrix(), n_t, x))) / norm2;
  r.p_mean = std::real(x.dot(apply_outer(ctx.p_op.matrix(), n_t, x))) / norm2;
  r.energy_mean = std::real(x.dot(apply_outer(ctx.h_op.matrix(), n_t, x))) / norm2;
  r.residual1 = ctx.first.residual(s);
  r.probabilities.assign(static_cast<std::size_t>(ctx.physical.dimension()), 0.0);
  if (ctx.physical.dimension() > 0) {
    const Eigen::VectorXcd amps = ctx.physical.vectors.adjoint() * x;
    r.subspace_weight = amps.squaredNorm() / norm2;
    if (r.subspace_weight >= 1e-14) {
      const Measurement m = measurement_probabilities(s, ctx.physical);
      for (const auto& o : m.outcomes) r.probabilities[static_cast<std::size_t>(o.index)] = o.probability;
    }
  }
  r.equivalence_gap = std::numeric_limits<double>::quiet_NaN();
  return r;
}

CompositeState initial_state(const Scenario& sc, const ScenarioContext& ctx, std::vector<std::string>& warnings) {
  const Index n_q = sc.q_grid.n, n_t = sc.t_grid.n;
  if (const auto* amps = std::get_if<InitialAmplitudes>(&sc.initial)) {
    Eigen::VectorXcd v(n_q * n_t);
    for (Index i = 0; i < v.size(); ++i) v(i) = amps->amplitudes[static_cast<std::size_t>(i)];
    return CompositeState::normalized(n_q, n_t, std::move(v));
  }
  Index level = 0;
  if (const auto* lvl = std::get_if<InitialLevel>(&sc.initial)) {
    level = lvl->level;
  } else {
    const double e = std::get<InitialEnergy>(sc.initial).energy;
    level = -1;
    for (Index n = 0; n < ctx.levels.size(); ++n)
      if (std::abs(ctx.levels.values(n) - e) <= sc.tolerances.constraint_tol * std::max(1.0, std::abs(e))) level = n;
    if (level < 0) {
      std::ostringstream msg;
      msg << "initial.energy: " << e << " is not an eigenvalue of H within constraint_tol";
      throw Error(Errc::validation_error, msg.str());
    }
  }
  auto sep = separable_first(ctx.levels.values(level), ctx.levels.vectors.col(level), ctx.t_grid, ctx.k);
  if (sep.warning) warnings.push_back(*sep.warning);
  return sep.state;
}

}  // namespace

Trajectory run_scenario(const Scenario& sc) {
  validate_scenario(sc);

  ScenarioContext ctx;
  ctx.model = sc.model_spec();
  ctx.t_grid = sc.t_grid;
  ctx.k = sc.constants;
  ctx.q_op = position_operator(sc.q_grid);
  ctx.p_op = momentum_operator(sc.q_grid, sc.constants);
  ctx.h_op = hamiltonian(ctx.model);
  ctx.levels = eig_hermitian(ctx.h_op, sc.tolerances.eigen_tol).truncated(kDefaultLevels);
  ctx.first = ConstraintOperator::first(ctx.h_op, sc.t_grid, sc.constants);
  ctx.physical = physical_subspace(ctx.first, sc.tolerances.constraint_tol);

  Trajectory traj;
  traj.energy_labels = ctx.physical.labels;
  CompositeState state = initial_state(sc, ctx, traj.warnings);
  traj.records.push_back(record(ctx, state, 0, StepKind::initial));

  for (std::size_t s = 0; s < sc.steps.size(); ++s) {
    const Index step_index = static_cast<Index>(s) + 1;
    try {
      if (const auto* ev = std::get_if<EvolveStep>(&sc.steps[s])) {
        const double residual_before = ctx.first.residual(state);
        const OperatorMatrix& t_s = ctx.translation(ev->duration);
        Eigen::VectorXcd next = apply_inner(state.n_q(), t_s.matrix(), state.amplitudes());
        double gap = std::numeric_limits<double>::quiet_NaN();
        if (residual_before <= sc.tolerances.constraint_tol) {
          const OperatorMatrix t_h = unitary_exp(ctx.h_op, ev->duration / ctx.k.hbar);
          const Eigen::VectorXcd alt = apply_outer(t_h.matrix(), state.n_t(), state.amplitudes());
          gap = (alt - next).norm() / state.norm();
          if (gap > kEvolutionEquivalenceTol) {
            std::ostringstream msg;
            msg << "evolution by s and by H differ by " << gap << " on a constraint-satisfying state";
            throw Error(Errc::equivalence_violation, msg.str());
          }
        }
        state = CompositeState::normalized(state.n_q(), state.n_t(), std::move(next));
        traj.records.push_back(record(ctx, state, step_index, StepKind::evolve));
        traj.records.back().equivalence_gap = gap;
      } else {
        const auto& jp = std::get<JumpStep>(sc.steps[s]);
        state = energy_jump(state, jp.from, jp.to, ctx.levels, ctx.t_grid, ctx.k);
        traj.records.push_back(record(ctx, state, step_index, StepKind::jump));
      }
    } catch (const Error& e) {
      throw ScenarioError(e, step_index, traj);
    }
  }
  return traj;
}

}  // namespace chronos
