#include "chronos/commands.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "chronos/scenario_io.hpp"

namespace chronos {

namespace {

const std::vector<std::string> kCheckColumns = {"name", "value", "bound", "status"};

class CheckTable {
 public:
  CheckTable() : table_(kCheckColumns) {}

  void at_most(const std::string& name, double value, double bound) { add(name, value, bound, value <= bound); }
  void at_least(const std::string& name, double value, double bound) { add(name, value, bound, value >= bound); }
  void empty(const std::string& name, double value, double bound) {
    table_.add_row({name, value, bound, std::string("pass-empty")});
  }

  CommandResult finish() {
    CommandResult r;
    r.table = std::move(table_);
    r.exit_code = failed_ ? exit_check_failed : exit_ok;
    return r;
  }

 private:
  void add(const std::string& name, double value, double bound, bool ok) {
    if (!ok) failed_ = true;
    table_.add_row({name, value, bound, std::string(ok ? "pass" : "fail")});
  }

  ResultTable table_;
  bool failed_ = false;
};

double constraint_tol(const CommandOptions& opts, const Scenario& sc) {
  return opts.tol.value_or(sc.tolerances.constraint_tol);
}

Eigen::VectorXcd normalized(Eigen::VectorXcd v) {
  v.normalize();
  return v;
}

using SparseXcd = Eigen::SparseMatrix<std::complex<double>>;

/// Largest entry of [A, B] computed with sparse products, where each entry of
/// a product of disjoint lifts is a single term.
double sparse_commutator_max(const OperatorMatrix& a, const OperatorMatrix& b) {
  const SparseXcd sa = a.matrix().sparseView();
  const SparseXcd sb = b.matrix().sparseView();
  const SparseXcd ab = sa * sb;
  const SparseXcd ba = sb * sa;
  const SparseXcd diff = ab - ba;
  double m = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseXcd::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

CommandResult check_commutators(const Scenario& sc) {
  const PhysicalConstants& k = sc.constants;
  const std::complex<double> i_hbar(0.0, k.hbar);
  CheckTable out;

  const AxisGrid& qg = sc.q_grid;
  const Eigen::MatrixXcd q = position_operator(qg).matrix();
  const Eigen::MatrixXcd p = momentum_operator(qg, k).matrix();
  for (const double kq : {0.0, 1.0}) {
    const Eigen::VectorXcd psi = gaussian_state(qg, 0.0, 5.0 * qg.spacing, kq);
    const double r = (q * (p * psi) - p * (q * psi) - i_hbar * psi).norm();
    out.at_most("qp_canonical_k" + std::to_string(static_cast<int>(kq)), r, 1e-6);
  }

  const AxisGrid tg = wide_time_grid(k);
  const Eigen::MatrixXcd t = time_operator(tg).matrix();
  const Eigen::MatrixXcd s = energy_operator(tg, k).matrix();
  for (const double sigma : {1.0, 1.5}) {
    const Eigen::VectorXcd phi = gaussian_state(tg, 0.5 * tg.period(), sigma / k.omega);
    const double r = (t * (s * phi) - s * (t * phi) + i_hbar * phi).norm();
    out.at_most(sigma == 1.0 ? "ts_canonical_sigma1" : "ts_canonical_sigma1.5", r, 1e-6);
  }

  const AxisGrid cq = compact_position_grid(k);
  const AxisGrid ct = energy_aligned_time_grid(k);
  const ModelSpec model = make_model(sc.model, k, cq);
  const OperatorMatrix lq = lift_system(position_operator(cq), ct.n);
  const OperatorMatrix lp = lift_system(momentum_operator(cq, k), ct.n);
  const OperatorMatrix lh = lift_system(hamiltonian(model), ct.n);
  const OperatorMatrix lt = lift_time(time_operator(ct), cq.n);
  const OperatorMatrix ls = lift_time(energy_operator(ct, k), cq.n);
  out.at_most("lifted_q_t", sparse_commutator_max(lq, lt), 1e-14);
  out.at_most("lifted_q_s", sparse_commutator_max(lq, ls), 1e-14);
  out.at_most("lifted_p_t", sparse_commutator_max(lp, lt), 1e-14);
  out.at_most("lifted_p_s", sparse_commutator_max(lp, ls), 1e-14);
  out.at_most("lifted_H_s", sparse_commutator_max(lh, ls), 1e-14);
  return out.finish();
}

/// Rows shared by both constraint suites. `separable` builds the separable
/// solution for system level n and returns its residual.
template <class Separable>
CommandResult check_constraint(const ConstraintOperator& d, const EigenSystemXcd& sys, const Eigen::VectorXd& time_values,
                               double tol, Separable separable) {
  CheckTable out;
  const Index matched = count_matched_pairs(sys.values, time_values, tol);
  const SubspaceBasis basis = physical_subspace(d, tol);
  const double dim_gap = std::abs(static_cast<double>(basis.dimension() - matched));
  if (matched == 0) {
    out.empty("matched_pairs", 0.0, 1.0);
    out.empty("subspace_dimension_gap", dim_gap, 0.0);
    return out.finish();
  }
  out.at_least("matched_pairs", static_cast<double>(matched), 1.0);
  out.at_most("subspace_dimension_gap", dim_gap, 0.0);
  double worst = 0.0;
  for (double r : basis.residuals) worst = std::max(worst, r);
  out.at_most("max_basis_residual", worst, tol);
  for (Index n = 0; n < sys.size(); ++n) {
    bool hit = false;
    for (Index j = 0; j < time_values.size(); ++j) hit = hit || std::abs(time_values(j) - sys.values(n)) <= tol;
    if (hit) out.at_most("separable_residual_n" + std::to_string(n), separable(n), tol);
  }
  return out.finish();
}

CommandResult check_constraint1(const Scenario& sc, double tol) {
  const ModelSpec model = sc.model_spec();
  const OperatorMatrix h = hamiltonian(model);
  const auto sys = eig_hermitian(h, sc.tolerances.eigen_tol);
  const auto d = ConstraintOperator::first(h, sc.t_grid, sc.constants);
  return check_constraint(d, sys, energy_lattice(sc.t_grid, sc.constants), tol, [&](Index n) {
    const auto sep = separable_first(sys.values(n), sys.vectors.col(n), sc.t_grid, sc.constants);
    return first_constraint_residual(sep.state, h, sc.t_grid, sc.constants);
  });
}

CommandResult check_constraint2(const Scenario& sc, double tol) {
  const ModelSpec model = sc.model_spec();
  const OperatorMatrix g = time_generator(model);
  const auto sys = eig_hermitian(g, sc.tolerances.eigen_tol);
  const auto d = ConstraintOperator::second(g, sc.t_grid);
  return check_constraint(d, sys, sc.t_grid.samples(), tol, [&](Index n) {
    const auto sep = separable_second(sys.values(n), sys.vectors.col(n), sc.t_grid);
    return second_constraint_residual(sep.state, g, sc.t_grid);
  });
}

CommandResult check_generalized(const Scenario& sc, double tol) {
  const PhysicalConstants& k = sc.constants;
  const AxisGrid qg = compact_position_grid(k);
  const AxisGrid tg = energy_aligned_time_grid(k, 20);
  const ModelSpec model = make_model(sc.model, k, qg);
  const OperatorMatrix h = hamiltonian(model);
  const OperatorMatrix g = time_generator(model);
  const OperatorMatrix fh = lift_system(h, tg.n);
  const OperatorMatrix fg = lift_system(g, tg.n);

  std::mt19937 rng(20240607);
  std::normal_distribution<double> normal;
  double gap_first = 0.0, gap_second = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXcd v(qg.n * tg.n);
    for (Index i = 0; i < v.size(); ++i) v(i) = {normal(rng), normal(rng)};
    const CompositeState s = CompositeState::normalized(qg.n, tg.n, std::move(v));
    gap_first = std::max(gap_first, std::abs(generalized_residual(s, 1.0, 0.0, fh, tg, k) -
                                             first_constraint_residual(s, h, tg, k)));
    gap_second = std::max(gap_second, std::abs(generalized_residual(s, 0.0, 1.0, fg, tg, k) -
                                               second_constraint_residual(s, g, tg)));
  }

  CheckTable out;
  out.at_most("reduction_first_gap", gap_first, 1e-12);
  out.at_most("reduction_second_gap", gap_second, 1e-12);
  const auto sys = eig_hermitian(h, sc.tolerances.eigen_tol);
  const Index matched = count_matched_pairs(sys.values, energy_lattice(tg, k), tol);
  const SubspaceBasis basis = generalized_solve(1.0, 0.0, fh, tg, k, tol);
  out.at_most("solve_dimension_gap", std::abs(static_cast<double>(basis.dimension() - matched)), 0.0);
  return out.finish();
}

CommandResult check_uncertainty(const Scenario& sc) {
  const PhysicalConstants& k = sc.constants;
  const AxisGrid tg = wide_time_grid(k);
  const double center = 0.5 * tg.period();
  CheckTable out;
  for (const double sigma : {1.0, 1.25, 1.5, 1.75, 2.0}) {
    const Eigen::VectorXcd phi = normalized(gaussian_state(tg, center, sigma / k.omega));
    const Uncertainty u = uncertainty_product(phi, tg, k);
    std::ostringstream name;
    name << "gaussian_sigma" << sigma;
    out.at_least(name.str() + "_product", u.product, 0.49 * k.hbar);
    out.at_most(name.str() + "_excess", std::abs(u.product / (0.5 * k.hbar) - 1.0), 0.01);
  }
  const Eigen::VectorXcd two_peak =
      normalized(gaussian_state(tg, center - 3.0 / k.omega, 1.0 / k.omega) +
                 gaussian_state(tg, center + 3.0 / k.omega, 1.5 / k.omega, 0.7 * k.omega));
  out.at_least("two_peak_product", uncertainty_product(two_peak, tg, k).product, 0.49 * k.hbar);
  return out.finish();
}

CommandResult check_ladder(const Scenario& sc) {
  if (sc.model != ModelKind::oscillator) throw Error(Errc::wrong_kind, "the ladder suite needs an oscillator model");
  const AxisGrid tg = time_aligned_time_grid(sc.constants);
  const OscillatorClock clock = make_oscillator_clock(sc.model_spec(), tg);
  CheckTable out;
  for (Index n = 0; n + 1 < clock.n_max(); ++n) {
    const CompositeState s = discrete_time_state(clock, n);
    const LadderStep up = ladder_step_up(s, clock);
    const double want = std::sqrt(static_cast<double>(n + 1));
    out.at_most("up_n" + std::to_string(n) + "_coefficient_error", std::abs(up.coefficient - want) / want, 1e-6);
    const CompositeState next = CompositeState::normalized(s.n_q(), s.n_t(), up.state.amplitudes());
    out.at_least("up_n" + std::to_string(n) + "_overlap", overlap(next, discrete_time_state(clock, n + 1)),
                 1.0 - 1e-6);
  }
  for (Index n = 1; n + 1 < clock.n_max(); ++n) {
    const LadderStep down = ladder_step_down(discrete_time_state(clock, n), clock);
    const double want = std::sqrt(static_cast<double>(n));
    out.at_most("down_n" + std::to_string(n) + "_coefficient_error", std::abs(down.coefficient - want) / want,
                1e-6);
  }
  const LadderStep ground = ladder_step_down(discrete_time_state(clock, 0), clock);
  out.at_most("down_n0_norm", ground.state.norm(), 0.0);
  return out.finish();
}

}  // namespace

int exit_code_for(Errc code) {
  return code == Errc::no_convergence ? exit_no_convergence : exit_usage;
}

Scenario scenario_or_default(const CommandOptions& opts, GridPreset fallback) {
  if (opts.config) return load_scenario(*opts.config);
  Scenario sc;
  apply_preset(sc, fallback);
  return sc;
}

CommandResult cmd_spectrum(const CommandOptions& opts) {
  if (opts.levels < 0) throw Error(Errc::invalid_argument, "--levels must be non-negative");
  const Scenario sc = scenario_or_default(opts);
  const ModelSpec model = sc.model_spec();
  CommandResult r;
  r.table = ResultTable({"n", "E_n", "t_n", "t_n_predicted", "abs_error"});
  const Index rows = std::min<Index>(opts.levels, model.grid.n);
  if (rows == 0) return r;

  const auto e = eig_hermitian(hamiltonian(model), sc.tolerances.eigen_tol);
  const auto t = eig_hermitian(time_generator(model), sc.tolerances.eigen_tol);
  Eigen::VectorXd predicted(rows);
  if (sc.model == ModelKind::oscillator) {
    for (Index n = 0; n < rows; ++n) predicted(n) = predicted_tn(n, sc.constants);
  } else {
    predicted = predicted_free_times(model.grid, sc.constants).head(rows);
  }
  for (Index n = 0; n < rows; ++n)
    r.table.add_row({static_cast<long long>(n), e.values(n), t.values(n), predicted(n),
                     std::abs(t.values(n) - predicted(n))});
  return r;
}

CommandResult cmd_check(const CommandOptions& opts) {
  const std::string& suite = opts.suite;
  if (std::find(kCheckSuites.begin(), kCheckSuites.end(), suite) == kCheckSuites.end())
    throw Error(Errc::unknown_suite, "unknown suite '" + suite + "'");
  const GridPreset fallback = suite == "constraint2" ? GridPreset::time_aligned : GridPreset::energy_aligned;
  const Scenario sc = scenario_or_default(opts, fallback);
  const double tol = constraint_tol(opts, sc);
  if (suite == "commutators") return check_commutators(sc);
  if (suite == "constraint1") return check_constraint1(sc, tol);
  if (suite == "constraint2") return check_constraint2(sc, tol);
  if (suite == "generalized") return check_generalized(sc, tol);
  if (suite == "uncertainty") return check_uncertainty(sc);
  return check_ladder(sc);
}

namespace {

ResultTable trajectory_table(const Trajectory& traj, std::size_t slots) {
  std::vector<std::string> columns = {"step_index", "kind",     "q_mean",         "p_mean",
                                      "energy_mean", "residual1", "subspace_weight"};
  for (std::size_t i = 0; i < slots; ++i) columns.push_back("p" + std::to_string(i));
  ResultTable table(std::move(columns));
  for (const auto& rec : traj.records) {
    std::vector<Cell> row = {static_cast<long long>(rec.step_index),
                             std::string(to_string(rec.kind)),
                             rec.q_mean,
                             rec.p_mean,
                             rec.energy_mean,
                             rec.residual1,
                             rec.subspace_weight};
    for (std::size_t i = 0; i < slots; ++i) row.emplace_back(i < rec.probabilities.size() ? rec.probabilities[i] : 0.0);
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace

CommandResult cmd_run(const CommandOptions& opts) {
  if (!opts.config) throw Error(Errc::invalid_argument, "run needs --config <scenario.json>");
  Scenario sc = load_scenario(*opts.config);
  if (opts.tol) {
    sc.tolerances.constraint_tol = *opts.tol;
    validate_scenario(sc);
  }
  CommandResult r;
  try {
    const Trajectory traj = run_scenario(sc);
    r.table = trajectory_table(traj, traj.energy_labels.size());
    r.diagnostics = traj.warnings;
  } catch (const ScenarioError& e) {
    const Trajectory& partial = e.partial();
    r.table = trajectory_table(partial, partial.energy_labels.size());
    r.diagnostics = partial.warnings;
    r.diagnostics.push_back(e.what());
    std::string reason = e.what();
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    r.trailer = "# aborted: " + reason + "\n";
    r.exit_code = exit_code_for(e.code());
  }
  return r;
}

CommandResult cmd_subspace(const CommandOptions& opts) {
  if (opts.equation != "first" && opts.equation != "second")
    throw Error(Errc::invalid_argument, "--equation must be 'first' or 'second'");
  const bool first = opts.equation == "first";
  const Scenario sc = scenario_or_default(opts, first ? GridPreset::energy_aligned : GridPreset::time_aligned);
  const ModelSpec model = sc.model_spec();
  const ConstraintOperator d = first ? ConstraintOperator::first(hamiltonian(model), sc.t_grid, sc.constants)
                                     : ConstraintOperator::second(time_generator(model), sc.t_grid);
  const SubspaceBasis basis = physical_subspace(d, constraint_tol(opts, sc));
  CommandResult r;
  r.table = ResultTable({"index", "label", "multiplet", "residual"});
  for (Index c = 0; c < basis.dimension(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    r.table.add_row({static_cast<long long>(c), basis.labels[i], static_cast<long long>(basis.multiplet[i]),
                     basis.residuals[i]});
  }
  return r;
}

}  // namespace chronos
