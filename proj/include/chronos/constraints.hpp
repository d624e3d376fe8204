#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chronos/axes.hpp"
#include "chronos/models.hpp"

namespace chronos {

enum class ConstraintKind { first, second, generalized };

/// Composite sizes up to this many states are solved by dense near-null
/// extraction; larger Kronecker-sum constraints use their factor spectra.
inline constexpr Index kDenseCompositeLimit = 1024;
inline constexpr double kDefaultConstraintTol = 1e-6;
/// Labels closer than this are reported as one degenerate multiplet.
inline constexpr double kMultipletGap = 1e-6;

/// D = I (x) T - S (x) I with T acting on H_t and S on H_q, or for the
/// generalized form D = I (x) (c_s s + c_t t) - F with a composite F.
///
///   first:        T = s (energy),  S = H
///   second:       T = t (time),    S = G
///   generalized:  T = c_s s + c_t t, F supplied on the composite space
class ConstraintOperator {
 public:
  static ConstraintOperator first(const OperatorMatrix& h, const AxisGrid& time_grid, const PhysicalConstants& k);
  static ConstraintOperator second(const OperatorMatrix& g, const AxisGrid& time_grid);
  static ConstraintOperator generalized(double c_s, double c_t, const OperatorMatrix& f, const AxisGrid& time_grid,
                                        const PhysicalConstants& k);

  ConstraintKind kind() const { return kind_; }
  double c_s() const { return c_s_; }
  double c_t() const { return c_t_; }
  Index n_q() const { return n_q_; }
  Index n_t() const { return n_t_; }
  Index dim() const { return n_q_ * n_t_; }
  const AxisGrid& time_grid() const { return time_grid_; }

  /// S for first/second; empty for generalized.
  const OperatorMatrix& system_part() const { return system_; }
  const OperatorMatrix& time_part() const { return time_; }
  /// F for generalized; empty otherwise.
  const OperatorMatrix& composite_part() const { return composite_; }

  /// D x, applied factor by factor.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// ||D s|| / ||s||
  double residual(const CompositeState& s) const;
  /// The composite matrix; Hermitian.
  OperatorMatrix materialize() const;

 private:
  ConstraintKind kind_ = ConstraintKind::first;
  double c_s_ = 1.0;
  double c_t_ = 0.0;
  Index n_q_ = 0;
  Index n_t_ = 0;
  AxisGrid time_grid_;
  OperatorMatrix system_;
  OperatorMatrix time_;
  OperatorMatrix composite_;
};

/// Orthonormal near-kernel of a constraint operator.
struct SubspaceBasis {
  Eigen::MatrixXcd vectors;  // one composite state per column
  /// Eigenvalue of the lifted system operator (E for first, t for second)
  /// per vector; empty for generalized constraints.
  std::vector<double> labels;
  /// Vectors sharing an id form a degenerate multiplet (label gap < 1e-6).
  std::vector<Index> multiplet;
  std::vector<double> residuals;
  double tol = kDefaultConstraintTol;
  Index n_q = 0;
  Index n_t = 0;

  Index dimension() const { return vectors.cols(); }
  bool labeled() const { return !labels.empty(); }
  CompositeState state(Index k) const;
  /// Orthogonal projector onto the span.
  Eigen::MatrixXcd projector() const;
};

struct SeparableFirst {
  CompositeState state;
  bool on_lattice = false;
  std::optional<std::string> warning;
};

/// psi_E (x) |E>, the discrete form of psi_E(q) exp(Et / i hbar).
SeparableFirst separable_first(double energy, const Eigen::VectorXcd& psi, const AxisGrid& time_grid,
                               const PhysicalConstants& k);

/// ||(I (x) s - H (x) I) state|| / ||state||
double first_constraint_residual(const CompositeState& s, const OperatorMatrix& h, const AxisGrid& time_grid,
                                 const PhysicalConstants& k);

struct SeparableSecond {
  CompositeState state;
  Index sample = 0;
  double rounding_distance = 0.0;  // |t - t_sample|
};

/// psi_t (x) (grid delta at the time sample nearest to t).
SeparableSecond separable_second(double time, const Eigen::VectorXcd& psi, const AxisGrid& time_grid);

/// ||(I (x) t - G (x) I) state|| / ||state||
double second_constraint_residual(const CompositeState& s, const OperatorMatrix& g, const AxisGrid& time_grid);

/// Near-kernel of D with labels recovered from the lifted system operator.
SubspaceBasis physical_subspace(const ConstraintOperator& d, double tol = kDefaultConstraintTol);

/// ||(c_s I (x) s + c_t I (x) t - F) state|| / ||state||
double generalized_residual(const CompositeState& s, double c_s, double c_t, const OperatorMatrix& f,
                            const AxisGrid& time_grid, const PhysicalConstants& k);

/// Near-kernel of c_s I (x) s + c_t I (x) t - F; unlabeled.
SubspaceBasis generalized_solve(double c_s, double c_t, const OperatorMatrix& f, const AxisGrid& time_grid,
                                const PhysicalConstants& k, double tol = kDefaultConstraintTol);

/// Number of factor eigenvalue pairs with |b_k - a_n| <= tol.
Index count_matched_pairs(const Eigen::VectorXd& system_values, const Eigen::VectorXd& time_values, double tol);

struct Outcome {
  Index index = 0;
  double label = 0.0;  // NaN for unlabeled bases
  double probability = 0.0;
};

struct Measurement {
  std::vector<Outcome> outcomes;
  /// sum_k |<Phi_k|s>|^2 before renormalization.
  double subspace_weight = 0.0;
};

/// Probabilities of the resolution of identity restricted to `basis`,
/// renormalized over that subspace. Throws EmptyBasis / ZeroOverlap.
Measurement measurement_probabilities(const CompositeState& s, const SubspaceBasis& basis);

struct Uncertainty {
  double delta_t = 0.0;
  double delta_s = 0.0;
  double product = 0.0;
};

/// Spreads of t and s in a normalized state on H_t.
Uncertainty uncertainty_product(const Eigen::VectorXcd& phi, const AxisGrid& time_grid, const PhysicalConstants& k);

}  // namespace chronos
