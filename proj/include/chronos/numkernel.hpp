#pragma once

// Dense complex linear algebra shared by every other module: operator
// matrices with verified structural flags, Kronecker products and
// Kronecker-factored application, Hermitian eigendecomposition with a
// reproducible phase/ordering convention, unitary exponentials and
// near-null-space extraction.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "chronos/error.hpp"

namespace chronos {

using Eigen::Index;

namespace tolerance {
inline constexpr double hermitian = 1e-12;  // relative to maxnorm
inline constexpr double unitary = 1e-10;    // absolute, ||A^H A - I||_max
inline constexpr double residual = 1e-9;    // relative to maxnorm
}  // namespace tolerance

struct OperatorFlags {
  bool hermitian = false;
  bool unitary = false;
  bool diagonal = false;

  bool operator==(const OperatorFlags&) const = default;
};

template <typename Derived>
typename Derived::RealScalar max_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return a.cwiseAbs().maxCoeff();
}

/// max |A_ij - conj(A_ji)|
template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<typename Derived::RealScalar>::infinity();
  return max_norm(a - a.adjoint());
}

/// ||A^H A - I||_max
template <typename Derived>
typename Derived::RealScalar unitarity_defect(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  if (a.rows() != a.cols()) return std::numeric_limits<typename Derived::RealScalar>::infinity();
  Plain gram = a.adjoint() * a;
  gram -= Plain::Identity(a.rows(), a.cols());
  return max_norm(gram);
}

/// A square dense matrix together with structural assertions that were
/// checked when the value was built.
template <typename Scalar_>
class DenseOperator {
 public:
  using Scalar = Scalar_;
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  DenseOperator() = default;

  /// Throws NotHermitian / NotUnitary / InvalidArgument when an asserted
  /// flag does not hold.
  explicit DenseOperator(Matrix m, OperatorFlags flags = {}) : matrix_(std::move(m)), flags_(flags) {
    if (matrix_.rows() != matrix_.cols())
      throw Error(Errc::dimension_mismatch, "operator matrix must be square");
    verify();
  }

  static DenseOperator hermitian(Matrix m) { return DenseOperator(std::move(m), {.hermitian = true}); }

  static DenseOperator identity(Index n) {
    return trusted(Matrix::Identity(n, n), {.hermitian = true, .unitary = true, .diagonal = true});
  }

  /// Skips verification; for results whose flags follow algebraically from
  /// already verified inputs.
  static DenseOperator trusted(Matrix m, OperatorFlags flags) {
    DenseOperator op;
    op.matrix_ = std::move(m);
    op.flags_ = flags;
    return op;
  }

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const OperatorFlags& flags() const { return flags_; }
  bool is_hermitian() const { return flags_.hermitian; }
  bool is_unitary() const { return flags_.unitary; }
  bool is_diagonal() const { return flags_.diagonal; }

  template <typename Derived>
  auto operator*(const Eigen::MatrixBase<Derived>& x) const {
    return matrix_ * x;
  }

 private:
  void verify() const {
    if (flags_.hermitian) {
      const RealScalar scale = std::max<RealScalar>(max_norm(matrix_), RealScalar(1e-300));
      const RealScalar defect = hermiticity_defect(matrix_);
      if (defect > RealScalar(tolerance::hermitian) * scale) {
        std::ostringstream msg;
        msg << "hermiticity defect " << defect << " exceeds " << tolerance::hermitian << " * maxnorm";
        throw Error(Errc::not_hermitian, msg.str());
      }
    }
    if (flags_.unitary) {
      const RealScalar defect = unitarity_defect(matrix_);
      if (defect > RealScalar(tolerance::unitary)) {
        std::ostringstream msg;
        msg << "unitarity defect " << defect << " exceeds " << tolerance::unitary;
        throw Error(Errc::not_unitary, msg.str());
      }
    }
    if (flags_.diagonal) {
      for (Index j = 0; j < matrix_.cols(); ++j)
        for (Index i = 0; i < matrix_.rows(); ++i)
          if (i != j && matrix_(i, j) != Scalar(0))
            throw Error(Errc::invalid_argument, "diagonal flag set on a matrix with off-diagonal entries");
    }
  }

  Matrix matrix_;
  OperatorFlags flags_;
};

using OperatorMatrix = DenseOperator<std::complex<double>>;

// ---------------------------------------------------------------------------
// Kronecker products

/// (kron(A,B))[(i*rb + k), (j*cb + l)] = A(i,j) * B(k,l)
template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DA::Scalar, typename DB::Scalar>::ReturnType;
  using Result = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index rb = b.rows(), cb = b.cols();
  Result out(a.rows() * rb, a.cols() * cb);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

template <typename Scalar>
DenseOperator<Scalar> kron(const DenseOperator<Scalar>& a, const DenseOperator<Scalar>& b) {
  const OperatorFlags fa = a.flags(), fb = b.flags();
  return DenseOperator<Scalar>::trusted(kron(a.matrix(), b.matrix()),
                                        {.hermitian = fa.hermitian && fb.hermitian,
                                         .unitary = fa.unitary && fb.unitary,
                                         .diagonal = fa.diagonal && fb.diagonal});
}

/// kron(A, B) * x without forming the product. x is indexed (outer, inner)
/// with the A-factor outermost, i.e. x[i * dimB + k].
template <typename DA, typename DB, typename DX>
auto apply_kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DX>& x) {
  using Scalar = typename DX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.size() != a.cols() * b.cols())
    throw Error(Errc::dimension_mismatch, "apply_kron: vector length does not match factor dimensions");
  const Vector xv = x;
  Eigen::Map<const Matrix> grid(xv.data(), b.cols(), a.cols());
  Matrix out = b * grid * a.transpose();
  return Vector(Eigen::Map<Vector>(out.data(), out.size()));
}

/// kron(A, I) * x
template <typename DA, typename DX>
auto apply_outer(const Eigen::MatrixBase<DA>& a, Index inner_dim, const Eigen::MatrixBase<DX>& x) {
  using Scalar = typename DX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.size() != a.cols() * inner_dim)
    throw Error(Errc::dimension_mismatch, "apply_outer: vector length does not match factor dimensions");
  const Vector xv = x;
  Eigen::Map<const Matrix> grid(xv.data(), inner_dim, a.cols());
  Matrix out = grid * a.transpose();
  return Vector(Eigen::Map<Vector>(out.data(), out.size()));
}

/// kron(I, B) * x
template <typename DB, typename DX>
auto apply_inner(Index outer_dim, const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DX>& x) {
  using Scalar = typename DX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.size() != b.cols() * outer_dim)
    throw Error(Errc::dimension_mismatch, "apply_inner: vector length does not match factor dimensions");
  const Vector xv = x;
  Eigen::Map<const Matrix> grid(xv.data(), b.cols(), outer_dim);
  Matrix out = b * grid;
  return Vector(Eigen::Map<Vector>(out.data(), out.size()));
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

template <typename Scalar>
struct EigenSystem {
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;

  Index size() const { return values.size(); }

  /// The lowest `count` eigenpairs.
  EigenSystem truncated(Index count) const {
    count = std::min(count, size());
    return {values.head(count), vectors.leftCols(count)};
  }
};

namespace detail {

/// Rotates each column so that its first significant component is real and
/// positive.
template <typename Derived>
void canonicalize_phases(Eigen::MatrixBase<Derived>& vectors) {
  using std::abs;
  using RealScalar = typename Derived::RealScalar;
  for (Index c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    const RealScalar peak = max_norm(col);
    if (peak == RealScalar(0)) continue;
    for (Index r = 0; r < col.size(); ++r) {
      const RealScalar mag = abs(col(r));
      if (mag > RealScalar(1e-8) * peak) {
        col *= std::conj(col(r)) / mag;
        col(r) = mag;
        break;
      }
    }
  }
}

template <typename Scalar>
bool lexicographically_less(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (std::real(a(i)) != std::real(b(i))) return std::real(a(i)) < std::real(b(i));
    if (std::imag(a(i)) != std::imag(b(i))) return std::imag(a(i)) < std::imag(b(i));
  }
  return false;
}

/// Reorders columns inside clusters of numerically tied eigenvalues so the
/// lexicographically smallest vector comes first. `values` must already be
/// ascending.
template <typename Scalar, typename RealVector>
void order_ties(RealVector& values, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& vectors) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index n = values.size();
  if (n < 2) return;
  const auto scale = std::max<typename RealVector::Scalar>(1, values.cwiseAbs().maxCoeff());
  const auto tie = typename RealVector::Scalar(1e-12) * scale;
  Index begin = 0;
  while (begin < n) {
    Index end = begin + 1;
    while (end < n && values(end) - values(end - 1) <= tie) ++end;
    if (end - begin > 1) {
      std::vector<Index> order(end - begin);
      std::iota(order.begin(), order.end(), begin);
      std::vector<Vector> cols;
      for (Index c = begin; c < end; ++c) cols.push_back(vectors.col(c));
      std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        return lexicographically_less<Scalar>(cols[x - begin], cols[y - begin]);
      });
      RealVector vals = values.segment(begin, end - begin);
      for (Index k = 0; k < end - begin; ++k) {
        vectors.col(begin + k) = cols[order[k] - begin];
        values(begin + k) = vals(order[k] - begin);
      }
    }
    begin = end;
  }
}

}  // namespace detail

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator.
///
/// Each eigenvector has its first significant component real and positive;
/// exactly tied eigenvalues are ordered by the lexicographically smallest
/// vector. Throws NotHermitian when the operator fails the hermiticity check
/// and NoConvergence when the solver gives up or the reconstruction residual
/// exceeds `residual_tol * maxnorm(A)`.
template <typename Scalar>
EigenSystem<Scalar> eig_hermitian(const DenseOperator<Scalar>& a,
                                  typename DenseOperator<Scalar>::RealScalar residual_tol = tolerance::residual) {
  using Op = DenseOperator<Scalar>;
  using Matrix = typename Op::Matrix;
  using RealScalar = typename Op::RealScalar;

  const RealScalar scale = max_norm(a.matrix());
  if (hermiticity_defect(a.matrix()) > RealScalar(tolerance::hermitian) * std::max(scale, RealScalar(1e-300)))
    throw Error(Errc::not_hermitian, "eig_hermitian: operator is not Hermitian");

  EigenSystem<Scalar> es;
  if (a.is_diagonal()) {
    const Index n = a.dim();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
      return std::real(a.matrix()(x, x)) < std::real(a.matrix()(y, y));
    });
    es.values.resize(n);
    es.vectors = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
      es.values(k) = std::real(a.matrix()(order[k], order[k]));
      es.vectors(order[k], k) = Scalar(1);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
      throw Error(Errc::no_convergence, "eig_hermitian: eigensolver exceeded its iteration budget");
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
    detail::canonicalize_phases(es.vectors);
  }
  detail::order_ties(es.values, es.vectors);

  const Matrix residual = a.matrix() * es.vectors - es.vectors * es.values.asDiagonal();
  if (max_norm(residual) > residual_tol * std::max(scale, RealScalar(1e-300)))
    throw Error(Errc::no_convergence, "eig_hermitian: eigenpair residual above tolerance");
  return es;
}

// ---------------------------------------------------------------------------
// Unitary exponential

/// exp(-i * theta * A) for Hermitian A, built as V exp(-i theta Lambda) V^H.
template <typename Scalar>
DenseOperator<Scalar> unitary_exp(const DenseOperator<Scalar>& a, typename DenseOperator<Scalar>::RealScalar theta) {
  using Op = DenseOperator<Scalar>;
  using Matrix = typename Op::Matrix;
  using RealScalar = typename Op::RealScalar;
  const Scalar minus_i(RealScalar(0), RealScalar(-1));

  if (a.is_diagonal()) {
    if (hermiticity_defect(a.matrix()) > RealScalar(tolerance::hermitian) * std::max(max_norm(a.matrix()), RealScalar(1e-300)))
      throw Error(Errc::not_hermitian, "unitary_exp: operator is not Hermitian");
    Matrix u = Matrix::Zero(a.dim(), a.dim());
    for (Index k = 0; k < a.dim(); ++k) u(k, k) = std::exp(minus_i * theta * std::real(a.matrix()(k, k)));
    return Op(std::move(u), {.unitary = true, .diagonal = true});
  }

  const EigenSystem<Scalar> es = eig_hermitian(a);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phases(es.size());
  for (Index k = 0; k < es.size(); ++k) phases(k) = std::exp(minus_i * theta * es.values(k));
  Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  return Op(std::move(u), {.unitary = true});
}

// ---------------------------------------------------------------------------
// Near-null space

template <typename Scalar>
struct NullSpace {
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  /// Orthonormal columns.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis;
  /// Singular value attached to each column.
  Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> singular_values;

  Index dimension() const { return basis.cols(); }
};

/// All right-singular vectors of A with singular value <= tol. Hermitian
/// operators are solved through their eigendecomposition (singular values
/// are |lambda|); everything else through a divide-and-conquer SVD.
template <typename Scalar>
NullSpace<Scalar> near_null_space(const DenseOperator<Scalar>& a, typename DenseOperator<Scalar>::RealScalar tol) {
  using Matrix = typename DenseOperator<Scalar>::Matrix;
  using RealScalar = typename DenseOperator<Scalar>::RealScalar;
  if (!(tol > RealScalar(0))) throw Error(Errc::invalid_argument, "near_null_space: tol must be positive");

  std::vector<Index> keep;
  std::vector<RealScalar> sigma;
  Matrix source;
  if (a.is_hermitian()) {
    EigenSystem<Scalar> es = eig_hermitian(a);
    for (Index k = 0; k < es.size(); ++k) {
      using std::abs;
      if (abs(es.values(k)) <= tol) {
        keep.push_back(k);
        sigma.push_back(abs(es.values(k)));
      }
    }
    source = std::move(es.vectors);
  } else {
    Eigen::BDCSVD<Matrix> svd(a.matrix(), Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw Error(Errc::no_convergence, "near_null_space: SVD did not converge");
    const auto& s = svd.singularValues();
    for (Index k = s.size(); k-- > 0;) {
      if (s(k) <= tol) {
        keep.push_back(k);
        sigma.push_back(s(k));
      }
    }
    source = svd.matrixV();
  }

  NullSpace<Scalar> out;
  out.basis.resize(a.dim(), static_cast<Index>(keep.size()));
  out.singular_values.resize(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.basis.col(static_cast<Index>(k)) = source.col(keep[k]);
    out.singular_values(static_cast<Index>(k)) = sigma[k];
  }
  detail::canonicalize_phases(out.basis);
  return out;
}

}  // namespace chronos
