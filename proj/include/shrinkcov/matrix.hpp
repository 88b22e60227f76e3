#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "shrinkcov/errors.hpp"

namespace shrinkcov {

/// Numerical tolerances used across the library.  Routines that take a
/// tolerance parameter default to the corresponding field of kTol, so a test
/// can tighten a gate by passing its own value.
struct Tolerances {
  /// SymMatrix construction: max |M - M^T| allowed, relative to max |M|.
  double symmetry_rel = 1e-8;
  /// Shrinkage system degeneracy: determinant floor relative to
  /// ||S||_F^2 * ||T||_F^2.
  double degenerate_rel = 1e-12;
  /// Positive-definiteness: smallest eigenvalue floor relative to the
  /// spectral norm.
  double spd_rel = 1e-10;
  /// Spectrum masses must sum to one within this.
  double mass_sum = 1e-12;
};

inline constexpr Tolerances kTol{};

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Eigenvalues in ascending order.
template <typename Scalar>
using EigenListT = DenseVector<Scalar>;

using EigenList = EigenListT<double>;

/// Dense symmetric matrix with a validated invariant: square, at least 1x1,
/// all entries finite, stored bitwise symmetric.  Construction symmetrizes
/// (M + M^T)/2 and rejects inputs whose asymmetry exceeds the tolerance.
template <typename Scalar>
class SymMatrixT {
 public:
  using Matrix = DenseMatrix<Scalar>;

  template <typename Derived>
  explicit SymMatrixT(const Eigen::MatrixBase<Derived>& m,
                      double asym_rel = kTol.symmetry_rel) {
    Matrix dense = m;
    if (dense.rows() != dense.cols() || dense.rows() < 1) {
      throw ArgError("SymMatrix: need a square matrix of dimension >= 1, got " +
                     std::to_string(dense.rows()) + "x" +
                     std::to_string(dense.cols()));
    }
    if (!dense.allFinite()) {
      throw ArgError("SymMatrix: entries must be finite");
    }
    const double scale = dense.cwiseAbs().maxCoeff();
    const double asym = (dense - dense.transpose()).cwiseAbs().maxCoeff();
    if (asym > asym_rel * scale) {
      throw ArgError("SymMatrix: asymmetry " + std::to_string(asym) +
                     " exceeds " + std::to_string(asym_rel) +
                     " * max|entry|");
    }
    m_ = ((dense + dense.transpose()) / Scalar(2)).eval();
  }

  static SymMatrixT identity(Eigen::Index p) {
    require_dim(p);
    return SymMatrixT(Matrix::Identity(p, p), Unchecked{});
  }

  static SymMatrixT diagonal(const DenseVector<Scalar>& d) {
    require_dim(d.size());
    if (!d.allFinite()) throw ArgError("SymMatrix: entries must be finite");
    Matrix m = Matrix::Zero(d.size(), d.size());
    m.diagonal() = d;
    return SymMatrixT(std::move(m), Unchecked{});
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  struct Unchecked {};
  SymMatrixT(Matrix m, Unchecked) : m_(std::move(m)) {}

  static void require_dim(Eigen::Index p) {
    if (p < 1) {
      throw ArgError("SymMatrix: dimension must be >= 1, got " +
                     std::to_string(p));
    }
  }

  Matrix m_;
};

using SymMatrix = SymMatrixT<double>;

/// Observation matrix: p variables (rows) by n samples (columns), entries
/// finite.
template <typename Scalar>
class DataMatrixT {
 public:
  using Matrix = DenseMatrix<Scalar>;

  explicit DataMatrixT(Matrix values) : m_(std::move(values)) {
    if (m_.rows() < 1 || m_.cols() < 1) {
      throw ArgError("DataMatrix: need at least one variable and one sample, got " +
                     std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
    if (!m_.allFinite()) {
      throw ArgError("DataMatrix: entries must be finite");
    }
  }

  Eigen::Index vars() const { return m_.rows(); }
  Eigen::Index samples() const { return m_.cols(); }
  const Matrix& mat() const { return m_; }

 private:
  Matrix m_;
};

using DataMatrix = DataMatrixT<double>;

/// ||m||_F^2, the sum of squared entries.
template <typename Derived>
typename Derived::Scalar frobenius_norm_sq(const Eigen::MatrixBase<Derived>& m) {
  return m.squaredNorm();
}

template <typename Scalar>
Scalar frobenius_norm_sq(const SymMatrixT<Scalar>& m) {
  return m.mat().squaredNorm();
}

/// ||m||_tr^2 = (tr m)^2 for square m.
template <typename Derived>
typename Derived::Scalar trace_norm_sq(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) {
    throw DimError("trace_norm_sq: matrix must be square, got " +
                   std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const typename Derived::Scalar t = m.trace();
  return t * t;
}

template <typename Scalar>
Scalar trace_norm_sq(const SymMatrixT<Scalar>& m) {
  return trace_norm_sq(m.mat());
}

/// tr(a b) for symmetric a, b of equal dimension.  Computed as the entrywise
/// product sum, which equals the trace of the product when both arguments are
/// symmetric.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar trace_product(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimError("trace_product: dimensions disagree, " +
                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                   " vs " + std::to_string(b.rows()) + "x" +
                   std::to_string(b.cols()));
  }
  return a.cwiseProduct(b).sum();
}

template <typename Scalar>
Scalar trace_product(const SymMatrixT<Scalar>& a, const SymMatrixT<Scalar>& b) {
  return trace_product(a.mat(), b.mat());
}

/// All eigenvalues of a symmetric matrix, ascending.  Backed by a symmetric
/// tridiagonalization followed by implicit-shift iteration with a bounded
/// sweep count; failure to converge raises NumericalError.
template <typename Derived>
EigenListT<typename Derived::Scalar> sym_eigenvalues(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw ArgError("sym_eigenvalues: need a square matrix, got " +
                   std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eigenvalues: eigenvalue iteration did not converge");
  }
  return solver.eigenvalues();
}

template <typename Scalar>
EigenListT<Scalar> sym_eigenvalues(const SymMatrixT<Scalar>& m) {
  return sym_eigenvalues(m.mat());
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
template <typename Scalar>
Scalar spectral_norm(const SymMatrixT<Scalar>& m) {
  const EigenListT<Scalar> ev = sym_eigenvalues(m);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// True when every off-diagonal entry is exactly zero.
template <typename Derived>
bool is_exactly_diagonal(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != typename Derived::Scalar(0)) return false;
    }
  }
  return true;
}

/// True when all eigenvalues exceed eig_floor_rel times the spectral norm.
/// Diagonal matrices are checked directly from their diagonal.
template <typename Scalar>
bool is_spd(const SymMatrixT<Scalar>& m, double eig_floor_rel = kTol.spd_rel) {
  Scalar lo, top;
  if (is_exactly_diagonal(m.mat())) {
    lo = m.mat().diagonal().minCoeff();
    top = m.mat().diagonal().cwiseAbs().maxCoeff();
  } else {
    const EigenListT<Scalar> ev = sym_eigenvalues(m);
    lo = ev(0);
    top = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  return lo > eig_floor_rel * top;
}

}  // namespace shrinkcov
