#pragma once

#include <Eigen/Dense>

namespace spdkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Absolute floor on eigenvalues for a matrix to count as positive definite.
inline constexpr double kPdTol = 1e-10;

// (M + M^T) / 2
Matrix sym(const Matrix& m);

// max|A - A^T| <= rel_tol * max|A|
bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

/// A dense real symmetric positive definite matrix.
///
/// Construct through `checked` for untrusted input. `assume` only
/// re-symmetrizes and is meant for outputs of spectral maps whose
/// eigenvalues are already known to be positive.
class SpdMatrix {
 public:
  SpdMatrix() = default;

  static SpdMatrix checked(Matrix m, double pd_tol = kPdTol);
  static SpdMatrix assume(Matrix m);
  static SpdMatrix identity(Eigen::Index d);
  static SpdMatrix diagonal(const Vector& diag);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
  }

 private:
  explicit SpdMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
///
/// Each eigenvector is signed so that its largest-magnitude entry is
/// positive, which keeps downstream results reproducible bit for bit.
struct SymEig {
  Vector values;
  Matrix vectors;
};

SymEig sym_eig(const Matrix& a);

// Spectral decomposition through the real Schur form. For symmetric input the
// Schur form is the eigendecomposition, so this shares sym_eig's solver.
SymEig schur_sym(const Matrix& a);

// Q f(Lambda) Q^T, re-symmetrized.
template <typename F>
Matrix spectral_map(const SymEig& eig, F&& f) {
  Vector mapped = eig.values.unaryExpr(f);
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return sym(out);
}

SpdMatrix spd_power(const SpdMatrix& a, double p);
Matrix spd_log(const SpdMatrix& a);
SpdMatrix spd_exp(const Matrix& s);
SpdMatrix spd_sqrt(const SpdMatrix& a);
SpdMatrix spd_invsqrt(const SpdMatrix& a);
SpdMatrix spd_inverse(const SpdMatrix& a);
double log_det(const SpdMatrix& a);

// A + eps I. A negative eps selects the default 1e-8 * trace(A) / d.
SpdMatrix regularize(const Matrix& a, double eps = -1.0);

// Eigenvalues of X Y^{-1}, ascending.
Vector gen_eigvals(const SpdMatrix& x, const SpdMatrix& y);

/// Reusable factorization of the right-hand argument of `gen_eigvals`,
/// for evaluating many X against one fixed Y.
class GenEigSolver {
 public:
  explicit GenEigSolver(const SpdMatrix& y);

  Vector eigvals(const SpdMatrix& x) const;
  Eigen::Index dim() const { return chol_.rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix chol_;
};

}  // namespace spdkit
