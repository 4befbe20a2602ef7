#include "spdkit/spd.hpp"

#include <cmath>
#include <string>

#include "spdkit/error.hpp"

namespace spdkit {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": expected a non-empty square matrix, got " +
                                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_pd(const SymEig& eig, const char* what) {
  const double lo = eig.values(0);
  if (!(lo > kPdTol)) {
    fail(ErrorCode::NotPositiveDefinite,
         std::string(what) + ": smallest eigenvalue " + std::to_string(lo) + " <= pd_tol");
  }
}

}  // namespace

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SpdMatrix SpdMatrix::checked(Matrix m, double pd_tol) {
  require_square(m, "SpdMatrix");
  if (!m.allFinite()) fail(ErrorCode::InvalidInput, "SpdMatrix: non-finite entries");
  if (!is_symmetric(m)) fail(ErrorCode::InvalidInput, "SpdMatrix: matrix is not symmetric");
  m = sym(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NumericalBreakdown, "SpdMatrix: eigensolver failed");
  if (!(es.eigenvalues()(0) > pd_tol)) {
    fail(ErrorCode::NotPositiveDefinite,
         "SpdMatrix: smallest eigenvalue " + std::to_string(es.eigenvalues()(0)) + " <= pd_tol");
  }
  return SpdMatrix(std::move(m));
}

SpdMatrix SpdMatrix::assume(Matrix m) { return SpdMatrix(sym(m)); }

SpdMatrix SpdMatrix::identity(Eigen::Index d) { return SpdMatrix(Matrix::Identity(d, d)); }

SpdMatrix SpdMatrix::diagonal(const Vector& diag) {
  if (diag.size() == 0 || !(diag.minCoeff() > kPdTol)) {
    fail(ErrorCode::NotPositiveDefinite, "SpdMatrix::diagonal: entries must exceed pd_tol");
  }
  return SpdMatrix(Matrix(diag.asDiagonal()));
}

SymEig sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  if (!a.allFinite()) fail(ErrorCode::InvalidInput, "sym_eig: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(a));
  if (es.info() != Eigen::Success) fail(ErrorCode::NumericalBreakdown, "sym_eig: eigensolver failed");
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < out.vectors.rows(); ++i) {
      const double mag = std::abs(out.vectors(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (out.vectors(arg, j) < 0.0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

SymEig schur_sym(const Matrix& a) { return sym_eig(a); }

SpdMatrix spd_power(const SpdMatrix& a, double p) {
  const SymEig eig = sym_eig(a.matrix());
  require_pd(eig, "spd_power");
  if (p == 1.0) return a;
  if (p == 0.0) return SpdMatrix::identity(a.dim());
  return SpdMatrix::assume(spectral_map(eig, [p](double l) { return std::pow(l, p); }));
}

Matrix spd_log(const SpdMatrix& a) {
  const SymEig eig = sym_eig(a.matrix());
  require_pd(eig, "spd_log");
  return spectral_map(eig, [](double l) { return std::log(l); });
}

SpdMatrix spd_exp(const Matrix& s) {
  const SymEig eig = sym_eig(s);
  // exp must stay finite and above pd_tol for the result to be a valid SpdMatrix.
  if (eig.values(eig.values.size() - 1) > 700.0 || eig.values(0) < std::log(kPdTol)) {
    fail(ErrorCode::StepOverflow, "spd_exp: eigenvalue range [" + std::to_string(eig.values(0)) + ", " +
                                      std::to_string(eig.values(eig.values.size() - 1)) +
                                      "] leaves double range or the pd floor");
  }
  return SpdMatrix::assume(spectral_map(eig, [](double l) { return std::exp(l); }));
}

SpdMatrix spd_sqrt(const SpdMatrix& a) {
  const SymEig eig = sym_eig(a.matrix());
  require_pd(eig, "spd_sqrt");
  return SpdMatrix::assume(spectral_map(eig, [](double l) { return std::sqrt(l); }));
}

SpdMatrix spd_invsqrt(const SpdMatrix& a) {
  const SymEig eig = sym_eig(a.matrix());
  require_pd(eig, "spd_invsqrt");
  return SpdMatrix::assume(spectral_map(eig, [](double l) { return 1.0 / std::sqrt(l); }));
}

SpdMatrix spd_inverse(const SpdMatrix& a) {
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "spd_inverse: Cholesky failed");
  const Eigen::Index d = a.dim();
  return SpdMatrix::assume(llt.solve(Matrix::Identity(d, d)));
}

double log_det(const SpdMatrix& a) {
  Eigen::LLT<Matrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "log_det: Cholesky failed");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

SpdMatrix regularize(const Matrix& a, double eps) {
  require_square(a, "regularize");
  const auto d = static_cast<double>(a.rows());
  if (eps < 0.0) eps = 1e-8 * a.trace() / d;
  Matrix out = sym(a);
  out.diagonal().array() += eps;
  return SpdMatrix::checked(std::move(out));
}

GenEigSolver::GenEigSolver(const SpdMatrix& y) : llt_(y.matrix()) {
  if (llt_.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "gen_eigvals: Cholesky of Y failed");
  chol_ = llt_.matrixL();
}

Vector GenEigSolver::eigvals(const SpdMatrix& x) const {
  if (x.dim() != chol_.rows()) {
    fail(ErrorCode::DimensionMismatch, "gen_eigvals: dims " + std::to_string(x.dim()) + " vs " +
                                           std::to_string(chol_.rows()));
  }
  // L^{-1} X L^{-T} is congruent to Y^{-1/2} X Y^{-1/2} and shares its spectrum.
  const auto lower = chol_.triangularView<Eigen::Lower>();
  Matrix m = lower.solve(x.matrix());
  m = lower.solve(m.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(m), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NumericalBreakdown, "gen_eigvals: eigensolver failed");
  Vector values = es.eigenvalues();
  if (!(values(0) > 0.0) || !values.allFinite()) {
    fail(ErrorCode::NotPositiveDefinite, "gen_eigvals: non-positive generalized eigenvalue");
  }
  return values;
}

Vector gen_eigvals(const SpdMatrix& x, const SpdMatrix& y) {
  if (x.dim() != y.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "gen_eigvals: dims " + std::to_string(x.dim()) + " vs " + std::to_string(y.dim()));
  }
  return GenEigSolver(y).eigvals(x);
}

}  // namespace spdkit
