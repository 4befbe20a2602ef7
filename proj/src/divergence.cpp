#include "spdkit/divergence.hpp"

#include <cmath>
#include <string>

#include "spdkit/error.hpp"

namespace spdkit {

namespace {

void require_positive(double alpha, double beta, const char* what) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": alpha and beta must be finite and positive (got " +
                                      std::to_string(alpha) + ", " + std::to_string(beta) + ")");
  }
}

void require_same_dim(const SpdMatrix& x, const SpdMatrix& y, const char* what) {
  if (x.dim() != y.dim()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": dims " + std::to_string(x.dim()) + " vs " + std::to_string(y.dim()));
  }
}

// log(alpha l^beta + beta l^-alpha) - log(alpha + beta), with l = exp(log_l).
double log_mixture_ratio(double log_l, double alpha, double beta) {
  const double up = beta * log_l;
  const double down = -alpha * log_l;
  if (std::abs(up) < 1.0 && std::abs(down) < 1.0) {
    const double excess = (alpha * std::expm1(up) + beta * std::expm1(down)) / (alpha + beta);
    if (!(excess > -1.0)) fail(ErrorCode::DegenerateDivergence, "abld: non-positive log-det argument");
    return std::log1p(excess);
  }
  const double a = std::log(alpha) + up;
  const double b = std::log(beta) + down;
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi)) - std::log(alpha + beta);
}

}  // namespace

char variant_tag(Variant v) { return static_cast<char>(v); }

Variant parse_variant(std::string_view tag) {
  if (tag.size() == 1) {
    switch (tag[0]) {
      case 'S': case 's': return Variant::Scalar;
      case 'V': case 'v': return Variant::VectorTied;
      case 'N': case 'n': return Variant::VectorFree;
      case 'A': case 'a': return Variant::Airm;
      case 'B': case 'b': return Variant::Burg;
      default: break;
    }
  }
  fail(ErrorCode::InvalidInput, "unknown variant '" + std::string(tag) + "' (expected S, V, N, A or B)");
}

bool params_frozen(Variant v) { return v == Variant::Airm || v == Variant::Burg; }

AbldParams AbldParams::make(Variant mode, Eigen::Index n, double alpha, double beta) {
  if (n < 1) fail(ErrorCode::InvalidInput, "AbldParams: need at least one atom");
  if (mode == Variant::Airm) alpha = beta = 0.0;
  if (mode == Variant::Burg) alpha = beta = 1.0;
  if (mode == Variant::VectorTied && alpha != beta) {
    fail(ErrorCode::InvalidInput, "AbldParams: variant V requires alpha == beta");
  }
  AbldParams p{mode, Vector::Constant(n, alpha), Vector::Constant(n, beta)};
  p.validate();
  return p;
}

void AbldParams::validate() const {
  if (alpha.size() != beta.size() || alpha.size() < 1) {
    fail(ErrorCode::InvalidInput, "AbldParams: alpha and beta must be non-empty and of equal length");
  }
  if (!alpha.allFinite() || !beta.allFinite()) fail(ErrorCode::InvalidInput, "AbldParams: non-finite entry");
  switch (mode) {
    case Variant::Airm:
      if (!alpha.isZero(0.0) || !beta.isZero(0.0)) fail(ErrorCode::InvalidInput, "AbldParams: mode A pins 0");
      return;
    case Variant::Burg:
      if ((alpha.array() != 1.0).any() || (beta.array() != 1.0).any()) {
        fail(ErrorCode::InvalidInput, "AbldParams: mode B pins alpha = beta = 1");
      }
      return;
    case Variant::Scalar:
      if ((alpha.array() != alpha(0)).any() || (beta.array() != beta(0)).any()) {
        fail(ErrorCode::InvalidInput, "AbldParams: mode S shares one pair across atoms");
      }
      break;
    case Variant::VectorTied:
      if (alpha != beta) fail(ErrorCode::InvalidInput, "AbldParams: mode V ties alpha_k = beta_k");
      break;
    case Variant::VectorFree:
      break;
  }
  if (alpha.minCoeff() < kParamFloor || beta.minCoeff() < kParamFloor) {
    fail(ErrorCode::InvalidInput, "AbldParams: parameters below param_floor");
  }
}

double abld_term(double lambda, double alpha, double beta) {
  return log_mixture_ratio(std::log(lambda), alpha, beta) / (alpha * beta);
}

double abld_term_dalpha(double lambda, double alpha, double beta) {
  const double log_l = std::log(lambda);
  const double a = std::log(alpha) + beta * log_l;
  const double b = std::log(beta) - alpha * log_l;
  // Share of alpha l^beta in the mixture, computed without overflow.
  const double w_up = 1.0 / (1.0 + std::exp(b - a));
  const double w_down = 1.0 - w_up;
  const double bracket =
      w_up - alpha * log_l * w_down - alpha / (alpha + beta) - log_mixture_ratio(log_l, alpha, beta);
  if (!std::isfinite(bracket)) fail(ErrorCode::NumericalBreakdown, "abld_term_dalpha: non-finite power");
  return bracket / (alpha * alpha * beta);
}

double abld_term_dbeta(double lambda, double alpha, double beta) {
  // D(X||Y; a, b) = D(Y||X; b, a), and Y X^{-1} has eigenvalues 1/lambda.
  return abld_term_dalpha(1.0 / lambda, beta, alpha);
}

double abld_from_eigvals(const Vector& lambdas, double alpha, double beta) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) sum += abld_term(lambdas(i), alpha, beta);
  return sum;
}

double airm_from_eigvals(const Vector& lambdas) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = std::log(lambdas(i));
    sum += l * l;
  }
  return sum;
}

double abld(const SpdMatrix& x, const SpdMatrix& y, double alpha, double beta) {
  require_positive(alpha, beta, "abld");
  require_same_dim(x, y, "abld");
  return abld_from_eigvals(gen_eigvals(x, y), alpha, beta);
}

double abld_airm(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "abld_airm");
  return airm_from_eigvals(gen_eigvals(x, y));
}

double jbld(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "jbld");
  Eigen::LLT<Matrix> mid(0.5 * (x.matrix() + y.matrix()));
  if (mid.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "jbld: (X+Y)/2 is not positive definite");
  const double log_det_mid = 2.0 * mid.matrixLLT().diagonal().array().log().sum();
  return log_det_mid - 0.5 * (log_det(x) + log_det(y));
}

double jeffreys_kl(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "jeffreys_kl");
  Eigen::LLT<Matrix> lx(x.matrix());
  Eigen::LLT<Matrix> ly(y.matrix());
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success) {
    fail(ErrorCode::NotPositiveDefinite, "jeffreys_kl: Cholesky failed");
  }
  // tr(X Y^{-1}) = tr(Y^{-1} X)
  const double t_xy = ly.solve(x.matrix()).trace();
  const double t_yx = lx.solve(y.matrix()).trace();
  return 0.5 * (t_xy + t_yx) - static_cast<double>(x.dim());
}

double burg(const SpdMatrix& x, const SpdMatrix& y) {
  require_same_dim(x, y, "burg");
  Eigen::LLT<Matrix> ly(y.matrix());
  if (ly.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "burg: Cholesky of Y failed");
  const double t_xy = ly.solve(x.matrix()).trace();
  const double log_det_y = 2.0 * ly.matrixLLT().diagonal().array().log().sum();
  return t_xy - (log_det(x) - log_det_y) - static_cast<double>(x.dim());
}

Vector degeneracy_margin(const Vector& lambdas, double alpha, double beta) {
  if (alpha == 0.0 || beta == 0.0 || alpha + beta == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta)) {
    fail(ErrorCode::InvalidInput, "degeneracy_margin: need alpha, beta, alpha+beta all nonzero");
  }
  if ((alpha > 0.0) == (beta > 0.0)) {
    fail(ErrorCode::InvalidInput, "degeneracy_margin: bound only applies to mixed-sign (alpha, beta)");
  }
  const double exponent = 1.0 / (alpha + beta);
  if (alpha > 0.0) {
    const double bound = std::pow(std::abs(alpha / beta), exponent);
    return (lambdas.array() - bound).matrix();
  }
  const double bound = std::pow(std::abs(beta / alpha), exponent);
  return (bound - lambdas.array()).matrix();
}

Vector degeneracy_margin(const SpdMatrix& x, const SpdMatrix& y, double alpha, double beta) {
  require_same_dim(x, y, "degeneracy_margin");
  // Spectrum of X^{-1} Y equals that of Y X^{-1}.
  return degeneracy_margin(gen_eigvals(y, x), alpha, beta);
}

}  // namespace spdkit
