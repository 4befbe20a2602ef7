#include "spdkit/manifold.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spdkit/error.hpp"

namespace spdkit {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": dims " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

void RcgConfig::validate() const {
  if (max_iters < 1 || !(rel_obj_tol > 0.0) || !(grad_norm_tol > 0.0) || window < 1) {
    fail(ErrorCode::InvalidInput, "RcgConfig: tolerances must be positive and max_iters >= 1");
  }
  const auto& ls = line_search;
  if (!(ls.c1 > 0.0 && ls.c1 < 1.0) || !(ls.shrink > 0.0 && ls.shrink < 1.0) || ls.max_backtracks < 0 ||
      !(ls.initial_step > 0.0)) {
    fail(ErrorCode::InvalidInput, "RcgConfig: invalid line-search settings");
  }
}

double inner(const SpdMatrix& base, const Matrix& xi, const Matrix& eta) {
  require_same_dim(base.dim(), xi.rows(), "inner");
  require_same_dim(base.dim(), eta.rows(), "inner");
  Eigen::LLT<Matrix> llt(base.matrix());
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotPositiveDefinite, "inner: Cholesky of base failed");
  const Matrix a = llt.solve(xi);
  const Matrix b = llt.solve(eta);
  // tr(A B) without forming the product.
  return (a.transpose().array() * b.array()).sum();
}

TangentVector riemannian_grad(const SpdMatrix& base, const Matrix& egrad) {
  require_same_dim(base.dim(), egrad.rows(), "riemannian_grad");
  require_same_dim(egrad.rows(), egrad.cols(), "riemannian_grad");
  const Matrix& b = base.matrix();
  return {base, sym(b * sym(egrad) * b)};
}

Geodesic::Geodesic(const SpdMatrix& base, const Matrix& xi) : base_(base) {
  require_same_dim(base.dim(), xi.rows(), "retract");
  require_same_dim(xi.rows(), xi.cols(), "retract");
  const SymEig be = sym_eig(base.matrix());
  if (!(be.values(0) > kPdTol)) fail(ErrorCode::NotPositiveDefinite, "retract: base is not positive definite");
  min_base_eig_ = be.values(0);
  sqrt_base_ = spectral_map(be, [](double l) { return std::sqrt(l); });
  const Matrix inv_sqrt = spectral_map(be, [](double l) { return 1.0 / std::sqrt(l); });
  const SymEig me = sym_eig(inv_sqrt * sym(xi) * inv_sqrt);
  rotation_ = sqrt_base_ * me.vectors;
  exponents_ = me.values;
}

SpdMatrix Geodesic::at(double t) const {
  if (t == 0.0) return base_;
  const Vector scaled = t * exponents_;
  if (!scaled.allFinite() || scaled.maxCoeff() > 700.0 ||
      std::log(min_base_eig_) + scaled.minCoeff() < std::log(kPdTol)) {
    fail(ErrorCode::StepOverflow, "retract: step " + std::to_string(t) + " leaves the representable range");
  }
  const Vector e = scaled.array().exp().matrix();
  return SpdMatrix::assume(rotation_ * e.asDiagonal() * rotation_.transpose());
}

SpdMatrix retract(const SpdMatrix& base, const TangentVector& xi, double step) {
  if (step == 0.0) return base;
  return Geodesic(base, xi.value).at(step);
}

TangentVector parallel_transport(const TangentVector& p, const SpdMatrix& from, const SpdMatrix& to) {
  require_same_dim(p.value.rows(), from.dim(), "parallel_transport");
  require_same_dim(from.dim(), to.dim(), "parallel_transport");
  // (Y X^{-1})^{1/2} = X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{-1/2}
  const SymEig fe = sym_eig(from.matrix());
  if (!(fe.values(0) > kPdTol)) fail(ErrorCode::NotPositiveDefinite, "parallel_transport: X not positive definite");
  const Matrix sqrt_x = spectral_map(fe, [](double l) { return std::sqrt(l); });
  const Matrix inv_sqrt_x = spectral_map(fe, [](double l) { return 1.0 / std::sqrt(l); });
  const SymEig me = sym_eig(inv_sqrt_x * to.matrix() * inv_sqrt_x);
  const Matrix mid = spectral_map(me, [](double l) { return std::sqrt(std::max(l, 0.0)); });
  const Matrix z = sqrt_x * mid * inv_sqrt_x;
  return {to, sym(z * p.value * z.transpose())};
}

RcgResult rcg_minimize(const SpdProblem& problem, const SpdMatrix& start, const RcgConfig& cfg) {
  cfg.validate();
  const auto& ls = cfg.line_search;

  RcgResult out;
  SpdMatrix point = start;
  double value = problem.objective(point);
  if (!std::isfinite(value)) fail(ErrorCode::InvalidStart, "rcg_minimize: objective is not finite at the start");
  out.trace.push_back(value);

  auto riemannian = [&](const SpdMatrix& at) {
    Matrix eg = problem.egrad(at);
    if (!eg.allFinite()) fail(ErrorCode::InvalidGradient, "rcg_minimize: non-finite Euclidean gradient");
    return riemannian_grad(at, eg).value;
  };

  Matrix grad = riemannian(point);
  double grad_sq = inner(point, grad, grad);
  Matrix direction = -grad;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (std::sqrt(std::max(grad_sq, 0.0)) < cfg.grad_norm_tol) {
      out.reason = StopReason::GradientNorm;
      out.point = point;
      return out;
    }

    RcgStep rec;
    rec.grad_norm = std::sqrt(grad_sq);
    double slope = inner(point, grad, direction);
    if (!(slope < 0.0)) {
      direction = -grad;
      slope = -grad_sq;
      rec.restarted = true;
    }

    bool accepted = false;
    SpdMatrix next;
    double next_value = value;
    double step = 0.0;
    for (;;) {
      const Geodesic curve(point, direction);
      step = ls.initial_step;
      for (int b = 0; b <= ls.max_backtracks; ++b, step *= ls.shrink) {
        SpdMatrix trial;
        double trial_value;
        try {
          trial = curve.at(step);
          trial_value = problem.objective(trial);
        } catch (const Error& e) {
          if (is_numerical(e.code())) continue;
          throw;
        }
        if (std::isfinite(trial_value) && trial_value <= value + ls.c1 * step * slope) {
          next = std::move(trial);
          next_value = trial_value;
          accepted = true;
          break;
        }
      }
      if (accepted || rec.restarted) break;
      // Conjugate direction failed; retry once along steepest descent.
      direction = -grad;
      slope = -grad_sq;
      rec.restarted = true;
    }
    if (!accepted) {
      out.reason = StopReason::LineSearchFailed;
      out.point = point;
      return out;
    }

    const Matrix next_grad = riemannian(next);
    const double next_grad_sq = inner(next, next_grad, next_grad);
    const double eta = grad_sq > 0.0 ? next_grad_sq / grad_sq : 0.0;
    const Matrix carried = parallel_transport({point, direction}, point, next).value;

    rec.step = step;
    rec.slope = slope;
    rec.eta = eta;
    out.steps.push_back(rec);

    direction = -next_grad + eta * carried;
    point = std::move(next);
    value = next_value;
    grad = next_grad;
    grad_sq = next_grad_sq;
    out.trace.push_back(value);

    const auto n = out.trace.size();
    if (n > static_cast<std::size_t>(cfg.window)) {
      const double past = out.trace[n - 1 - static_cast<std::size_t>(cfg.window)];
      const double denom = std::max(std::abs(past), std::numeric_limits<double>::min());
      if (std::abs(past - value) / denom < cfg.rel_obj_tol) {
        out.reason = StopReason::RelativeObjective;
        out.point = point;
        return out;
      }
    }
  }
  out.reason = StopReason::MaxIterations;
  out.point = point;
  return out;
}

Vector positive_scalar_step(const std::function<double(const Vector&)>& objective, const Vector& theta,
                            const Vector& egrad, const RcgConfig& cfg, double floor, double ceiling) {
  if (theta.size() != egrad.size()) fail(ErrorCode::DimensionMismatch, "positive_scalar_step: size mismatch");
  if (!egrad.allFinite()) fail(ErrorCode::InvalidGradient, "positive_scalar_step: non-finite gradient");
  if (theta.size() == 0 || theta.minCoeff() < floor || !theta.allFinite()) {
    fail(ErrorCode::InvalidInput, "positive_scalar_step: parameters must be finite and >= floor");
  }
  // d f / d log(theta) = theta * d f / d theta
  const Vector log_grad = theta.cwiseProduct(egrad);
  if (log_grad.squaredNorm() == 0.0) return theta;

  const double value = objective(theta);
  if (!std::isfinite(value)) fail(ErrorCode::InvalidStart, "positive_scalar_step: objective not finite");
  const Vector log_theta = theta.array().log().matrix();
  const auto& ls = cfg.line_search;
  double step = ls.initial_step;
  for (int b = 0; b <= ls.max_backtracks; ++b, step *= ls.shrink) {
    Vector trial = (log_theta - step * log_grad).array().exp().matrix();
    trial = trial.cwiseMax(floor).cwiseMin(ceiling);
    const Vector moved = trial.array().log().matrix() - log_theta;
    const double predicted = log_grad.dot(moved);
    if (!(predicted < 0.0)) continue;
    double trial_value;
    try {
      trial_value = objective(trial);
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      continue;
    }
    if (std::isfinite(trial_value) && trial_value <= value + ls.c1 * predicted) return trial;
  }
  return theta;
}

}  // namespace spdkit
