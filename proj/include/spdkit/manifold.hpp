#pragma once

#include <functional>
#include <vector>

#include "spdkit/spd.hpp"

namespace spdkit {

/// A symmetric matrix in the tangent space at `base`.
struct TangentVector {
  SpdMatrix base;
  Matrix value;
};

struct LineSearchConfig {
  double c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
  double initial_step = 1.0;
};

/// Riemannian conjugate gradient settings. Fletcher-Reeves directions, restarted
/// with steepest descent whenever the transported direction stops descending.
struct RcgConfig {
  int max_iters = 300;
  double rel_obj_tol = 1e-6;
  double grad_norm_tol = 1e-6;
  // Iterations spanned by the relative-objective stopping test.
  int window = 5;
  LineSearchConfig line_search;

  void validate() const;
};

// Affine-invariant metric tr(B^{-1} xi B^{-1} eta).
double inner(const SpdMatrix& base, const Matrix& xi, const Matrix& eta);

// B sym(egrad) B
TangentVector riemannian_grad(const SpdMatrix& base, const Matrix& egrad);

// B^{1/2} Exp(step * B^{-1/2} xi B^{-1/2}) B^{1/2}. Throws StepOverflow when the
// step leaves double range; callers shrink and retry.
SpdMatrix retract(const SpdMatrix& base, const TangentVector& xi, double step);

// Z P Z^T with Z = (Y X^{-1})^{1/2}; P must be based at X.
TangentVector parallel_transport(const TangentVector& p, const SpdMatrix& from, const SpdMatrix& to);

/// Points along the retraction curve t -> retract(B, xi, t), with the
/// factorizations shared across line-search trials.
class Geodesic {
 public:
  Geodesic(const SpdMatrix& base, const Matrix& xi);
  SpdMatrix at(double t) const;

 private:
  SpdMatrix base_;
  Matrix sqrt_base_;
  Matrix rotation_;
  Vector exponents_;
  double min_base_eig_;
};

struct SpdProblem {
  std::function<double(const SpdMatrix&)> objective;
  std::function<Matrix(const SpdMatrix&)> egrad;
};

enum class StopReason { GradientNorm, RelativeObjective, MaxIterations, LineSearchFailed };

// Per accepted iterate, for inspecting the optimizer after the fact.
struct RcgStep {
  double step = 0.0;
  double slope = 0.0;      // <grad, direction> at the old iterate
  double eta = 0.0;        // Fletcher-Reeves coefficient for the next direction
  bool restarted = false;  // direction reset to steepest descent before the search
  double grad_norm = 0.0;  // at the old iterate
};

struct RcgResult {
  SpdMatrix point;
  std::vector<double> trace;  // objective at the start and after each accepted step
  std::vector<RcgStep> steps;
  StopReason reason = StopReason::MaxIterations;
};

RcgResult rcg_minimize(const SpdProblem& problem, const SpdMatrix& start, const RcgConfig& cfg);

/// One Armijo-backtracked descent step for positive parameters, taken in
/// log coordinates and clamped to [floor, ceiling]. Returns `theta` unchanged
/// when no trial step decreases `objective` enough.
Vector positive_scalar_step(const std::function<double(const Vector&)>& objective, const Vector& theta,
                            const Vector& egrad, const RcgConfig& cfg, double floor, double ceiling);

}  // namespace spdkit
