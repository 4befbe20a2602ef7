#pragma once

#include <string_view>

#include "spdkit/spd.hpp"

namespace spdkit {

// Learned (alpha, beta) live in [kParamFloor, kParamCeiling]. Below the floor
// the 1/(alpha beta) prefactor amplifies rounding error; the origin itself is
// the AIRM branch and is reached through abld_airm.
inline constexpr double kParamFloor = 1e-3;
inline constexpr double kParamCeiling = 10.0;

/// How the per-atom divergence parameters are tied together.
enum class Variant : char {
  Scalar = 'S',      // one (alpha, beta) shared by all atoms
  VectorTied = 'V',  // per-atom, alpha_k == beta_k
  VectorFree = 'N',  // per-atom, independent
  Airm = 'A',        // frozen at the origin (squared AIRM)
  Burg = 'B',        // frozen at alpha = beta = 1
};

char variant_tag(Variant v);
Variant parse_variant(std::string_view tag);
bool params_frozen(Variant v);

struct AbldParams {
  Variant mode = Variant::Burg;
  Vector alpha;
  Vector beta;

  // Replicates (alpha, beta) over n atoms; modes A and B pin their values.
  static AbldParams make(Variant mode, Eigen::Index n, double alpha = 1.0, double beta = 1.0);

  Eigen::Index size() const { return alpha.size(); }

  // Throws InvalidInput when the mode constraints or the parameter box are violated.
  void validate() const;
};

// Per-eigenvalue summand of the eigenvalue form:
// (1/(alpha beta)) log((alpha l^beta + beta l^-alpha) / (alpha + beta)).
double abld_term(double lambda, double alpha, double beta);
double abld_term_dalpha(double lambda, double alpha, double beta);
double abld_term_dbeta(double lambda, double alpha, double beta);

double abld_from_eigvals(const Vector& lambdas, double alpha, double beta);
double airm_from_eigvals(const Vector& lambdas);

/// alpha-beta log-det divergence D(X || Y), evaluated on the generalized
/// eigenvalues of X Y^{-1}. Requires alpha, beta > 0; learned parameters are
/// additionally kept above kParamFloor by AbldParams.
double abld(const SpdMatrix& x, const SpdMatrix& y, double alpha, double beta);

// ||Log(X^{-1/2} Y X^{-1/2})||_F^2, the limit of abld at the origin.
double abld_airm(const SpdMatrix& x, const SpdMatrix& y);

// Closed forms, evaluated through Cholesky log-determinants and solves.
double jbld(const SpdMatrix& x, const SpdMatrix& y);
double jeffreys_kl(const SpdMatrix& x, const SpdMatrix& y);
double burg(const SpdMatrix& x, const SpdMatrix& y);

/// Slack of each eigenvalue of X^{-1} Y against the mixed-sign degeneracy
/// bound: lambda - |alpha/beta|^(1/(alpha+beta)) when alpha > 0 > beta,
/// |beta/alpha|^(1/(alpha+beta)) - lambda when alpha < 0 < beta.
/// A nonpositive entry flags the pair as degenerate.
Vector degeneracy_margin(const Vector& lambdas, double alpha, double beta);
Vector degeneracy_margin(const SpdMatrix& x, const SpdMatrix& y, double alpha, double beta);

}  // namespace spdkit
