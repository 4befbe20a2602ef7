#pragma once

// Shared fixtures for the unit and acceptance tests: random SPD draws and
// central finite differences.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "spdkit/iddl.hpp"
#include "spdkit/spd.hpp"

namespace spdkit::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Matrix random_symmetric(Eigen::Index d, std::mt19937_64& rng) {
  const Matrix a = random_matrix(d, d, rng);
  return (a + a.transpose()) / 2.0;
}

// Q diag(e^{s}) Q^T with s uniform in [-spread, spread]; condition number <= e^{2 spread}.
inline SpdMatrix random_spd(Eigen::Index d, std::mt19937_64& rng, double spread = 1.0) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(d, d, rng));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> unif(-spread, spread);
  Vector ev(d);
  for (Eigen::Index i = 0; i < d; ++i) ev(i) = std::exp(unif(rng));
  return SpdMatrix::checked(sym(q * ev.asDiagonal() * q.transpose()));
}

inline double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

// Directional derivative of f at B along symmetric E, by central differences.
inline double directional_fd(const std::function<double(const SpdMatrix&)>& f, const SpdMatrix& b, const Matrix& e,
                             double h) {
  return central_difference([&](double t) { return f(SpdMatrix::checked(b.matrix() + t * e)); }, h);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max({1e-300, a.norm(), b.norm()});
}

// Random labeled samples, dictionary, parameters and classifier for gradient checks.
struct Instance {
  LabeledSpdDataset data;
  IddlModel model;
};

inline Instance random_instance(std::uint64_t seed, Eigen::Index d, int n, int count, int labels, Variant mode) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.data.label_count = labels;
  for (int i = 0; i < count; ++i) {
    inst.data.samples.push_back(random_spd(d, rng, 0.8));
    inst.data.labels.push_back(1 + i % labels);
  }
  for (int k = 0; k < n; ++k) inst.model.dictionary.atoms.push_back(random_spd(d, rng, 0.8));
  std::uniform_real_distribution<double> unif(0.2, 2.5);
  inst.model.params = AbldParams::make(mode, n);
  if (mode == Variant::VectorFree) {
    for (int k = 0; k < n; ++k) {
      inst.model.params.alpha(k) = unif(rng);
      inst.model.params.beta(k) = unif(rng);
    }
  } else if (mode == Variant::VectorTied) {
    for (int k = 0; k < n; ++k) inst.model.params.alpha(k) = inst.model.params.beta(k) = unif(rng);
  } else if (mode == Variant::Scalar) {
    inst.model.params = AbldParams::make(mode, n, unif(rng), unif(rng));
  }
  inst.model.label_count = labels;
  inst.model.w = random_matrix(labels, n, rng);
  inst.model.gamma = 0.1;
  return inst;
}

// Central-difference gradient in B over the symmetric coordinate basis; an
// off-diagonal perturbation moves both (i, j) and (j, i).
inline Matrix fd_matrix_gradient(const std::function<double(const SpdMatrix&)>& f, const SpdMatrix& b, double h) {
  const auto d = b.dim();
  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = e(j, i) = 1.0;
      const double dd = directional_fd(f, b, e, h);
      g(i, j) = g(j, i) = (i == j) ? dd : dd / 2.0;
    }
  }
  return g;
}

inline Matrix fd_atom_gradient(Instance& inst, Eigen::Index k) {
  const auto kk = static_cast<std::size_t>(k);
  const SpdMatrix base = inst.model.dictionary.atoms[kk];
  auto f = [&](const SpdMatrix& b) {
    inst.model.dictionary.atoms[kk] = b;
    return objective(inst.data, inst.model);
  };
  Matrix g = fd_matrix_gradient(f, base, 1e-5);
  inst.model.dictionary.atoms[kk] = base;
  return g;
}

}  // namespace spdkit::testing
