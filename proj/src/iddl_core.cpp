#include <cmath>
#include <string>

#include "spdkit/iddl.hpp"
#include "spdkit/parallel.hpp"

namespace spdkit {

namespace {

std::string index_str(std::size_t i) { return std::to_string(i); }

void require_atom(const IddlModel& model, Eigen::Index k) {
  if (k < 0 || k >= model.dictionary.size()) {
    fail(ErrorCode::InvalidInput, "atom index " + std::to_string(k) + " out of range");
  }
}

void require_compatible(const LabeledSpdDataset& data, const IddlModel& model) {
  model.validate();
  if (data.size() == 0) fail(ErrorCode::InvalidDataset, "empty dataset");
  if (data.dim() != model.dictionary.dim()) {
    fail(ErrorCode::DimensionMismatch, "dataset dim " + std::to_string(data.dim()) + " vs model dim " +
                                           std::to_string(model.dictionary.dim()));
  }
  for (int label : data.labels) {
    if (label < 1 || label > model.label_count) {
      fail(ErrorCode::InvalidDataset, "label " + std::to_string(label) + " outside the model's label space");
    }
  }
}

// -W^T (H - W V), one column per sample.
Matrix zeta_all(const Matrix& encodings, const Matrix& targets, const Matrix& w) {
  return -(w.transpose() * (targets - w * encodings));
}

// Sums per-sample terms in index order.
Matrix ordered_sum(const std::vector<Matrix>& terms, Eigen::Index d) {
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& t : terms) {
    if (t.size() != 0) acc += t;
  }
  return acc;
}

}  // namespace

void LabeledSpdDataset::validate(bool every_class) const {
  if (samples.empty()) fail(ErrorCode::InvalidDataset, "dataset has no samples");
  if (samples.size() != labels.size()) fail(ErrorCode::InvalidDataset, "samples and labels differ in length");
  if (label_count < 1) fail(ErrorCode::InvalidDataset, "label_count must be >= 1");
  const auto d = samples.front().dim();
  std::vector<int> counts(static_cast<std::size_t>(label_count), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].dim() != d) fail(ErrorCode::InvalidDataset, "sample " + index_str(i) + " has a different dim");
    if (labels[i] < 1 || labels[i] > label_count) {
      fail(ErrorCode::InvalidDataset, "label of sample " + index_str(i) + " outside [1, L]");
    }
    ++counts[static_cast<std::size_t>(labels[i] - 1)];
  }
  if (every_class) {
    for (int c = 0; c < label_count; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        fail(ErrorCode::InvalidDataset, "class " + std::to_string(c + 1) + " has no samples");
      }
    }
  }
}

void LabeledSpdDataset::precompute() {
  factors.reset();
  factors = factors_of(*this);
}

std::shared_ptr<const FactorCache> factors_of(const LabeledSpdDataset& data) {
  if (data.factors && data.factors->size() == data.size()) return data.factors;
  auto cache = std::make_shared<FactorCache>(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const SymEig eig = sym_eig(data.samples[i].matrix());
    if (!(eig.values(0) > kPdTol)) {
      fail(ErrorCode::NotPositiveDefinite, "sample " + index_str(i) + " is not positive definite");
    }
    (*cache)[i] = SampleFactors{spectral_map(eig, [](double l) { return 1.0 / l; }),
                                spectral_map(eig, [](double l) { return std::sqrt(l); }),
                                spectral_map(eig, [](double l) { return 1.0 / std::sqrt(l); })};
  });
  return cache;
}

void IddlModel::validate() const {
  const auto n = dictionary.size();
  if (n < 1) fail(ErrorCode::InvalidInput, "model has an empty dictionary");
  for (const auto& atom : dictionary.atoms) {
    if (atom.dim() != dictionary.dim()) fail(ErrorCode::InvalidInput, "atoms differ in dimension");
  }
  if (params.size() != n) fail(ErrorCode::InvalidInput, "parameter count differs from atom count");
  params.validate();
  if (label_count < 1) fail(ErrorCode::InvalidInput, "model label_count must be >= 1");
  if (w.rows() != label_count || w.cols() != n) {
    fail(ErrorCode::InvalidInput, "classifier shape must be L x n");
  }
  if (!(gamma >= 0.0)) fail(ErrorCode::InvalidInput, "gamma must be >= 0");
}

Vector encode(const SpdMatrix& x, const Dictionary& dict, const AbldParams& params) {
  if (params.size() != dict.size()) fail(ErrorCode::InvalidInput, "encode: parameter count differs from atom count");
  Vector v(dict.size());
  for (Eigen::Index k = 0; k < dict.size(); ++k) {
    try {
      const Vector lambdas = GenEigSolver(dict.atoms[static_cast<std::size_t>(k)]).eigvals(x);
      v(k) = params.mode == Variant::Airm ? airm_from_eigvals(lambdas)
                                          : abld_from_eigvals(lambdas, params.alpha(k), params.beta(k));
    } catch (const Error& e) {
      throw Error(e.code(), std::string("encode: atom ") + std::to_string(k) + ": " + e.what());
    }
  }
  return v;
}

Matrix encode_all(const LabeledSpdDataset& data, const Dictionary& dict, const AbldParams& params) {
  if (params.size() != dict.size()) fail(ErrorCode::InvalidInput, "encode: parameter count differs from atom count");
  Matrix out(dict.size(), static_cast<Eigen::Index>(data.size()));
  for (Eigen::Index k = 0; k < dict.size(); ++k) {
    const GenEigSolver solver(dict.atoms[static_cast<std::size_t>(k)]);
    parallel_for(data.size(), [&](std::size_t i) {
      try {
        const Vector lambdas = solver.eigvals(data.samples[i]);
        out(k, static_cast<Eigen::Index>(i)) =
            params.mode == Variant::Airm ? airm_from_eigvals(lambdas)
                                         : abld_from_eigvals(lambdas, params.alpha(k), params.beta(k));
      } catch (const Error& e) {
        throw Error(e.code(), "encode: sample " + index_str(i) + ", atom " + std::to_string(k) + ": " + e.what());
      }
    });
  }
  return out;
}

Matrix one_hot(const std::vector<int>& labels, int label_count) {
  Matrix h = Matrix::Zero(label_count, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > label_count) fail(ErrorCode::InvalidDataset, "label outside [1, L]");
    h(labels[i] - 1, static_cast<Eigen::Index>(i)) = 1.0;
  }
  return h;
}

double ridge_loss(const Matrix& encodings, const Matrix& targets, const Matrix& w, double gamma) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < encodings.cols(); ++i) {
    sum += 0.5 * (targets.col(i) - w * encodings.col(i)).squaredNorm();
  }
  return sum + gamma * w.squaredNorm();
}

double objective(const LabeledSpdDataset& data, const IddlModel& model) {
  require_compatible(data, model);
  const Matrix v = encode_all(data, model.dictionary, model.params);
  return ridge_loss(v, one_hot(data.labels, model.label_count), model.w, model.gamma);
}

Vector zeta(const Matrix& w, const Vector& v, const Vector& h) {
  if (w.cols() != v.size() || w.rows() != h.size()) fail(ErrorCode::DimensionMismatch, "zeta: shape mismatch");
  return -(w.transpose() * (h - w * v));
}

Matrix solve_ridge(const Matrix& encodings, const Matrix& targets, double gamma) {
  if (encodings.cols() != targets.cols()) fail(ErrorCode::DimensionMismatch, "solve_ridge: V and H differ in N");
  if (!(gamma >= 0.0)) fail(ErrorCode::InvalidInput, "solve_ridge: gamma must be >= 0");
  Matrix gram = encodings * encodings.transpose();
  gram.diagonal().array() += 2.0 * gamma;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    fail(ErrorCode::SingularSystem, "solve_ridge: V V^T + 2 gamma I is singular; use gamma > 0");
  }
  // W gram = H V^T, solved as gram W^T = V H^T.
  Matrix wt = llt.solve(encodings * targets.transpose());
  return wt.transpose();
}

Matrix solve_w(const LabeledSpdDataset& data, const IddlModel& model) {
  const Matrix v = encode_all(data, model.dictionary, model.params);
  return solve_ridge(v, one_hot(data.labels, model.label_count), model.gamma);
}

Matrix atom_egrad(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom, double alpha,
                  double beta) {
  const Eigen::Index d = atom.dim();
  const double theta = alpha + beta;
  const double p = beta / alpha;
  std::vector<Matrix> terms(factors.size());
  parallel_for(factors.size(), [&](std::size_t i) {
    const double z = zeta_k(static_cast<Eigen::Index>(i));
    if (z == 0.0) return;
    const auto& f = factors[i];
    const SymEig eig = schur_sym(f.inv_sqrt * atom.matrix() * f.inv_sqrt);
    if (!(eig.values(0) > 0.0)) {
      fail(ErrorCode::NumericalBreakdown, "grad_atom: sample " + index_str(i) + " factorization lost definiteness");
    }
    // delta^theta / (1 + p delta^theta), written to stay finite for large theta.
    Vector weight(d);
    for (Eigen::Index j = 0; j < d; ++j) weight(j) = 1.0 / (std::exp(-theta * std::log(eig.values(j))) + p);
    const Matrix left = f.sqrt * eig.vectors;       // Z^{-1/2} U
    const Matrix right = f.inv_sqrt * eig.vectors;  // (Z^{-1/2} U)^{-T}
    terms[i] = z * (left * weight.asDiagonal() * right.transpose());
  });
  Matrix core = (theta / (alpha * alpha)) * ordered_sum(terms, d);
  core.diagonal().array() -= zeta_k.sum() / alpha;
  Eigen::LLT<Matrix> llt(atom.matrix());
  if (llt.info() != Eigen::Success) fail(ErrorCode::NumericalBreakdown, "grad_atom: atom is not positive definite");
  return sym(llt.solve(core));
}

Matrix atom_egrad_naive(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom, double alpha,
                        double beta) {
  const Eigen::Index d = atom.dim();
  const double theta = alpha + beta;
  const double p = beta / alpha;
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix atom_inv = atom.matrix().inverse();
  Matrix total = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    const SpdMatrix m = SpdMatrix::assume(f.inv_sqrt * atom.matrix() * f.inv_sqrt);
    const Matrix m_pow = spd_power(m, theta).matrix();
    const Matrix g = p * theta * atom_inv * f.sqrt * m_pow * (eye + p * m_pow).inverse() * f.inv_sqrt;
    total += zeta_k(static_cast<Eigen::Index>(i)) * (g / (alpha * beta) - atom_inv / alpha);
  }
  return total;
}

Matrix atom_egrad_airm(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom) {
  const Eigen::Index d = atom.dim();
  std::vector<Matrix> terms(factors.size());
  parallel_for(factors.size(), [&](std::size_t i) {
    const double z = zeta_k(static_cast<Eigen::Index>(i));
    if (z == 0.0) return;
    const auto& f = factors[i];
    const SymEig eig = schur_sym(f.inv_sqrt * atom.matrix() * f.inv_sqrt);
    if (!(eig.values(0) > 0.0)) {
      fail(ErrorCode::NumericalBreakdown, "grad_atom_airm: sample " + index_str(i) + " lost definiteness");
    }
    // 2 Log(P) P^{-1} in the eigenbasis of P.
    const Vector weight = eig.values.unaryExpr([](double l) { return 2.0 * std::log(l) / l; });
    const Matrix side = f.inv_sqrt * eig.vectors;
    terms[i] = z * (side * weight.asDiagonal() * side.transpose());
  });
  return sym(ordered_sum(terms, d));
}

Matrix grad_atom(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k) {
  require_compatible(data, model);
  require_atom(model, k);
  if (model.params.mode == Variant::Airm) fail(ErrorCode::InvalidInput, "grad_atom: use grad_atom_airm in mode A");
  const Matrix v = encode_all(data, model.dictionary, model.params);
  const Matrix z = zeta_all(v, one_hot(data.labels, model.label_count), model.w);
  return atom_egrad(*factors_of(data), z.row(k).transpose(), model.dictionary.atoms[static_cast<std::size_t>(k)],
                    model.params.alpha(k), model.params.beta(k));
}

Matrix grad_atom_naive(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k) {
  require_compatible(data, model);
  require_atom(model, k);
  if (model.params.mode == Variant::Airm) fail(ErrorCode::InvalidInput, "grad_atom: use grad_atom_airm in mode A");
  const Matrix v = encode_all(data, model.dictionary, model.params);
  const Matrix z = zeta_all(v, one_hot(data.labels, model.label_count), model.w);
  return atom_egrad_naive(*factors_of(data), z.row(k).transpose(),
                          model.dictionary.atoms[static_cast<std::size_t>(k)], model.params.alpha(k),
                          model.params.beta(k));
}

Matrix grad_atom_airm(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k) {
  require_compatible(data, model);
  require_atom(model, k);
  if (model.params.mode != Variant::Airm) fail(ErrorCode::InvalidInput, "grad_atom_airm: model is not in mode A");
  const Matrix v = encode_all(data, model.dictionary, model.params);
  const Matrix z = zeta_all(v, one_hot(data.labels, model.label_count), model.w);
  return atom_egrad_airm(*factors_of(data), z.row(k).transpose(), model.dictionary.atoms[static_cast<std::size_t>(k)]);
}

ParamGradient grad_alpha_beta(const LabeledSpdDataset& data, const IddlModel& model) {
  require_compatible(data, model);
  if (model.params.mode == Variant::Airm) fail(ErrorCode::InvalidInput, "grad_alpha_beta: undefined in mode A");
  const auto n = model.dictionary.size();
  const auto count = data.size();
  std::vector<Matrix> lambdas(static_cast<std::size_t>(n));
  Matrix v(n, static_cast<Eigen::Index>(count));
  for (Eigen::Index k = 0; k < n; ++k) {
    const GenEigSolver solver(model.dictionary.atoms[static_cast<std::size_t>(k)]);
    auto& lk = lambdas[static_cast<std::size_t>(k)];
    lk.resize(data.dim(), static_cast<Eigen::Index>(count));
    parallel_for(count, [&](std::size_t i) {
      const auto col = static_cast<Eigen::Index>(i);
      lk.col(col) = solver.eigvals(data.samples[i]);
      v(k, col) = abld_from_eigvals(lk.col(col), model.params.alpha(k), model.params.beta(k));
    });
  }
  const Matrix z = zeta_all(v, one_hot(data.labels, model.label_count), model.w);
  ParamGradient g{Vector::Zero(n), Vector::Zero(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = model.params.alpha(k);
    const double b = model.params.beta(k);
    const auto& lk = lambdas[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < lk.cols(); ++i) {
      double da = 0.0;
      double db = 0.0;
      for (Eigen::Index j = 0; j < lk.rows(); ++j) {
        da += abld_term_dalpha(lk(j, i), a, b);
        db += abld_term_dbeta(lk(j, i), a, b);
      }
      g.alpha(k) += z(k, i) * da;
      g.beta(k) += z(k, i) * db;
    }
  }
  if (!g.alpha.allFinite() || !g.beta.allFinite()) {
    fail(ErrorCode::NumericalBreakdown, "grad_alpha_beta: non-finite gradient");
  }
  return g;
}

Vector pack_params(const AbldParams& params) {
  const auto n = params.size();
  switch (params.mode) {
    case Variant::Scalar: return Vector{{params.alpha(0), params.beta(0)}};
    case Variant::VectorTied: return params.alpha;
    case Variant::VectorFree: {
      Vector out(2 * n);
      out << params.alpha, params.beta;
      return out;
    }
    case Variant::Airm:
    case Variant::Burg: return Vector();
  }
  return Vector();
}

AbldParams unpack_params(const Vector& packed, Variant mode, Eigen::Index n) {
  AbldParams p;
  p.mode = mode;
  switch (mode) {
    case Variant::Scalar:
      if (packed.size() != 2) fail(ErrorCode::InvalidInput, "unpack_params: S expects 2 values");
      p.alpha = Vector::Constant(n, packed(0));
      p.beta = Vector::Constant(n, packed(1));
      break;
    case Variant::VectorTied:
      if (packed.size() != n) fail(ErrorCode::InvalidInput, "unpack_params: V expects n values");
      p.alpha = packed;
      p.beta = packed;
      break;
    case Variant::VectorFree:
      if (packed.size() != 2 * n) fail(ErrorCode::InvalidInput, "unpack_params: N expects 2n values");
      p.alpha = packed.head(n);
      p.beta = packed.tail(n);
      break;
    case Variant::Airm:
    case Variant::Burg:
      return AbldParams::make(mode, n);
  }
  return p;
}

Vector reduce_param_gradient(const ParamGradient& g, Variant mode) {
  switch (mode) {
    case Variant::Scalar: return Vector{{g.alpha.sum(), g.beta.sum()}};
    case Variant::VectorTied: return g.alpha + g.beta;
    case Variant::VectorFree: {
      Vector out(g.alpha.size() + g.beta.size());
      out << g.alpha, g.beta;
      return out;
    }
    case Variant::Airm:
    case Variant::Burg: return Vector();
  }
  return Vector();
}

double training_accuracy(const Matrix& encodings, const Matrix& w, const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  const Matrix scores = w * encodings;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < scores.cols(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < scores.rows(); ++r) {
      if (scores(r, i) > scores(best, i)) best = r;
    }
    if (best + 1 == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace spdkit
