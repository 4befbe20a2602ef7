#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spdkit/iddl.hpp"
#include "spdkit/parallel.hpp"

namespace spdkit {

namespace {

// Generalized eigenvalues of every sample against one atom, d x N.
Matrix atom_eigvals(const LabeledSpdDataset& data, const SpdMatrix& atom) {
  const GenEigSolver solver(atom);
  Matrix out(data.dim(), static_cast<Eigen::Index>(data.size()));
  parallel_for(data.size(), [&](std::size_t i) {
    out.col(static_cast<Eigen::Index>(i)) = solver.eigvals(data.samples[i]);
  });
  return out;
}

Vector encodings_from_eigvals(const Matrix& lambdas, const AbldParams& params, Eigen::Index k) {
  Vector row(lambdas.cols());
  for (Eigen::Index i = 0; i < lambdas.cols(); ++i) {
    row(i) = params.mode == Variant::Airm ? airm_from_eigvals(lambdas.col(i))
                                          : abld_from_eigvals(lambdas.col(i), params.alpha(k), params.beta(k));
  }
  return row;
}

Matrix encodings_from_eigvals(const std::vector<Matrix>& lambdas, const AbldParams& params) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  Matrix v(n, lambdas.front().cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    v.row(k) = encodings_from_eigvals(lambdas[static_cast<std::size_t>(k)], params, k).transpose();
  }
  return v;
}

ParamGradient param_gradient(const std::vector<Matrix>& lambdas, const Matrix& zeta, const AbldParams& params) {
  const auto n = static_cast<Eigen::Index>(lambdas.size());
  ParamGradient g{Vector::Zero(n), Vector::Zero(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = params.alpha(k);
    const double b = params.beta(k);
    const auto& lk = lambdas[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < lk.cols(); ++i) {
      double da = 0.0;
      double db = 0.0;
      for (Eigen::Index j = 0; j < lk.rows(); ++j) {
        da += abld_term_dalpha(lk(j, i), a, b);
        db += abld_term_dbeta(lk(j, i), a, b);
      }
      g.alpha(k) += zeta(k, i) * da;
      g.beta(k) += zeta(k, i) * db;
    }
  }
  return g;
}

double squared_distance(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm(); }

double relative_change(double before, double after) {
  return std::abs(before - after) / std::max(std::abs(before), std::numeric_limits<double>::min());
}

}  // namespace

FitError::FitError(ErrorCode code, const std::string& what, std::string block, Eigen::Index atom,
                   std::vector<HistoryEntry> partial)
    : Error(code, what), block_(std::move(block)), atom_(atom), partial_(std::move(partial)) {}

double default_gamma(const LabeledSpdDataset& data) {
  return 1e-3 * static_cast<double>(data.size()) / static_cast<double>(std::max(1, data.label_count));
}

Dictionary init_dictionary(const LabeledSpdDataset& data, int n_atoms, std::uint64_t seed) {
  const auto count = data.size();
  if (n_atoms < 1 || static_cast<std::size_t>(n_atoms) > count) {
    fail(ErrorCode::InvalidInput, "init_dictionary: need 1 <= n_atoms <= N");
  }
  const auto k_count = static_cast<std::size_t>(n_atoms);
  std::vector<Matrix> logs(count);
  parallel_for(count, [&](std::size_t i) { logs[i] = spd_log(data.samples[i]); });

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++ seeding
  std::vector<Matrix> centers;
  centers.reserve(k_count);
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  std::size_t first = std::min(count - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(count)));
  centers.push_back(logs[first]);
  while (centers.size() < k_count) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(logs[i], centers.back()));
      total += nearest[i];
    }
    std::size_t pick = count;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double run = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        if (nearest[i] <= 0.0) continue;
        run += nearest[i];
        pick = i;
        if (run >= target) break;
      }
    }
    if (pick == count) pick = centers.size() % count;  // all points coincide with a center
    centers.push_back(logs[pick]);
  }

  // Lloyd iterations
  std::vector<std::size_t> assign(count, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < count; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k_count; ++c) {
        const double dist = squared_distance(logs[i], centers[c]);
        if (dist < best) {
          best = dist;
          assign[i] = c;
        }
      }
    }
    std::vector<Matrix> sums(k_count, Matrix::Zero(data.dim(), data.dim()));
    std::vector<std::size_t> sizes(k_count, 0);
    for (std::size_t i = 0; i < count; ++i) {
      sums[assign[i]] += logs[i];
      ++sizes[assign[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k_count; ++c) {
      Matrix next;
      if (sizes[c] == 0) {
        // Empty cluster: re-seed from the sample farthest from its centroid.
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < count; ++i) {
          const double dist = squared_distance(logs[i], centers[assign[i]]);
          if (dist > far_dist) {
            far_dist = dist;
            far = i;
          }
        }
        next = logs[far];
      } else {
        next = sums[c] / static_cast<double>(sizes[c]);
      }
      const double scale = std::max(centers[c].norm(), 1e-12);
      shift = std::max(shift, (next - centers[c]).norm() / scale);
      centers[c] = std::move(next);
    }
    if (shift < 1e-6) break;
  }

  Dictionary dict;
  dict.atoms.reserve(k_count);
  for (const auto& c : centers) dict.atoms.push_back(spd_exp(c));
  return dict;
}

AbldParams init_params(const LabeledSpdDataset& data, const Dictionary& dict, Variant variant, double gamma,
                       const std::vector<std::pair<double, double>>* grid) {
  const auto n = dict.size();
  if (n < 1) fail(ErrorCode::InvalidInput, "init_params: dictionary is empty");
  if (grid == nullptr || params_frozen(variant)) return AbldParams::make(variant, n, 1.0, 1.0);
  if (grid->empty()) fail(ErrorCode::InvalidInput, "init_params: empty grid");

  std::vector<Matrix> lambdas;
  lambdas.reserve(static_cast<std::size_t>(n));
  for (const auto& atom : dict.atoms) lambdas.push_back(atom_eigvals(data, atom));
  const Matrix targets = one_hot(data.labels, data.label_count);

  std::optional<AbldParams> best;
  double best_acc = -1.0;
  for (const auto& [a, b] : *grid) {
    if (variant == Variant::VectorTied && a != b) continue;
    const AbldParams candidate = AbldParams::make(variant, n, a, b);
    const Matrix v = encodings_from_eigvals(lambdas, candidate);
    const Matrix w = solve_ridge(v, targets, gamma);
    const double acc = training_accuracy(v, w, data.labels);
    if (acc > best_acc) {
      best_acc = acc;
      best = candidate;
    }
  }
  if (!best) fail(ErrorCode::InvalidInput, "init_params: no grid pair is valid for this variant");
  return *best;
}

IddlModel fit(const LabeledSpdDataset& data, const FitConfig& config, FitTrace* trace) {
  data.validate(true);
  if (config.n_atoms < 1 || static_cast<std::size_t>(config.n_atoms) > data.size()) {
    fail(ErrorCode::InvalidInput, "fit: need 1 <= n_atoms <= N");
  }
  if (config.outer_iters < 0 || config.atom_iters < 0 || config.param_steps < 0) {
    fail(ErrorCode::InvalidInput, "fit: iteration counts must be >= 0");
  }
  config.rcg.validate();
  const double gamma = config.gamma.value_or(default_gamma(data));
  if (!(gamma >= 0.0)) fail(ErrorCode::InvalidInput, "fit: gamma must be >= 0");

  const auto factors = factors_of(data);
  const Matrix targets = one_hot(data.labels, data.label_count);
  const auto count = static_cast<Eigen::Index>(data.size());

  IddlModel model;
  model.gamma = gamma;
  model.label_count = data.label_count;
  model.learned_dictionary = config.learn_dictionary;
  model.learned_params = config.learn_params && !params_frozen(config.variant);
  model.dictionary = config.initial_dictionary ? *config.initial_dictionary
                                               : init_dictionary(data, config.n_atoms, config.seed);
  if (model.dictionary.size() != config.n_atoms || model.dictionary.dim() != data.dim()) {
    fail(ErrorCode::InvalidInput, "fit: initial dictionary does not match n_atoms or data dim");
  }
  model.params = config.initial_params
                     ? *config.initial_params
                     : init_params(data, model.dictionary, config.variant, gamma,
                                   config.grid.empty() ? nullptr : &config.grid);
  if (model.params.mode != config.variant || model.params.size() != config.n_atoms) {
    fail(ErrorCode::InvalidInput, "fit: initial parameters do not match the variant or n_atoms");
  }
  model.params.validate();

  const auto n = model.dictionary.size();
  std::vector<Matrix> lambdas;
  lambdas.reserve(static_cast<std::size_t>(n));
  for (const auto& atom : model.dictionary.atoms) lambdas.push_back(atom_eigvals(data, atom));
  Matrix v = encodings_from_eigvals(lambdas, model.params);
  model.w = solve_ridge(v, targets, gamma);
  double current = ridge_loss(v, targets, model.w, gamma);

  auto abort = [&](const Error& e, const std::string& block, Eigen::Index atom) -> FitError {
    std::string where = block + " block";
    if (atom >= 0) where += ", atom " + std::to_string(atom);
    return FitError(e.code(), where + ": " + e.what(), block, atom, model.history);
  };

  RcgConfig atom_rcg = config.rcg;
  atom_rcg.max_iters = std::max(1, config.atom_iters);

  for (int outer = 0; outer < config.outer_iters; ++outer) {
    HistoryEntry entry;
    entry.start = current;

    if (config.learn_dictionary && config.atom_iters > 0) {
      for (Eigen::Index k = 0; k < n; ++k) {
        try {
          const Vector w_k = model.w.col(k);
          // Residuals with atom k's contribution removed.
          const Matrix base = targets - model.w * v + w_k * v.row(k);
          const double reg = gamma * model.w.squaredNorm();
          const bool airm = model.params.mode == Variant::Airm;
          const double a = airm ? 0.0 : model.params.alpha(k);
          const double b = airm ? 0.0 : model.params.beta(k);

          auto column = [&](const SpdMatrix& atom) {
            const Matrix lk = atom_eigvals(data, atom);
            return encodings_from_eigvals(lk, model.params, k);
          };
          SpdMatrix cached_at;
          Vector cached_col;
          auto column_cached = [&](const SpdMatrix& atom) -> const Vector& {
            if (!(cached_at == atom)) {
              cached_col = column(atom);
              cached_at = atom;
            }
            return cached_col;
          };
          SpdProblem problem;
          problem.objective = [&](const SpdMatrix& atom) {
            const Vector& col = column_cached(atom);
            double sum = 0.0;
            for (Eigen::Index i = 0; i < count; ++i) sum += 0.5 * (base.col(i) - w_k * col(i)).squaredNorm();
            return sum + reg;
          };
          problem.egrad = [&](const SpdMatrix& atom) {
            const Vector& col = column_cached(atom);
            Vector z(count);
            for (Eigen::Index i = 0; i < count; ++i) z(i) = -(base.col(i) - w_k * col(i)).dot(w_k);
            return airm ? atom_egrad_airm(*factors, z, atom) : atom_egrad(*factors, z, atom, a, b);
          };
          const RcgResult result = rcg_minimize(problem, model.dictionary.atoms[static_cast<std::size_t>(k)], atom_rcg);
          model.dictionary.atoms[static_cast<std::size_t>(k)] = result.point;
          lambdas[static_cast<std::size_t>(k)] = atom_eigvals(data, result.point);
          v.row(k) = encodings_from_eigvals(lambdas[static_cast<std::size_t>(k)], model.params, k).transpose();
        } catch (const Error& e) {
          if (!is_numerical(e.code())) throw;
          throw abort(e, "dictionary", k);
        }
      }
    }
    entry.after_dictionary = ridge_loss(v, targets, model.w, gamma);

    if (model.learned_params) {
      try {
        const Variant mode = model.params.mode;
        for (int step = 0; step < config.param_steps; ++step) {
          const Matrix zeta = -(model.w.transpose() * (targets - model.w * v));
          const Vector grad = reduce_param_gradient(param_gradient(lambdas, zeta, model.params), mode);
          const Vector theta = pack_params(model.params);
          auto value = [&](const Vector& packed) {
            const AbldParams trial = unpack_params(packed, mode, n);
            return ridge_loss(encodings_from_eigvals(lambdas, trial), targets, model.w, gamma);
          };
          const Vector next = positive_scalar_step(value, theta, grad, config.rcg, kParamFloor, kParamCeiling);
          if (next == theta) break;
          model.params = unpack_params(next, mode, n);
          v = encodings_from_eigvals(lambdas, model.params);
        }
      } catch (const Error& e) {
        if (!is_numerical(e.code())) throw;
        throw abort(e, "params", -1);
      }
    }
    entry.after_params = ridge_loss(v, targets, model.w, gamma);

    try {
      model.w = solve_ridge(v, targets, gamma);
    } catch (const Error& e) {
      if (!is_numerical(e.code())) throw;
      throw abort(e, "classifier", -1);
    }
    entry.after_w = ridge_loss(v, targets, model.w, gamma);
    current = entry.after_w;
    model.history.push_back(entry);

    if (trace != nullptr) {
      trace->alpha_path.push_back(model.params.alpha);
      trace->beta_path.push_back(model.params.beta);
      trace->train_accuracy.push_back(training_accuracy(v, model.w, data.labels));
    }
    if (relative_change(entry.start, entry.after_w) < config.outer_rel_tol) break;
  }

  if (trace != nullptr) trace->final_encodings = v;
  return model;
}

}  // namespace spdkit
