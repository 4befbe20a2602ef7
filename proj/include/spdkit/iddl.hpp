#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdkit/divergence.hpp"
#include "spdkit/error.hpp"
#include "spdkit/manifold.hpp"
#include "spdkit/spd.hpp"

namespace spdkit {

// X^{-1}, X^{1/2} and X^{-1/2} of one sample.
struct SampleFactors {
  Matrix inv;
  Matrix sqrt;
  Matrix inv_sqrt;
};

using FactorCache = std::vector<SampleFactors>;

/// SPD samples with labels in [1, label_count].
struct LabeledSpdDataset {
  std::vector<SpdMatrix> samples;
  std::vector<int> labels;
  int label_count = 0;
  // Optional per-sample factorizations shared between copies of the dataset.
  std::shared_ptr<const FactorCache> factors;

  std::size_t size() const { return samples.size(); }
  Eigen::Index dim() const { return samples.empty() ? 0 : samples.front().dim(); }

  // Throws InvalidDataset. With `every_class`, each label in [1, L] must occur.
  void validate(bool every_class) const;
  void precompute();
};

// Returns the dataset's cached factors, computing them when absent.
std::shared_ptr<const FactorCache> factors_of(const LabeledSpdDataset& data);

struct Dictionary {
  std::vector<SpdMatrix> atoms;

  Eigen::Index size() const { return static_cast<Eigen::Index>(atoms.size()); }
  Eigen::Index dim() const { return atoms.empty() ? 0 : atoms.front().dim(); }
};

/// Objective after each block of one outer iteration of the fit.
struct HistoryEntry {
  double start = 0.0;
  double after_dictionary = 0.0;
  double after_params = 0.0;
  double after_w = 0.0;
};

struct IddlModel {
  Dictionary dictionary;
  AbldParams params;
  Matrix w;  // label_count x n
  double gamma = 0.0;
  int label_count = 0;
  bool learned_dictionary = true;
  bool learned_params = true;
  std::vector<HistoryEntry> history;

  // Consistency of shapes and parameter constraints; throws InvalidInput.
  void validate() const;
};

// Per-atom divergences v_k = D(X || B_k; alpha_k, beta_k), or squared AIRM in mode A.
Vector encode(const SpdMatrix& x, const Dictionary& dict, const AbldParams& params);

// n x N matrix whose i-th column encodes sample i.
Matrix encode_all(const LabeledSpdDataset& data, const Dictionary& dict, const AbldParams& params);

// L x N one-hot label matrix.
Matrix one_hot(const std::vector<int>& labels, int label_count);

// sum_i 1/2 ||h_i - W v_i||^2 + gamma ||W||_F^2
double ridge_loss(const Matrix& encodings, const Matrix& targets, const Matrix& w, double gamma);
double objective(const LabeledSpdDataset& data, const IddlModel& model);

// -(h - W v)^T W, as an n-vector.
Vector zeta(const Matrix& w, const Vector& v, const Vector& h);

// Ridge minimizer W = H V^T (V V^T + 2 gamma I)^{-1} of ridge_loss.
Matrix solve_ridge(const Matrix& encodings, const Matrix& targets, double gamma);
Matrix solve_w(const LabeledSpdDataset& data, const IddlModel& model);

/// Euclidean gradient of sum_i zeta_i D(X_i || B; alpha, beta) in B, through
/// the per-sample eigendecomposition of X_i^{-1/2} B X_i^{-1/2}.
Matrix atom_egrad(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom, double alpha,
                  double beta);
// Same quantity assembled from explicit matrix powers and inverses.
Matrix atom_egrad_naive(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom, double alpha,
                        double beta);
// Gradient of sum_i zeta_i ||Log(X_i^{-1/2} B X_i^{-1/2})||^2.
Matrix atom_egrad_airm(const FactorCache& factors, const Vector& zeta_k, const SpdMatrix& atom);

// Full-batch objective gradients with respect to atom k.
Matrix grad_atom(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k);
Matrix grad_atom_naive(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k);
Matrix grad_atom_airm(const LabeledSpdDataset& data, const IddlModel& model, Eigen::Index k);

// Per-atom partial derivatives of the objective in alpha_k and beta_k.
struct ParamGradient {
  Vector alpha;
  Vector beta;
};

ParamGradient grad_alpha_beta(const LabeledSpdDataset& data, const IddlModel& model);

// Free coordinates of a mode: S -> (alpha, beta); V -> alpha_k; N -> (alpha_1..n, beta_1..n).
Vector pack_params(const AbldParams& params);
AbldParams unpack_params(const Vector& packed, Variant mode, Eigen::Index n);
// Gradient in the packed coordinates: sums over atoms for S, alpha + beta for V.
Vector reduce_param_gradient(const ParamGradient& g, Variant mode);

struct FitConfig {
  int n_atoms = 0;
  Variant variant = Variant::VectorFree;
  // Ridge weight; defaults to 1e-3 * N / L.
  std::optional<double> gamma;
  // Candidate (alpha, beta) starts, chosen by training accuracy of a W-only solve.
  std::vector<std::pair<double, double>> grid;
  RcgConfig rcg;
  // RCG iterations per atom per outer iteration.
  int atom_iters = 5;
  // Log-coordinate descent steps on (alpha, beta) per outer iteration.
  int param_steps = 5;
  int outer_iters = 30;
  double outer_rel_tol = 1e-5;
  std::uint64_t seed = 0;
  bool learn_dictionary = true;
  bool learn_params = true;
  std::optional<Dictionary> initial_dictionary;
  std::optional<AbldParams> initial_params;
};

// Extra outputs of a fit, for reporting.
struct FitTrace {
  Matrix final_encodings;
  std::vector<Vector> alpha_path;  // params after each outer iteration
  std::vector<Vector> beta_path;
  std::vector<double> train_accuracy;
};

/// Thrown when a block update hits a numerical failure mid-fit. Carries the
/// history recorded up to that point.
class FitError : public Error {
 public:
  FitError(ErrorCode code, const std::string& what, std::string block, Eigen::Index atom,
           std::vector<HistoryEntry> partial);

  const std::string& block() const { return block_; }
  Eigen::Index atom() const { return atom_; }
  const std::vector<HistoryEntry>& partial_history() const { return partial_; }

 private:
  std::string block_;
  Eigen::Index atom_;
  std::vector<HistoryEntry> partial_;
};

double default_gamma(const LabeledSpdDataset& data);

// Log-Euclidean K-means (k-means++ seeding) mapped back through the matrix exponential.
Dictionary init_dictionary(const LabeledSpdDataset& data, int n_atoms, std::uint64_t seed);

// Burg start (1, 1) without a grid, else the grid pair with best training accuracy.
AbldParams init_params(const LabeledSpdDataset& data, const Dictionary& dict, Variant variant, double gamma,
                       const std::vector<std::pair<double, double>>* grid = nullptr);

// Training accuracy of argmax(W v_i) against the labels.
double training_accuracy(const Matrix& encodings, const Matrix& w, const std::vector<int>& labels);

IddlModel fit(const LabeledSpdDataset& data, const FitConfig& config, FitTrace* trace = nullptr);

// Binary model container; see docs/FORMATS.md.
void save_model(const std::string& path, const IddlModel& model);
IddlModel load_model(const std::string& path);
std::string serialize_model(const IddlModel& model);
IddlModel deserialize_model(const std::string& bytes);

}  // namespace spdkit
