#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spdkit/classify.hpp"
#include "spdkit/dataio.hpp"
#include "spdkit/iddl.hpp"

namespace spdkit::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

int exit_code_for(ErrorCode code);

// "# spdkit <version> | <command line> | seed=<seed>"
std::string provenance_line(const std::string& command_line, std::uint64_t seed);

// The (alpha, beta) starting grid used when a command asks for grid initialization.
std::vector<std::pair<double, double>> default_grid();

// Inclusive arithmetic range min, min + step, ... <= max (with a small tolerance).
std::vector<double> arange(double min, double max, double step);

// Synthetic benchmark used by the ablation and baseline comparisons: 3 classes,
// d = 5, 200 samples per class, split 80/20 per seed.
SyntheticSpec benchmark_spec(std::uint64_t seed);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Shared setup of the three ablation configurations: one K-means dictionary
/// and one grid-searched (alpha, beta) start, then
///   fix_params:     dictionary learned, (alpha, beta) frozen at the grid start (mode N)
///   fix_dictionary: dictionary frozen at K-means, scalar (alpha, beta) learned (mode S)
///   joint:          both learned (mode N)
struct AblationRow {
  int atoms = 0;
  std::string config;
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  double final_objective = 0.0;
};

struct AblationOptions {
  int atoms = 15;
  std::uint64_t seed = 0;
  int outer_iters = 30;
  std::vector<std::pair<double, double>> grid = default_grid();
};

std::vector<AblationRow> run_ablation(const LabeledSpdDataset& train, const LabeledSpdDataset& test,
                                      const AblationOptions& options);

/// Accuracy of a frozen-dictionary ridge classifier at each (alpha, beta) cell.
struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  // Empty, or "below_floor" when the cell lies outside the learnable box.
  std::string flag;
};

std::vector<GridCell> grid_sweep(const LabeledSpdDataset& train, const LabeledSpdDataset& test,
                                 const Dictionary& dict, const std::vector<double>& alphas,
                                 const std::vector<double>& betas, double gamma);

/// Median wall time of one full-batch grad_atom and one objective evaluation.
struct BenchRow {
  std::string sweep;  // "d", "N" or "n"
  int value = 0;
  double grad_ms = 0.0;
  double objective_ms = 0.0;
};

struct BenchOptions {
  std::string sweep = "d";
  std::vector<int> values{8, 16, 32, 64};
  int reps = 5;
  int dim = 8;
  int samples = 100;
  int atoms = 5;
  std::uint64_t seed = 0;
};

std::vector<BenchRow> run_bench(const BenchOptions& options);

// Convergence CSV body rows: outer_iter,objective,delta_dictionary,delta_params,delta_w
std::string convergence_csv(const IddlModel& model);

/// Parses and runs one command line. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spdkit::cli
