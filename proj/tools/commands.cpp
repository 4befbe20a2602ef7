#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdkit/parallel.hpp"

namespace spdkit::cli {
namespace {

using json = nlohmann::json;

std::string fmt(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  f << text;
  if (!f) fail(ErrorCode::InvalidInput, "write failed for '" + path + "'");
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text(path, text);
  }
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

double train_accuracy_of(const LabeledSpdDataset& data, const IddlModel& model) {
  return training_accuracy(encode_all(data, model.dictionary, model.params), model.w, data.labels);
}

// Eigenvalues of X_i against each atom: result[k].col(i).
std::vector<Matrix> atom_spectra(const LabeledSpdDataset& data, const Dictionary& dict) {
  std::vector<Matrix> out;
  out.reserve(dict.atoms.size());
  for (const auto& atom : dict.atoms) {
    const GenEigSolver solver(atom);
    Matrix lam(data.dim(), static_cast<Eigen::Index>(data.size()));
    parallel_for(data.size(), [&](std::size_t i) { lam.col(static_cast<Eigen::Index>(i)) = solver.eigvals(data.samples[i]); });
    out.push_back(std::move(lam));
  }
  return out;
}

Matrix encodings_at(const std::vector<Matrix>& spectra, double alpha, double beta) {
  const auto n = static_cast<Eigen::Index>(spectra.size());
  const Eigen::Index count = spectra.empty() ? 0 : spectra.front().cols();
  Matrix v(n, count);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < count; ++i) v(k, i) = abld_from_eigvals(spectra[k].col(i), alpha, beta);
  }
  return v;
}

LabeledSpdDataset bench_data(int dim, int samples, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.classes = 2;
  spec.dim = dim;
  spec.per_class = (samples + 1) / 2;
  spec.spread = 4.0 * dim;
  spec.seed = seed;
  LabeledSpdDataset data = generate_synthetic(spec);
  data.samples.resize(static_cast<std::size_t>(samples));
  data.labels.resize(static_cast<std::size_t>(samples));
  return data;
}

BenchRow bench_once(const std::string& sweep, int value, int dim, int samples, int atoms, int reps,
                    std::uint64_t seed) {
  LabeledSpdDataset data = bench_data(dim, samples, seed);
  data.precompute();
  IddlModel model;
  model.label_count = data.label_count;
  model.gamma = default_gamma(data);
  for (int k = 0; k < atoms; ++k) {
    model.dictionary.atoms.push_back(data.samples[static_cast<std::size_t>(k) % data.size()]);
  }
  model.params = AbldParams::make(Variant::VectorFree, atoms, 0.5, 1.5);
  model.w = solve_w(data, model);

  // One untimed warm-up of each.
  (void)grad_atom(data, model, 0);
  (void)objective(data, model);
  std::vector<double> grad, obj;
  for (int r = 0; r < reps; ++r) {
    grad.push_back(time_ms([&] { (void)grad_atom(data, model, 0); }));
    obj.push_back(time_ms([&] { (void)objective(data, model); }));
  }
  return {sweep, value, median(grad), median(obj)};
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) fail(ErrorCode::InvalidInput, "not an integer list: '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorCode::InvalidInput, "empty integer list");
  return out;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

}  // namespace

int exit_code_for(ErrorCode code) { return is_numerical(code) ? kExitNumerical : kExitInput; }

std::string provenance_line(const std::string& command_line, std::uint64_t seed) {
  return std::string("# spdkit ") + kVersion + " | " + command_line + " | seed=" + std::to_string(seed) + "\n";
}

std::vector<std::pair<double, double>> default_grid() {
  std::vector<std::pair<double, double>> grid;
  for (double a : {0.1, 0.5, 1.0, 2.0}) {
    for (double b : {0.1, 0.5, 1.0, 2.0}) grid.emplace_back(a, b);
  }
  return grid;
}

SyntheticSpec benchmark_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.classes = 3;
  spec.dim = 5;
  spec.per_class = 200;
  spec.spread = 8.0;
  spec.center_scale = 0.25;
  spec.seed = seed;
  return spec;
}

std::vector<double> arange(double min, double max, double step) {
  if (!(step > 0.0) || !(max >= min)) fail(ErrorCode::InvalidInput, "range needs step > 0 and max >= min");
  const auto count = static_cast<long>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < count; ++i) out.push_back(min + static_cast<double>(i) * step);
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidInput, "loglog_slope: need >= 2 matched points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix a(n, 2);
  Vector b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorCode::InvalidInput, "loglog_slope: values must be positive");
    a(i, 0) = std::log(x[i]);
    a(i, 1) = 1.0;
    b(i) = std::log(y[i]);
  }
  return a.colPivHouseholderQr().solve(b)(0);
}

std::vector<AblationRow> run_ablation(const LabeledSpdDataset& train, const LabeledSpdDataset& test,
                                      const AblationOptions& options) {
  LabeledSpdDataset data = train;
  if (!data.factors) data.precompute();
  const double gamma = default_gamma(data);
  const Dictionary dict = init_dictionary(data, options.atoms, options.seed);
  const AbldParams start = init_params(data, dict, Variant::VectorFree, gamma, &options.grid);

  FitConfig base;
  base.n_atoms = options.atoms;
  base.seed = options.seed;
  base.outer_iters = options.outer_iters;
  base.gamma = gamma;
  base.initial_dictionary = dict;

  FitConfig fix_params = base;
  fix_params.variant = Variant::VectorFree;
  fix_params.initial_params = start;
  fix_params.learn_params = false;

  FitConfig fix_dict = base;
  fix_dict.variant = Variant::Scalar;
  fix_dict.initial_params = AbldParams::make(Variant::Scalar, options.atoms, start.alpha(0), start.beta(0));
  fix_dict.learn_dictionary = false;

  FitConfig joint = base;
  joint.variant = Variant::VectorFree;
  joint.initial_params = start;

  std::vector<AblationRow> rows;
  for (const auto& [name, cfg] : {std::pair<std::string, const FitConfig*>{"fix_params", &fix_params},
                                  {"fix_dictionary", &fix_dict},
                                  {"joint", &joint}}) {
    const IddlModel model = fit(data, *cfg);
    AblationRow row;
    row.atoms = options.atoms;
    row.config = name;
    row.test_accuracy = evaluate(model, test).accuracy;
    row.train_accuracy = train_accuracy_of(data, model);
    row.final_objective = model.history.empty() ? objective(data, model) : model.history.back().after_w;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<GridCell> grid_sweep(const LabeledSpdDataset& train, const LabeledSpdDataset& test,
                                 const Dictionary& dict, const std::vector<double>& alphas,
                                 const std::vector<double>& betas, double gamma) {
  train.validate(true);
  const auto train_spectra = atom_spectra(train, dict);
  const auto test_spectra = atom_spectra(test, dict);
  const Matrix targets = one_hot(train.labels, train.label_count);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<GridCell> cells;
  for (double a : alphas) {
    for (double b : betas) {
      GridCell cell{a, b, nan, nan, ""};
      if (!(a > 0.0) || !(b > 0.0)) {
        cell.flag = "invalid";
        cells.push_back(cell);
        continue;
      }
      if (a < kParamFloor || b < kParamFloor) cell.flag = "below_floor";
      if (a > kParamCeiling || b > kParamCeiling) cell.flag = "above_ceiling";
      try {
        const Matrix v = encodings_at(train_spectra, a, b);
        const Matrix w = solve_ridge(v, targets, gamma);
        cell.train_accuracy = training_accuracy(v, w, train.labels);
        cell.test_accuracy = training_accuracy(encodings_at(test_spectra, a, b), w, test.labels);
      } catch (const Error& e) {
        cell.flag = std::string(to_string(e.code()));
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.reps < 1) fail(ErrorCode::InvalidInput, "bench: reps must be >= 1");
  std::vector<BenchRow> rows;
  for (int value : options.values) {
    if (value < 1) fail(ErrorCode::InvalidInput, "bench: sweep values must be positive");
    if (options.sweep == "d") {
      rows.push_back(bench_once("d", value, value, options.samples, options.atoms, options.reps, options.seed));
    } else if (options.sweep == "N") {
      rows.push_back(bench_once("N", value, options.dim, value, options.atoms, options.reps, options.seed));
    } else if (options.sweep == "n") {
      rows.push_back(bench_once("n", value, options.dim, std::max(options.samples, value), value, options.reps,
                                options.seed));
    } else {
      fail(ErrorCode::InvalidInput, "bench: sweep must be d, N or n");
    }
  }
  return rows;
}

std::string convergence_csv(const IddlModel& model) {
  std::ostringstream os;
  os << "outer_iter,objective_start,objective,delta_dictionary,delta_params,delta_w\n";
  for (std::size_t t = 0; t < model.history.size(); ++t) {
    const auto& h = model.history[t];
    os << t + 1 << ',' << fmt(h.start) << ',' << fmt(h.after_w) << ','
       << (model.learned_dictionary ? fmt(h.start - h.after_dictionary) : "skipped") << ','
       << (model.learned_params ? fmt(h.after_dictionary - h.after_params) : "skipped") << ','
       << fmt(h.after_params - h.after_w) << '\n';
  }
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Alpha-beta log-det divergences and discriminative SPD dictionary learning"};
  app.name("spdkit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("spdkit ") + kVersion);

  const std::string command_line = "spdkit " + join_args(args);
  std::uint64_t seed = 0;
  std::function<void()> action;

  // synth
  SyntheticSpec synth_spec = benchmark_spec(0);
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled SPD dataset");
  synth->add_option("--out", synth_out, "Dataset file to write")->required();
  synth->add_option("--classes", synth_spec.classes, "Number of classes")->capture_default_str();
  synth->add_option("--dim", synth_spec.dim, "Matrix dimension")->capture_default_str();
  synth->add_option("--per-class", synth_spec.per_class, "Samples per class")->capture_default_str();
  synth->add_option("--spread", synth_spec.spread, "Scatter concentration (> dim - 1)")->capture_default_str();
  synth->add_option("--center-scale", synth_spec.center_scale, "Spread of the class centers")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed");
  synth->callback([&] {
    action = [&] {
      synth_spec.seed = seed;
      write_dataset(synth_out, generate_synthetic(synth_spec));
    };
  });

  // split
  std::string split_data, split_train, split_test;
  double split_fraction = 0.8;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/test split");
  split_cmd->add_option("--data", split_data)->required();
  split_cmd->add_option("--train", split_train, "Output for the first part")->required();
  split_cmd->add_option("--test", split_test, "Output for the second part")->required();
  split_cmd->add_option("--fraction", split_fraction, "Share of each class in the first part")->capture_default_str();
  split_cmd->add_option("--seed", seed);
  split_cmd->callback([&] {
    action = [&] {
      auto [train, test] = split(read_dataset(split_data), split_fraction, seed);
      write_dataset(split_train, train);
      write_dataset(split_test, test);
    };
  });

  // import-text
  std::string import_in, import_out;
  bool import_repair = false;
  auto* import_cmd = app.add_subcommand("import-text", "Convert a text dataset (label then d*d entries per line)");
  import_cmd->add_option("--in", import_in)->required();
  import_cmd->add_option("--out", import_out)->required();
  import_cmd->add_flag("--repair", import_repair, "Set the repair-on-read flag in the written file");
  import_cmd->callback([&] {
    action = [&] { write_dataset(import_out, read_text_dataset(import_in), import_repair ? kRepairOnRead : 0u); };
  });

  // train
  std::string train_data, train_out, train_csv;
  int train_atoms = 15;
  std::string train_variant = "N";
  std::optional<double> train_gamma;
  FitConfig train_cfg;
  bool train_grid = false, train_fix_dict = false, train_fix_params = false;
  auto* train_cmd = app.add_subcommand("train", "Fit an IDDL model");
  train_cmd->add_option("--data", train_data)->required();
  train_cmd->add_option("--out", train_out, "Model file to write")->required();
  train_cmd->add_option("--atoms", train_atoms)->capture_default_str();
  train_cmd->add_option("--variant", train_variant, "S, V, N, A or B")->capture_default_str();
  train_cmd->add_option("--gamma", train_gamma, "Ridge weight (default 1e-3 N / L)");
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--csv", train_csv, "Convergence CSV path (default <out>.csv)");
  train_cmd->add_option("--outer-iters", train_cfg.outer_iters)->capture_default_str();
  train_cmd->add_option("--atom-iters", train_cfg.atom_iters)->capture_default_str();
  train_cmd->add_option("--param-steps", train_cfg.param_steps)->capture_default_str();
  train_cmd->add_flag("--grid-init", train_grid, "Start (alpha, beta) from a grid search");
  train_cmd->add_flag("--fix-dictionary", train_fix_dict, "Keep the K-means dictionary");
  train_cmd->add_flag("--fix-params", train_fix_params, "Keep the initial (alpha, beta)");
  train_cmd->callback([&] {
    action = [&] {
      LabeledSpdDataset data = read_dataset(train_data);
      data.precompute();
      train_cfg.n_atoms = train_atoms;
      train_cfg.variant = parse_variant(train_variant);
      train_cfg.gamma = train_gamma;
      train_cfg.seed = seed;
      train_cfg.learn_dictionary = !train_fix_dict;
      train_cfg.learn_params = !train_fix_params;
      if (train_grid) train_cfg.grid = default_grid();
      const IddlModel model = fit(data, train_cfg);
      save_model(train_out, model);
      write_text(train_csv.empty() ? train_out + ".csv" : train_csv,
                 provenance_line(command_line, seed) + convergence_csv(model));
      const double final_objective = model.history.empty() ? objective(data, model) : model.history.back().after_w;
      json summary = {{"final_objective", final_objective},
                      {"outer_iters", model.history.size()},
                      {"train_acc", train_accuracy_of(data, model)}};
      out << summary.dump() << '\n';
    };
  });

  // eval
  std::string eval_model, eval_data, eval_report, eval_csv, eval_baseline, eval_train, eval_baseline_report;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model, and optionally a 1-NN baseline, on a test set");
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--data", eval_data, "Test set")->required();
  eval_cmd->add_option("--report", eval_report, "Model report JSON path");
  eval_cmd->add_option("--csv", eval_csv, "Model per-sample CSV path");
  eval_cmd->add_option("--baseline", eval_baseline, "le, airm or jbld")
      ->check(CLI::IsMember({"le", "airm", "jbld"}));
  eval_cmd->add_option("--train", eval_train, "Training set for the baseline");
  eval_cmd->add_option("--baseline-report", eval_baseline_report, "Baseline report JSON path");
  eval_cmd->add_option("--seed", seed);
  eval_cmd->callback([&] {
    action = [&] {
      const IddlModel model = load_model(eval_model);
      const LabeledSpdDataset test = read_dataset(eval_data);
      if (test.label_count > model.label_count) {
        fail(ErrorCode::InvalidDataset, "label-space mismatch: test set has " + std::to_string(test.label_count) +
                                            " labels, model has " + std::to_string(model.label_count));
      }
      if (test.size() > 0 && test.dim() != model.dictionary.dim()) {
        fail(ErrorCode::DimensionMismatch, "test matrices are " + std::to_string(test.dim()) +
                                               "-dimensional, model atoms are " +
                                               std::to_string(model.dictionary.dim()));
      }
      const PredictionReport report = evaluate(model, test);
      if (!eval_report.empty()) write_text(eval_report, report_json(report));
      if (!eval_csv.empty()) write_text(eval_csv, provenance_line(command_line, seed) + report_csv(report));
      json summary = {{"accuracy", report.accuracy}};
      if (!eval_baseline.empty()) {
        if (eval_train.empty()) fail(ErrorCode::InvalidInput, "--baseline needs --train");
        LabeledSpdDataset train = read_dataset(eval_train);
        if (train.label_count != test.label_count && test.label_count > train.label_count) {
          fail(ErrorCode::InvalidDataset, "label-space mismatch between --train and --data");
        }
        const NearestNeighbor nn(std::move(train), parse_metric(eval_baseline));
        const PredictionReport base = evaluate(nn, test);
        if (!eval_baseline_report.empty()) write_text(eval_baseline_report, report_json(base));
        summary["baseline"] = eval_baseline;
        summary["baseline_accuracy"] = base.accuracy;
      }
      out << summary.dump() << '\n';
    };
  });

  // encode
  std::string enc_model, enc_data, enc_out;
  auto* enc_cmd = app.add_subcommand("encode", "Write per-atom divergence encodings as CSV");
  enc_cmd->add_option("--model", enc_model)->required();
  enc_cmd->add_option("--data", enc_data)->required();
  enc_cmd->add_option("--out", enc_out, "CSV path (default stdout)");
  enc_cmd->callback([&] {
    action = [&] {
      const IddlModel model = load_model(enc_model);
      const LabeledSpdDataset data = read_dataset(enc_data);
      const Matrix v = encode_all(data, model.dictionary, model.params);
      std::ostringstream os;
      os << provenance_line(command_line, seed) << "index,label";
      for (Eigen::Index k = 0; k < v.rows(); ++k) os << ",v" << k + 1;
      os << '\n';
      for (Eigen::Index i = 0; i < v.cols(); ++i) {
        os << i << ',' << data.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < v.rows(); ++k) os << ',' << fmt(v(k, i));
        os << '\n';
      }
      emit(enc_out, os.str(), out);
    };
  });

  // grid
  std::string grid_train, grid_test, grid_out;
  int grid_atoms = 15;
  std::optional<double> grid_gamma;
  double a_min = 0.1, a_max = 2.1, a_step = 0.5, b_min = 0.1, b_max = 2.1, b_step = 0.5;
  bool grid_learned = false;
  auto* grid_cmd = app.add_subcommand("grid", "Sweep (alpha, beta) over a grid with a fixed K-means dictionary");
  grid_cmd->add_option("--train", grid_train)->required();
  grid_cmd->add_option("--test", grid_test)->required();
  grid_cmd->add_option("--out", grid_out, "CSV path (default stdout)");
  grid_cmd->add_option("--atoms", grid_atoms)->capture_default_str();
  grid_cmd->add_option("--gamma", grid_gamma);
  grid_cmd->add_option("--seed", seed);
  grid_cmd->add_option("--alpha-min", a_min)->capture_default_str();
  grid_cmd->add_option("--alpha-max", a_max)->capture_default_str();
  grid_cmd->add_option("--alpha-step", a_step)->capture_default_str();
  grid_cmd->add_option("--beta-min", b_min)->capture_default_str();
  grid_cmd->add_option("--beta-max", b_max)->capture_default_str();
  grid_cmd->add_option("--beta-step", b_step)->capture_default_str();
  grid_cmd->add_flag("--learned", grid_learned, "Also fit a scalar (alpha, beta) on the same dictionary");
  grid_cmd->callback([&] {
    action = [&] {
      LabeledSpdDataset train = read_dataset(grid_train);
      const LabeledSpdDataset test = read_dataset(grid_test);
      train.precompute();
      const double gamma = grid_gamma.value_or(default_gamma(train));
      const Dictionary dict = init_dictionary(train, grid_atoms, seed);
      const auto alphas = arange(a_min, a_max, a_step);
      const auto betas = arange(b_min, b_max, b_step);
      const auto cells = grid_sweep(train, test, dict, alphas, betas, gamma);
      std::ostringstream os;
      os << provenance_line(command_line, seed) << "alpha,beta,train_acc,test_acc,flag\n";
      for (const auto& c : cells) {
        os << fmt(c.alpha) << ',' << fmt(c.beta) << ',' << fmt(c.train_accuracy) << ',' << fmt(c.test_accuracy)
           << ',' << c.flag << '\n';
      }
      emit(grid_out, os.str(), out);
      if (grid_learned) {
        FitConfig cfg;
        cfg.n_atoms = grid_atoms;
        cfg.variant = Variant::Scalar;
        cfg.gamma = gamma;
        cfg.seed = seed;
        cfg.learn_dictionary = false;
        cfg.initial_dictionary = dict;
        const IddlModel model = fit(train, cfg);
        const double a = model.params.alpha(0), b = model.params.beta(0);
        const GridCell* nearest = nullptr;
        double best = -1.0;
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& c : cells) {
          if (std::isfinite(c.test_accuracy)) best = std::max(best, c.test_accuracy);
          const double dd = std::hypot(c.alpha - a, c.beta - b);
          if (dd < dist) {
            dist = dd;
            nearest = &c;
          }
        }
        json summary = {{"learned_alpha", a},
                        {"learned_beta", b},
                        {"nearest_cell", {nearest->alpha, nearest->beta}},
                        {"nearest_cell_test_acc", nearest->test_accuracy},
                        {"grid_max_test_acc", best}};
        (grid_out.empty() || grid_out == "-" ? err : out) << summary.dump() << '\n';
      }
    };
  });

  // bench
  BenchOptions bench_opts;
  std::string bench_values = "8,16,32,64", bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time grad_atom and the objective against d, N or n");
  bench_cmd->add_option("--sweep", bench_opts.sweep, "d, N or n")
      ->check(CLI::IsMember({"d", "N", "n"}))
      ->capture_default_str();
  bench_cmd->add_option("--values", bench_values, "Comma-separated sweep values")->capture_default_str();
  bench_cmd->add_option("--reps", bench_opts.reps)->capture_default_str();
  bench_cmd->add_option("--dim", bench_opts.dim, "d when not swept")->capture_default_str();
  bench_cmd->add_option("--samples", bench_opts.samples, "N when not swept")->capture_default_str();
  bench_cmd->add_option("--atoms", bench_opts.atoms, "n when not swept")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");
  bench_cmd->add_option("--seed", seed);
  bench_cmd->callback([&] {
    action = [&] {
      bench_opts.values = parse_int_list(bench_values);
      bench_opts.seed = seed;
      const auto rows = run_bench(bench_opts);
      std::ostringstream os;
      os << provenance_line(command_line, seed) << bench_opts.sweep << ",grad_ms,objective_ms\n";
      std::vector<double> xs, gs, os_ms;
      for (const auto& r : rows) {
        os << r.value << ',' << fmt(r.grad_ms) << ',' << fmt(r.objective_ms) << '\n';
        xs.push_back(r.value);
        gs.push_back(r.grad_ms);
        os_ms.push_back(r.objective_ms);
      }
      emit(bench_out, os.str(), out);
      if (rows.size() >= 2) {
        json summary = {{"sweep", bench_opts.sweep},
                        {"grad_slope", loglog_slope(xs, gs)},
                        {"objective_slope", loglog_slope(xs, os_ms)}};
        (bench_out.empty() || bench_out == "-" ? err : out) << summary.dump() << '\n';
      }
    };
  });

  // ablate
  std::string abl_train, abl_test, abl_atoms = "15", abl_out;
  int abl_outer = 30;
  auto* abl_cmd = app.add_subcommand("ablate", "Fixed-dictionary, fixed-parameter and joint fits on one split");
  abl_cmd->add_option("--train", abl_train)->required();
  abl_cmd->add_option("--test", abl_test)->required();
  abl_cmd->add_option("--atoms", abl_atoms, "Comma-separated atom counts")->capture_default_str();
  abl_cmd->add_option("--outer-iters", abl_outer)->capture_default_str();
  abl_cmd->add_option("--out", abl_out, "CSV path (default stdout)");
  abl_cmd->add_option("--seed", seed);
  abl_cmd->callback([&] {
    action = [&] {
      LabeledSpdDataset train = read_dataset(abl_train);
      const LabeledSpdDataset test = read_dataset(abl_test);
      train.precompute();
      std::ostringstream os;
      os << provenance_line(command_line, seed) << "atoms,config,test_acc,train_acc,final_objective\n";
      for (int atoms : parse_int_list(abl_atoms)) {
        AblationOptions opts;
        opts.atoms = atoms;
        opts.seed = seed;
        opts.outer_iters = abl_outer;
        for (const auto& r : run_ablation(train, test, opts)) {
          os << r.atoms << ',' << r.config << ',' << fmt(r.test_accuracy) << ',' << fmt(r.train_accuracy) << ','
             << fmt(r.final_objective) << '\n';
        }
      }
      emit(abl_out, os.str(), out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "spdkit " << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace spdkit::cli
