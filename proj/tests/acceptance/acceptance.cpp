// Acceptance suite. Each criterion prints one line:
//   PASS|FAIL <name>: <measurement> (<tolerance>) [<seconds> s / budget <seconds> s]
// Usage: acceptance [criterion ...]; with no arguments every criterion runs.
// The exit status is 0 only when every requested criterion passes.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "spdkit/classify.hpp"
#include "spdkit/dataio.hpp"
#include "spdkit/divergence.hpp"
#include "spdkit/iddl.hpp"
#include "support.hpp"

namespace {

using namespace spdkit;
using testing::random_instance;
using testing::random_matrix;
using testing::random_spd;
using testing::rel_err;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string pct(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

// Random pair of SPD matrices with d drawn from [lo, hi].
std::pair<SpdMatrix, SpdMatrix> random_pair(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dim(lo, hi);
  const int d = dim(rng);
  SpdMatrix x = random_spd(d, rng);
  SpdMatrix y = random_spd(d, rng);
  return {std::move(x), std::move(y)};
}

Outcome jbld_special_case() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto [x, y] = random_pair(rng, 2, 8);
    const double j = jbld(x, y);
    worst = std::max(worst, std::abs(abld(x, y, 0.5, 0.5) - 4.0 * j) / (1.0 + std::abs(j)));
  }
  return {worst <= 1e-9, "max |abld(1/2,1/2) - 4 jbld| / (1 + |jbld|) = " + sci(worst) + " (tol 1e-9, 500 pairs)"};
}

Outcome airm_limit() {
  std::mt19937_64 rng(102);
  const double eps = 1e-4;
  double worst = 0.0, worst_half = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto [x, y] = random_pair(rng, 2, 8);
    const double a = abld_airm(x, y);
    const double v = abld(x, y, eps, eps);
    worst = std::max(worst, std::abs(v - a));
    worst_half = std::max(worst_half, std::abs(v - 0.5 * a));
  }
  return {worst <= 1e-3, "max |abld(eps,eps) - abld_airm| = " + sci(worst) +
                             " (tol 1e-3, eps 1e-4, 100 pairs); against abld_airm / 2 the gap is " +
                             sci(worst_half)};
}

Outcome burg_limit() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto [x, y] = random_pair(rng, 2, 8);
    worst = std::max(worst, std::abs(abld(x, y, 1.0, 1e-4) - burg(y, x)));
  }
  return {worst <= 1e-3, "max |abld(1,1e-4) - burg(Y,X)| = " + sci(worst) + " (tol 1e-3, 100 pairs)"};
}

Outcome divergence_axioms() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> log_param(std::log(0.05), std::log(5.0));
  int negatives = 0;
  double self = 0.0, affine = 0.0, dual = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto [x, y] = random_pair(rng, 2, 8);
    const double a = std::exp(log_param(rng));
    const double b = std::exp(log_param(rng));
    const auto d = x.dim();
    const double v = abld(x, y, a, b);
    if (v < 0.0) ++negatives;
    self = std::max(self, std::abs(abld(x, x, a, b)));
    const Matrix m = random_matrix(d, d, rng) + 2.0 * Matrix::Identity(d, d);
    const SpdMatrix mx = SpdMatrix::checked(sym(m * x.matrix() * m.transpose()));
    const SpdMatrix my = SpdMatrix::checked(sym(m * y.matrix() * m.transpose()));
    affine = std::max(affine, rel_err(abld(mx, my, a, b), v));
    dual = std::max(dual, rel_err(abld(y, x, b, a), v));
  }
  const bool ok = negatives == 0 && self <= 1e-10 && affine <= 1e-8 && dual <= 1e-10;
  return {ok, std::to_string(negatives) + " negative values; max D(X,X) = " + sci(self) +
                  " (tol 1e-10); affine gap " + sci(affine) + " (tol 1e-8); dual-symmetry gap " + sci(dual) +
                  " (tol 1e-10); 1000 instances, gaps scaled by max(1, |D|)"};
}

Outcome gradient_oracles() {
  double atom = 0.0, airm = 0.0, params = 0.0, naive = 0.0;
  std::mt19937_64 shapes(105);
  std::uniform_int_distribution<int> dim(2, 5), atoms(1, 4);
  for (int t = 0; t < 50; ++t) {
    const int d = dim(shapes), n = atoms(shapes);
    auto inst = random_instance(1000 + static_cast<std::uint64_t>(t), d, n, 6, 3, Variant::VectorFree);
    const Eigen::Index k = t % n;
    const Matrix g = grad_atom(inst.data, inst.model, k);
    atom = std::max(atom, rel_err(g, testing::fd_atom_gradient(inst, k)));
    naive = std::max(naive, rel_err(g, grad_atom_naive(inst.data, inst.model, k)));

    const auto pg = grad_alpha_beta(inst.data, inst.model);
    for (Vector* coords : {&inst.model.params.alpha, &inst.model.params.beta}) {
      const double base = (*coords)(k);
      const double fd = testing::central_difference(
          [&](double h) {
            (*coords)(k) = base + h;
            return objective(inst.data, inst.model);
          },
          1e-5);
      (*coords)(k) = base;
      params = std::max(params, rel_err(coords == &inst.model.params.alpha ? pg.alpha(k) : pg.beta(k), fd));
    }

    auto air = random_instance(2000 + static_cast<std::uint64_t>(t), d, n, 6, 3, Variant::Airm);
    airm = std::max(airm, rel_err(grad_atom_airm(air.data, air.model, k), testing::fd_atom_gradient(air, k)));
  }
  const bool ok = atom <= 1e-5 && airm <= 1e-5 && params <= 1e-5 && naive <= 1e-9;
  return {ok, "max relative error vs central differences: grad_atom " + sci(atom) + ", grad_atom_airm " + sci(airm) +
                  ", grad_alpha_beta " + sci(params) + " (tol 1e-5); direct vs simplified grad_atom " + sci(naive) +
                  " (tol 1e-9); 50 instances, d <= 5, n <= 4"};
}

Outcome bcd_monotonicity() {
  SyntheticSpec spec = cli::benchmark_spec(7);
  spec.per_class = 100;
  LabeledSpdDataset data = generate_synthetic(spec);
  data.precompute();
  FitConfig cfg;
  cfg.n_atoms = 15;
  cfg.variant = Variant::VectorFree;
  cfg.seed = 7;
  cfg.outer_iters = 30;
  cfg.outer_rel_tol = 0.0;
  const IddlModel model = fit(data, cfg);
  const auto& h = model.history;
  const double slack = 1e-10;
  double worst = -1e300;
  double dict_drop = 0.0;
  for (std::size_t t = 0; t < h.size(); ++t) {
    worst = std::max({worst, h[t].after_dictionary - h[t].start, h[t].after_params - h[t].after_dictionary,
                      h[t].after_w - h[t].after_params});
    if (t > 0) worst = std::max(worst, h[t].start - h[t - 1].after_w);
    dict_drop += h[t].start - h[t].after_dictionary;
  }
  const double total = h.empty() ? 0.0 : h.front().start - h.back().after_w;
  const double share = total > 0.0 ? dict_drop / total : 0.0;
  const bool ok = h.size() == 30 && worst <= slack && share > 0.5;
  return {ok, std::to_string(h.size()) + " outer iterations; largest per-block increase " + sci(worst) +
                  " (slack 1e-10); objective " + sci(h.front().start) + " -> " + sci(h.back().after_w) +
                  "; dictionary share of descent " + pct(share) + " (needs > 50%); d=5, N=300, n=15"};
}

struct SplitData {
  LabeledSpdDataset train, test;
};

SplitData benchmark_split(std::uint64_t seed) {
  auto [train, test] = split(generate_synthetic(cli::benchmark_spec(seed)), 0.8, seed);
  train.precompute();
  return {std::move(train), std::move(test)};
}

constexpr int kSeeds = 5;

Outcome joint_vs_fixed_ablation() {
  std::map<std::string, double> mean;
  std::ostringstream per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto d = benchmark_split(static_cast<std::uint64_t>(s));
    cli::AblationOptions opts;
    opts.atoms = 15;
    opts.seed = static_cast<std::uint64_t>(s);
    per_seed << " seed " << s << ":";
    for (const auto& row : cli::run_ablation(d.train, d.test, opts)) {
      mean[row.config] += row.test_accuracy / kSeeds;
      per_seed << ' ' << row.config << '=' << pct(row.test_accuracy);
    }
    per_seed << ';';
  }
  const double joint = mean["joint"], fix_dict = mean["fix_dictionary"], fix_params = mean["fix_params"];
  const bool ok = joint >= fix_dict && joint >= fix_params - 0.01;
  return {ok, "mean test accuracy joint " + pct(joint) + ", fix_dictionary " + pct(fix_dict) + ", fix_params " +
                  pct(fix_params) + " (needs joint >= fix_dictionary and joint >= fix_params - 1 pt; 5 seeds, 15 atoms);" +
                  per_seed.str()};
}

Outcome iddl_vs_baseline() {
  double iddl = 0.0, le = 0.0;
  std::ostringstream per_seed;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto d = benchmark_split(static_cast<std::uint64_t>(s));
    FitConfig cfg;
    cfg.n_atoms = 15;
    cfg.variant = Variant::VectorFree;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.grid = cli::default_grid();
    const double a = evaluate(fit(d.train, cfg), d.test).accuracy;
    const double b = evaluate(NearestNeighbor(d.train, BaselineMetric::LogEuclidean), d.test).accuracy;
    iddl += a / kSeeds;
    le += b / kSeeds;
    per_seed << " seed " << s << ": " << pct(a) << " vs " << pct(b) << ';';
  }
  return {iddl >= le, "mean test accuracy IDDL-N " + pct(iddl) + " vs 1-NN log-Euclidean " + pct(le) +
                          " (needs IDDL-N >= 1-NN; 5 seeds);" + per_seed.str()};
}

Outcome ridge_optimality() {
  std::mt19937_64 rng(109);
  std::uniform_int_distribution<int> atoms(1, 20), samples(2, 120), labels(2, 6);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-6), std::log(1e2));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = atoms(rng), count = samples(rng), l = labels(rng);
    const Matrix v = random_matrix(n, count, rng).cwiseAbs();
    std::vector<int> y;
    std::uniform_int_distribution<int> lab(1, l);
    for (int i = 0; i < count; ++i) y.push_back(lab(rng));
    const Matrix h = one_hot(y, l);
    const double gamma = std::exp(log_gamma(rng));
    const Matrix w = solve_ridge(v, h, gamma);
    const double residual = ((w * v - h) * v.transpose() + 2.0 * gamma * w).norm();
    worst = std::max(worst, residual / (h.norm() * v.norm()));
  }
  return {worst <= 1e-8, "max ||(WV - H)V^T + 2 gamma W|| / (||H|| ||V||) = " + sci(worst) + " (tol 1e-8, 100 systems)"};
}

Outcome complexity_scaling() {
  cli::BenchOptions by_d;
  by_d.sweep = "d";
  by_d.values = {8, 16, 32, 64};
  cli::BenchOptions by_n;
  by_n.sweep = "N";
  by_n.values = {100, 200, 400, 800, 1600};
  auto slope = [](const std::vector<cli::BenchRow>& rows, std::string& table) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      x.push_back(r.value);
      y.push_back(r.grad_ms);
      table += " " + std::to_string(r.value) + ":" + sci(r.grad_ms) + "ms";
    }
    return cli::loglog_slope(x, y);
  };
  std::string td, tn;
  const double sd = slope(cli::run_bench(by_d), td);
  const double sn = slope(cli::run_bench(by_n), tn);
  const bool ok = sd >= 2.3 && sd <= 3.3 && sn >= 0.8 && sn <= 1.2;
  return {ok, "grad_atom log-log slope vs d = " + sci(sd) + " (needs [2.3, 3.3];" + td + "), vs N = " + sci(sn) +
                  " (needs [0.8, 1.2];" + tn + "); median of 5 reps"};
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("spdkit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = SPDKIT_CLI_PATH;
  auto sh = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null";
    return std::system(cmd.c_str());
  };
  const std::string d = dir.string();
  int rc = sh("synth --out " + d + "/all.spds --per-class 40 --seed 7");
  rc |= sh("split --data " + d + "/all.spds --train " + d + "/train.spds --test " + d + "/test.spds --seed 7");
  const std::string train =
      "train --data " + d + "/train.spds --atoms 15 --variant N --gamma 1e-3 --seed 7 --outer-iters 10 --out ";
  rc |= sh(train + d + "/a.iddl");
  rc |= sh(train + d + "/b.iddl");
  const std::string a = read_bytes(dir / "a.iddl"), b = read_bytes(dir / "b.iddl");
  fs::remove_all(dir);
  const bool ok = rc == 0 && !a.empty() && a == b;
  return {ok, "two train runs with identical flags and seed: " + std::to_string(a.size()) + " and " +
                  std::to_string(b.size()) + " bytes, " + (a == b ? "identical" : "different") +
                  (rc == 0 ? "" : "; a command failed")};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"jbld_special_case", 5, jbld_special_case},
      {"airm_limit", 2, airm_limit},
      {"burg_limit", 2, burg_limit},
      {"divergence_axioms", 10, divergence_axioms},
      {"gradient_oracles", 60, gradient_oracles},
      {"bcd_monotonicity", 300, bcd_monotonicity},
      {"joint_vs_fixed_ablation", 900, joint_vs_fixed_ablation},
      {"iddl_vs_baseline", 900, iddl_vs_baseline},
      {"ridge_optimality", 2, ridge_optimality},
      {"complexity_scaling", 180, complexity_scaling},
      {"determinism", 600, determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& name : wanted) {
    const bool known = std::any_of(criteria().begin(), criteria().end(),
                                   [&](const Criterion& c) { return name == c.name; });
    if (!known) {
      std::cerr << "unknown criterion: " << name << '\n';
      return 2;
    }
  }
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    all_pass = all_pass && pass;
    char timing[96];
    std::snprintf(timing, sizeof timing, " [%.2f s / budget %.0f s%s]", secs, c.budget_s,
                  in_time ? "" : ", over budget");
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << out.detail << timing << std::endl;
  }
  return all_pass ? 0 : 1;
}
