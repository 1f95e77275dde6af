// Acceptance suite: one line per criterion, non-zero exit on any failure.
// Settings are the desk-scale defaults (d = 200, d_Y = 4, R = 50, horizons
// 2^8..2^13, sigma = 0.5, seed = 1) with every tolerance pinned in code.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vvsgd/config.hpp"
#include "vvsgd/dual_sgd.hpp"
#include "vvsgd/experiments.hpp"
#include "vvsgd/pca.hpp"
#include "vvsgd/rng.hpp"
#include "vvsgd/schedules.hpp"
#include "vvsgd/spectral.hpp"
#include "vvsgd/structured.hpp"

using namespace vvsgd;

namespace {

int g_failures = 0;
std::filesystem::path g_workdir;
int g_jobs = 2;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

ExperimentConfig rate_config(Setting setting, Target target, double s, double r,
                             const std::string& out_name) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::rate_expectation;
  cfg.setting = setting;
  cfg.target = target;
  cfg.s = s;
  cfg.r = r;
  cfg.sigma = 0.5;
  cfg.replicates = 50;
  cfg.seed = 1;
  cfg.jobs = g_jobs;
  cfg.out = (g_workdir / out_name).string();
  return cfg;
}

RateReport run_rate_report(const ExperimentConfig& cfg) {
  return run_experiment(cfg).reports.front();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_online_prediction() {
  const RateReport rep =
      run_rate_report(rate_config(Setting::online, Target::prediction, 1.0, 0.5, "c1"));
  const bool pass = std::abs(rep.fitted_slope - rep.target_exponent) <= 0.10;
  report(1, "online prediction rate", pass,
         "fitted=" + fmt(rep.fitted_slope) + " target=" + fmt(rep.target_exponent) +
             " tol=0.10");
}

void criterion_online_estimation() {
  const RateReport rep =
      run_rate_report(rate_config(Setting::online, Target::estimation, 0.5, 0.5, "c2"));
  const bool pass = std::abs(rep.fitted_slope - (-0.4)) <= 0.10;
  report(2, "online estimation rate", pass,
         "fitted=" + fmt(rep.fitted_slope) + " target=-0.4000 tol=0.10");
}

void criterion_finite_prediction() {
  const RateReport rep =
      run_rate_report(rate_config(Setting::finite, Target::prediction, 0.5, 0.5, "c3"));
  const bool pass = std::abs(rep.fitted_slope - rep.target_exponent) <= 0.10;
  report(3, "finite-horizon prediction rate", pass,
         "fitted=" + fmt(rep.fitted_slope) + " target=" + fmt(rep.target_exponent) +
             " tol=0.10");
}

void criterion_finite_estimation() {
  const RateReport rep =
      run_rate_report(rate_config(Setting::finite, Target::estimation, 0.5, 0.5, "c4"));
  const bool pass = std::abs(rep.fitted_slope - (-0.4)) <= 0.10;
  report(4, "finite-horizon estimation rate", pass,
         "fitted=" + fmt(rep.fitted_slope) + " target=-0.4000 tol=0.10");
}

void criterion_saturation() {
  std::vector<double> slopes;
  for (double r : {0.5, 1.0, 2.0}) {
    slopes.push_back(run_rate_report(rate_config(Setting::online, Target::prediction, 1.0,
                                                 r, "c5_r" + fmt(r)))
                         .fitted_slope);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < slopes.size(); ++i)
    for (std::size_t j = i + 1; j < slopes.size(); ++j)
      worst = std::max(worst, std::abs(slopes[i] - slopes[j]));
  report(5, "prediction rate saturation past r = 1/2", worst <= 0.08,
         "slopes=" + fmt(slopes[0]) + "/" + fmt(slopes[1]) + "/" + fmt(slopes[2]) +
             " max pairwise gap=" + fmt(worst) + " tol=0.08");
}

void criterion_highprob() {
  ExperimentConfig cfg = rate_config(Setting::online, Target::prediction, 1.0, 0.5, "c6");
  cfg.experiment = ExperimentKind::rate_highprob;
  cfg.replicates = 100;
  cfg.quantile = 0.95;
  const RateReport rep = run_rate_report(cfg);
  const bool pass = std::abs(rep.fitted_slope - rep.target_exponent) <= 0.15;
  report(6, "high-probability quantile decay", pass,
         "fitted=" + fmt(rep.fitted_slope) + " target=" + fmt(rep.target_exponent) +
             " tol=0.15");
}

void criterion_regularization_path() {
  auto rng = seed_split(1, 0, StreamRole::trial);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SpectralWorldConfig wc;
    wc.d = 10 + static_cast<int>(uniform01(rng) * 40);
    wc.d_y = 2 + static_cast<int>(uniform01(rng) * 3);
    wc.s = 0.4 + 0.6 * uniform01(rng);
    wc.r = 0.25 + 1.5 * uniform01(rng);
    wc.sigma = 0.3 * uniform01(rng);
    wc.seed = 500 + trial;
    const SpectralWorld world(wc);
    const double lambda = 0.02 + 0.98 * uniform01(rng);

    // Independent oracle: full-gradient descent on the penalized objective.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(world.out_dim(), world.dim());
    const double step = 1.0 / (2.0 * (world.eigenvalues()[0] + lambda));
    for (int iter = 0; iter < 500000; ++iter) {
      Eigen::MatrixXd grad = 2.0 * lambda * h;
      for (int k = 0; k < world.dim(); ++k)
        grad.col(k) += 2.0 * world.eigenvalues()[k] * (h.col(k) - world.target().col(k));
      if (grad.norm() <= 1e-10) break;
      h -= step * grad;
    }
    worst = std::max(worst, (h - regularization_path(world, lambda)).norm());
  }
  report(7, "regularization path closed form vs gradient descent", worst <= 1e-6,
         "max HS deviation=" + fmt(worst * 1e8) + "e-8 tol=1e-6");
}

void criterion_decomposition() {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::decomposition;
  cfg.seed = 1;
  cfg.jobs = g_jobs;
  cfg.out = (g_workdir / "c8").string();
  const ExperimentResult result = run_experiment(cfg);
  std::string detail;
  for (const auto& note : result.notes) detail += (detail.empty() ? "" : "; ") + note;
  report(8, "error decomposition bound, drift-free finite horizon", result.all_pass, detail);
}

void criterion_lemma_audit() {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::lemma_audit;
  cfg.seed = 1;
  cfg.jobs = g_jobs;
  cfg.out = (g_workdir / "c9").string();
  const ExperimentResult result = run_experiment(cfg);
  report(9, "operator bound audit on 100 random schedules", result.all_pass,
         result.notes.front());
}

void criterion_crosscheck() {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::dual_vs_spectral;
  cfg.seed = 1;
  cfg.jobs = g_jobs;
  cfg.out = (g_workdir / "c10").string();
  const ExperimentResult result = run_experiment(cfg);
  report(10, "kernel-dual vs spectral iterate equivalence", result.all_pass,
         result.notes.front() + " tol=1e-8");
}

void criterion_pca() {
  // Reconstruction identity on random sample sets.
  auto rng = seed_split(2, 0, StreamRole::trial);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 6 + static_cast<int>(uniform01(rng) * 10);
    const int n = dim + 4 + static_cast<int>(uniform01(rng) * 40);
    const int d = 1 + static_cast<int>(uniform01(rng) * (dim - 1));
    std::vector<Eigen::VectorXd> samples;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(dim);
      for (int j = 0; j < dim; ++j) x[j] = standard_normal(rng) * (1.0 + j);
      samples.push_back(x);
    }
    const PcaCodec codec = fit_pca(samples, d);
    double recon = 0.0;
    for (const auto& x : samples) recon += (x - codec.decode(codec.encode(x))).squaredNorm();
    recon /= static_cast<double>(n);
    const double scale = std::max(1.0, codec.eigvals.sum());
    worst = std::max(worst, std::abs(recon - codec.trailing_eigenvalue_sum()) / scale);
  }
  const bool identity_ok = worst <= 1e-8;

  // Full-rank pipeline must be bit-identical to plain SGD. The training set
  // is axis-aligned with strictly decreasing per-coordinate energy, so the
  // fitted bases are exactly the standard bases.
  const int dx = 4, dy = 3;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> train;
  const double ax[] = {2.0, 1.5, 1.0, 0.5};
  const int y_coord[] = {0, 0, 1, 1, 2, 2, 0, 0};
  const double y_mag[] = {1.5, 1.5, 1.25, 1.25, 0.75, 0.75, 1.0, 1.0};
  for (int t = 0; t < 8; ++t) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dx);
    x[t / 2] = (t % 2 == 0 ? 1.0 : -1.0) * ax[t / 2];
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dy);
    y[y_coord[t]] = (t % 2 == 0 ? 1.0 : -1.0) * y_mag[t];
    train.emplace_back(x, y);
  }
  const ScalarKernel kernel = ScalarKernel::gaussian(0.5);
  FiniteHorizonSchedule fin;
  fin.theta3 = 0.5;
  fin.theta4 = 0.5;
  fin.eta1 = 0.4;
  fin.lambda1 = 0.3;
  fin.horizon = static_cast<long>(train.size());
  const PcaSgdModel reduced = pca_sgd_run(train, dx, dy, kernel, Schedule(fin));
  const DualEstimator plain = run(train, kernel, dy, Schedule(fin));
  bool bitwise = true;
  auto query_rng = seed_split(3, 0, StreamRole::mc_eval);
  for (int q = 0; q < 50; ++q) {
    Eigen::VectorXd x(dx);
    for (int j = 0; j < dx; ++j) x[j] = 2.0 * uniform01(query_rng) - 1.0;
    const Eigen::VectorXd a = reduced.predict(x);
    const Eigen::VectorXd b = plain.predict(x);
    for (int j = 0; j < dy; ++j)
      if (a[j] != b[j]) bitwise = false;
  }
  report(11, "encoder-decoder identities", identity_ok && bitwise,
         "max reconstruction mismatch=" + fmt(worst * 1e10) + "e-10 tol=1e-8; full-rank " +
             (bitwise ? "bitwise equal" : "MISMATCH"));
}

void criterion_structured() {
  const LabelProblem prob = LabelProblem::three_label();
  auto rng = seed_split(4, 0, StreamRole::trial);
  bool fisher = true;
  for (int i = 0; i < 10000; ++i) {
    const Input x = prob.sample_input(rng);
    if (decode(prob.task(), prob.mean_embedding(x)) != prob.bayes_label(x)) fisher = false;
  }

  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::structured_demo;
  cfg.seed = 1;
  cfg.jobs = g_jobs;
  cfg.out = (g_workdir / "c12").string();
  const ExperimentResult result = run_experiment(cfg);
  std::string detail = fisher ? "Bayes recovery on 10^4 inputs" : "Bayes recovery FAILED";
  for (const auto& note : result.notes) detail += "; " + note;
  report(12, "structured prediction surrogate", fisher && result.all_pass, detail);
}

void criterion_determinism() {
  ExperimentConfig cfg = rate_config(Setting::online, Target::prediction, 1.0, 0.5, "c13a");
  cfg.replicates = 8;
  cfg.horizons = {256, 512, 1024};
  run_experiment(cfg);
  ExperimentConfig cfg2 = cfg;
  cfg2.out = (g_workdir / "c13b").string();
  cfg2.jobs = std::max(1, g_jobs - 1);
  run_experiment(cfg2);
  const bool rates_equal =
      slurp(g_workdir / "c13a" / "rates.csv") == slurp(g_workdir / "c13b" / "rates.csv");
  const bool summary_equal =
      slurp(g_workdir / "c13a" / "summary.csv") == slurp(g_workdir / "c13b" / "summary.csv");
  const bool nonempty = !slurp(g_workdir / "c13a" / "rates.csv").empty();
  report(13, "byte-identical outputs for identical config and seed",
         rates_equal && summary_equal && nonempty,
         rates_equal && summary_equal ? "rates.csv and summary.csv identical"
                                      : "artifact mismatch");
}

}  // namespace

int main(int argc, char** argv) {
  g_jobs = static_cast<int>(std::min(4u, std::max(1u, std::thread::hardware_concurrency())));
  if (argc > 1) g_jobs = std::max(1, std::atoi(argv[1]));
  g_workdir = std::filesystem::temp_directory_path() / "vvsgd_acceptance";
  std::filesystem::remove_all(g_workdir);
  std::filesystem::create_directories(g_workdir);

  criterion_online_prediction();
  criterion_online_estimation();
  criterion_finite_prediction();
  criterion_finite_estimation();
  criterion_saturation();
  criterion_highprob();
  criterion_regularization_path();
  criterion_decomposition();
  criterion_lemma_audit();
  criterion_crosscheck();
  criterion_pca();
  criterion_structured();
  criterion_determinism();

  std::printf("%d of 13 criteria passed\n", 13 - g_failures);
  return g_failures;
}
