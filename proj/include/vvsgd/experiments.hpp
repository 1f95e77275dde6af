#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "vvsgd/config.hpp"
#include "vvsgd/ratefit.hpp"
#include "vvsgd/schedules.hpp"
#include "vvsgd/spectral.hpp"

namespace vvsgd {

struct RateReport {
  std::string experiment;
  double target_exponent;
  double fitted_slope;
  double slope_stderr;
  bool pass;
  std::vector<long> horizons;
  std::vector<double> statistics;  // per-horizon mean (or quantile) errors
};

struct ExperimentResult {
  std::vector<RateReport> reports;
  bool all_pass = true;
  std::vector<std::string> files;
  std::vector<std::string> notes;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Paired samples from a CSV whose header names input columns x0.. and output
// columns y0.. (in that order).
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> load_paired_csv(
    const std::string& path);

// Schedule used by an experiment: manual overrides when present, otherwise
// the theorem presets for (r, s, target, setting).
Schedule make_schedule(const ExperimentConfig& cfg, double kappa_sq, long horizon,
                       bool highprob);

SpectralWorldConfig make_world_config(const ExperimentConfig& cfg);

}  // namespace vvsgd
