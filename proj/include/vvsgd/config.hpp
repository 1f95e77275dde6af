#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vvsgd/schedules.hpp"
#include "vvsgd/spectral.hpp"

namespace vvsgd {

enum class ExperimentKind {
  rate_expectation,
  rate_highprob,
  decomposition,
  lemma_audit,
  structured_demo,
  pca_demo,
  dual_vs_spectral,
};

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::rate_expectation;

  // World parameters.
  int d = 200;
  int d_y = 4;
  double s = 1.0;
  double r = 0.5;
  double sigma = 0.1;
  XiLaw xi_law = XiLaw::rademacher;
  std::optional<NoiseModel> noise;  // default chosen per experiment kind
  double noise_bound = 0.0;

  // Schedule block; unset fields fall back to the theorem presets.
  Setting setting = Setting::online;
  Target target = Target::prediction;
  std::optional<double> theta1, theta2, eta_bar, lambda_bar, t0;
  std::optional<double> theta3, theta4, eta1, lambda1;

  std::vector<long> horizons;  // empty -> per-kind default
  int replicates = 0;          // 0 -> per-kind default
  int trials = 0;              // random-configuration count, 0 -> per-kind default
  std::uint64_t seed = 1;
  std::string out = "out";
  double tolerance = 0.1;
  double quantile = 0.95;
  int mc = 0;  // Monte Carlo evaluation points, 0 -> per-kind default
  int jobs = 1;

  // Structured demo: shipped task name (three-label, kendall3, hamming3) or
  // "inline" with the labels enumerated in task_labels.
  std::string task = "three-label";
  std::vector<std::string> task_labels;

  // Encoder-decoder demo: optional CSV with paired samples (header columns
  // x0..x{n},y0..y{m}) and the retained ranks.
  std::string pca_data;
  int pca_rank_x = 6;
  int pca_rank_y = 4;

  NoiseModel effective_noise() const;
  std::vector<long> effective_horizons() const;
  int effective_replicates() const;
  int effective_trials() const;
  int effective_mc() const;
};

// Flat key = value format, '#' starts a comment. Unknown keys and malformed
// values are collected and reported together.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Throws with a list of violations if the configuration is inconsistent.
void validate_config(const ExperimentConfig& cfg);

}  // namespace vvsgd
