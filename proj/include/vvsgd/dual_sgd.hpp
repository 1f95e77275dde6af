#pragma once

#include <functional>
#include <random>
#include <vector>

#include "vvsgd/hilbert.hpp"
#include "vvsgd/schedules.hpp"

namespace vvsgd {

using InputSampler = std::function<Input(std::mt19937_64&)>;

// Fixed reference hypothesis h(x) = sum_j coeffs[j] k(anchors[j], x).
struct GroundTruthDual {
  ScalarKernel kernel;
  std::vector<Input> anchors;
  std::vector<OutputVec> coeffs;
  int dim_when_empty = 0;  // output dimension of the zero hypothesis

  OutputVec predict(const Input& x) const;
  int out_dim() const;
};

// Kernel-dual state of the regularized SGD iterate. The per-step shrink
// (1 - eta_t lambda_t) of all existing coefficients is folded into one
// running multiplier; stored coefficients are divided by the scale at
// insertion time so that the represented coefficient of anchor i is
// coeffs[i] * scale.
class DualEstimator {
 public:
  DualEstimator(ScalarKernel kernel, int out_dim);

  const ScalarKernel& kernel() const { return kernel_; }
  int out_dim() const { return out_dim_; }
  long step() const { return step_; }
  double scale() const { return scale_; }
  std::size_t anchor_count() const { return anchors_.size(); }
  const Input& anchor(std::size_t i) const { return anchors_[i]; }
  OutputVec coefficient(std::size_t i) const { return coeffs_[i] * scale_; }

  OutputVec predict(const Input& x) const;
  void sgd_step(const Input& x, const OutputVec& y, double eta, double lambda);

 private:
  ScalarKernel kernel_;
  int out_dim_;
  std::vector<Input> anchors_;
  std::vector<OutputVec> coeffs_;
  double scale_ = 1.0;
  long step_ = 1;
};

// Folds sgd_step over the stream. For a finite-horizon schedule the stream
// length must equal the horizon.
DualEstimator run(const std::vector<std::pair<Input, OutputVec>>& stream,
                  const ScalarKernel& kernel, int out_dim, const Schedule& sched);

// ||h_e - h_g||_H^2 via the reproducing property on the merged anchor set.
double rkhs_distance_sq(const DualEstimator& e, const GroundTruthDual& g);
double rkhs_norm_sq(const DualEstimator& e);

struct McStats {
  double mean;
  double std_error;
};

// Monte Carlo estimate of E ||h_e(x) - h_g(x)||^2 over n fresh draws.
McStats mc_prediction_excess(const DualEstimator& e, const GroundTruthDual& g,
                             const InputSampler& sampler, int n, std::mt19937_64& rng);

}  // namespace vvsgd
