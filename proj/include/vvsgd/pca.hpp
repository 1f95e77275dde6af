#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "vvsgd/dual_sgd.hpp"
#include "vvsgd/hilbert.hpp"
#include "vvsgd/schedules.hpp"

namespace vvsgd {

// Empirical PCA codec for the uncentered second-moment operator
// (1/T) sum x_i (x) x_i. Holds the top-d eigenvectors and the full descending
// eigenvalue sequence; encode takes inner products against the basis, decode
// forms the linear combination, decode o encode is the rank-d projection.
struct PcaCodec {
  Eigen::MatrixXd basis;    // ambient x rank, orthonormal columns
  Eigen::VectorXd eigvals;  // all eigenvalues, non-increasing, clipped at 0

  int rank() const { return static_cast<int>(basis.cols()); }
  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const;
  Eigen::VectorXd decode(const Eigen::VectorXd& coords) const;
  // Mass outside the retained rank; equals the training reconstruction error.
  double trailing_eigenvalue_sum() const;
};

PcaCodec fit_pca(const std::vector<Eigen::VectorXd>& samples, int d);

// PCA + regularized kernel SGD on the encoded stream. Prediction is
// decode o f o encode with a radial kernel on the reduced coordinates.
struct PcaSgdModel {
  PcaCodec in_codec;
  PcaCodec out_codec;
  DualEstimator f;

  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
};

PcaSgdModel pca_sgd_run(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& train,
                        int d_x, int d_y, const ScalarKernel& kernel, const Schedule& sched);

}  // namespace vvsgd
