#pragma once

#include <Eigen/Core>
#include <vector>

namespace vvsgd {

using Input = Eigen::VectorXd;
using OutputVec = Eigen::VectorXd;
using FeatureVec = Eigen::VectorXd;

// Scalar kernel on the input space. Three kinds are supported:
//   gaussian             k(x,x') = exp(-alpha ||x-x'||^2)
//   inverse multiquadric k(x,x') = (c^2 + ||x-x'||^2)^(-beta)
//   explicit feature     k(x,x') = <x,x'>, inputs are feature coordinates
// kappa_sq stores the uniform bound sup_x k(x,x). For the explicit-feature
// kind it must be supplied by the caller (the bound depends on the input law).
struct ScalarKernel {
  enum class Kind { gaussian, inverse_multiquadric, explicit_feature };

  Kind kind = Kind::gaussian;
  double alpha = 1.0;
  double c = 1.0;
  double beta = 1.0;
  int feature_dim = 0;
  double kappa_sq = 1.0;

  static ScalarKernel gaussian(double alpha);
  static ScalarKernel inverse_multiquadric(double c, double beta);
  static ScalarKernel explicit_feature(int dim, double kappa_sq);

  bool same_as(const ScalarKernel& other) const;
};

double kernel_eval(const ScalarKernel& k, const Input& x, const Input& x2);

Eigen::MatrixXd gram_matrix(const ScalarKernel& k, const std::vector<Input>& xs);

// Explicit feature coordinates of phi(x). Only defined for explicit-feature
// kernels, where the input already is the coordinate vector.
FeatureVec feature_map(const ScalarKernel& k, const Input& x);

}  // namespace vvsgd
