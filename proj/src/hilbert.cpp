#include "vvsgd/hilbert.hpp"

#include <cmath>
#include <stdexcept>

namespace vvsgd {

ScalarKernel ScalarKernel::gaussian(double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("gaussian kernel needs alpha > 0");
  ScalarKernel k;
  k.kind = Kind::gaussian;
  k.alpha = alpha;
  k.kappa_sq = 1.0;
  return k;
}

ScalarKernel ScalarKernel::inverse_multiquadric(double c, double beta) {
  if (!(c > 0) || !(beta > 0))
    throw std::invalid_argument("inverse multiquadric needs c > 0 and beta > 0");
  ScalarKernel k;
  k.kind = Kind::inverse_multiquadric;
  k.c = c;
  k.beta = beta;
  k.kappa_sq = std::pow(c * c, -beta);
  return k;
}

ScalarKernel ScalarKernel::explicit_feature(int dim, double kappa_sq) {
  if (dim <= 0) throw std::invalid_argument("explicit feature kernel needs dim > 0");
  if (!(kappa_sq > 0)) throw std::invalid_argument("kappa_sq must be positive");
  ScalarKernel k;
  k.kind = Kind::explicit_feature;
  k.feature_dim = dim;
  k.kappa_sq = kappa_sq;
  return k;
}

bool ScalarKernel::same_as(const ScalarKernel& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::gaussian:
      return alpha == o.alpha;
    case Kind::inverse_multiquadric:
      return c == o.c && beta == o.beta;
    case Kind::explicit_feature:
      return feature_dim == o.feature_dim;
  }
  return false;
}

double kernel_eval(const ScalarKernel& k, const Input& x, const Input& x2) {
  if (!x.allFinite() || !x2.allFinite())
    throw std::domain_error("kernel_eval: non-finite input coordinates");
  if (x.size() != x2.size())
    throw std::domain_error("kernel_eval: input dimension mismatch");
  switch (k.kind) {
    case ScalarKernel::Kind::gaussian:
      return std::exp(-k.alpha * (x - x2).squaredNorm());
    case ScalarKernel::Kind::inverse_multiquadric:
      return std::pow(k.c * k.c + (x - x2).squaredNorm(), -k.beta);
    case ScalarKernel::Kind::explicit_feature:
      if (x.size() != k.feature_dim)
        throw std::domain_error("kernel_eval: feature dimension mismatch");
      return x.dot(x2);
  }
  throw std::logic_error("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd gram_matrix(const ScalarKernel& k, const std::vector<Input>& xs) {
  if (xs.empty()) throw std::invalid_argument("gram_matrix: empty input set");
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(k, xs[i], xs[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

FeatureVec feature_map(const ScalarKernel& k, const Input& x) {
  if (k.kind != ScalarKernel::Kind::explicit_feature)
    throw std::domain_error("feature_map: kernel has no explicit feature coordinates");
  if (x.size() != k.feature_dim)
    throw std::domain_error("feature_map: feature dimension mismatch");
  return x;
}

}  // namespace vvsgd
