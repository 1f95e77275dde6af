#include "vvsgd/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace vvsgd {

Eigen::VectorXd PcaCodec::encode(const Eigen::VectorXd& x) const {
  if (x.size() != basis.rows()) throw std::invalid_argument("encode: dimension mismatch");
  return basis.transpose() * x;
}

Eigen::VectorXd PcaCodec::decode(const Eigen::VectorXd& coords) const {
  if (coords.size() != basis.cols())
    throw std::invalid_argument("decode: dimension mismatch");
  return basis * coords;
}

double PcaCodec::trailing_eigenvalue_sum() const {
  return eigvals.tail(eigvals.size() - rank()).sum();
}

PcaCodec fit_pca(const std::vector<Eigen::VectorXd>& samples, int d) {
  if (samples.empty()) throw std::invalid_argument("fit_pca: empty sample set");
  const Eigen::Index ambient = samples.front().size();
  if (d < 1 || d > static_cast<int>(std::min<Eigen::Index>(
                      ambient, static_cast<Eigen::Index>(samples.size()))))
    throw std::out_of_range("fit_pca: d must lie in [1, min(sample count, ambient dim)]");
  Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(ambient, ambient);
  for (const auto& x : samples) {
    if (x.size() != ambient) throw std::invalid_argument("fit_pca: ragged sample set");
    accum.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  Eigen::MatrixXd second_moment = accum.selfadjointView<Eigen::Lower>();
  second_moment /= static_cast<double>(samples.size());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(second_moment);
  if (es.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");

  PcaCodec codec;
  codec.eigvals.resize(ambient);
  for (Eigen::Index i = 0; i < ambient; ++i)
    codec.eigvals[i] = std::max(0.0, es.eigenvalues()[ambient - 1 - i]);
  codec.basis.resize(ambient, d);
  for (int c = 0; c < d; ++c) {
    Eigen::VectorXd col = es.eigenvectors().col(ambient - 1 - c);
    // Sign convention: largest-magnitude coordinate positive, lowest index
    // winning among ties, so the fit is deterministic.
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < ambient; ++r) {
      if (std::abs(col[r]) > best) {
        best = std::abs(col[r]);
        arg = r;
      }
    }
    if (col[arg] < 0) col = -col;
    codec.basis.col(c) = col;
  }
  return codec;
}

Eigen::VectorXd PcaSgdModel::predict(const Eigen::VectorXd& x) const {
  return out_codec.decode(f.predict(in_codec.encode(x)));
}

PcaSgdModel pca_sgd_run(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& train,
                        int d_x, int d_y, const ScalarKernel& kernel, const Schedule& sched) {
  if (train.empty()) throw std::invalid_argument("pca_sgd_run: empty training set");
  if (kernel.kind == ScalarKernel::Kind::explicit_feature)
    throw std::invalid_argument("pca_sgd_run: needs a radial kernel on the reduced space");
  std::vector<Eigen::VectorXd> xs, ys;
  xs.reserve(train.size());
  ys.reserve(train.size());
  for (const auto& [x, y] : train) {
    xs.push_back(x);
    ys.push_back(y);
  }
  // Two passes: codecs are fitted on the full training set first, then the
  // SGD consumes the encoded stream once, in order.
  PcaCodec in_codec = fit_pca(xs, d_x);
  PcaCodec out_codec = fit_pca(ys, d_y);
  std::vector<std::pair<Input, OutputVec>> encoded;
  encoded.reserve(train.size());
  for (const auto& [x, y] : train)
    encoded.emplace_back(in_codec.encode(x), out_codec.encode(y));
  DualEstimator f = run(encoded, kernel, d_y, sched);
  return {std::move(in_codec), std::move(out_codec), std::move(f)};
}

}  // namespace vvsgd
