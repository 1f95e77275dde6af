#pragma once

#include <Eigen/Core>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vvsgd/hilbert.hpp"

namespace vvsgd {

// Finite structured output space embedded through an output kernel. The
// embedding coordinates come from an eigenfactorization of the label Gram
// matrix, so D(z,z') = ||phi(z)-phi(z')||^2 = k(z,z)+k(z',z')-2k(z,z').
struct StructuredTask {
  std::vector<std::string> labels;
  Eigen::MatrixXd gram;        // |Z| x |Z|
  Eigen::MatrixXd embeddings;  // |Z| x d_Y, row j = phi(z_j)

  int size() const { return static_cast<int>(labels.size()); }
  int embed_dim() const { return static_cast<int>(embeddings.cols()); }
  OutputVec embedding(int j) const { return embeddings.row(j).transpose(); }
  double loss(int z, int z2) const {
    return (embeddings.row(z) - embeddings.row(z2)).squaredNorm();
  }

  static StructuredTask from_gram(std::vector<std::string> labels, Eigen::MatrixXd gram);
  static StructuredTask from_embeddings(std::vector<std::string> labels,
                                        Eigen::MatrixXd embeddings);
};

// Nearest-embedding decoder; ties break to the lowest index.
int decode(const StructuredTask& task, const OutputVec& v);

// Label ranking over 3 items under the normalized Kendall kernel (6 labels).
StructuredTask make_kendall3_task();
// Sequence tagging over {0,1}^3 under exp(-gamma * Hamming) (8 labels).
StructuredTask make_hamming3_task(double gamma = 1.0);

// Synthetic labelled problem: a smooth softmax conditional law over planar
// inputs on top of a finite structured task.
class LabelProblem {
 public:
  // The 3-label toy: Gaussian output kernel on three scalar label positions,
  // hand-picked logits.
  static LabelProblem three_label();
  // Seeded smooth law over an arbitrary task.
  static LabelProblem softmax(StructuredTask task, std::uint64_t seed);

  const StructuredTask& task() const { return task_; }
  Eigen::VectorXd probs(const Input& x) const;
  OutputVec mean_embedding(const Input& x) const;
  double conditional_risk(int label, const Input& x) const;
  int bayes_label(const Input& x) const;
  Input sample_input(std::mt19937_64& rng) const;
  int sample_label(const Input& x, std::mt19937_64& rng) const;

 private:
  StructuredTask task_;
  std::function<Eigen::VectorXd(const Input&)> logits_;
};

struct RiskGap {
  double struct_gap;
  double gap_std_error;
  double surrogate_rmse;
};

using Predictor = std::function<OutputVec(const Input&)>;

// Monte Carlo estimates of R(D(h_hat)) - R(D(h_dagger)) and of
// sqrt(E ||h_hat(x) - h_ref(x)||^2). Conditional risks are evaluated exactly
// from the known label law, so every gap term is non-negative.
RiskGap surrogate_risk_gap(const LabelProblem& prob, const Predictor& h_hat,
                           const Predictor& h_ref, int n, std::mt19937_64& rng);

}  // namespace vvsgd
