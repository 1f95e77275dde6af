#include "vvsgd/structured.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <stdexcept>

#include "vvsgd/rng.hpp"

namespace vvsgd {

namespace {

// Deterministic sign convention: the largest-magnitude entry of each column
// is made positive (lowest index wins among equal magnitudes).
void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double mag = std::abs(m(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (m(arg, c) < 0) m.col(c) = -m.col(c);
  }
}

}  // namespace

StructuredTask StructuredTask::from_gram(std::vector<std::string> labels,
                                         Eigen::MatrixXd gram) {
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::domain_error("StructuredTask: empty label set");
  if (gram.rows() != n || gram.cols() != n)
    throw std::invalid_argument("StructuredTask: Gram size mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("StructuredTask: eigendecomposition failed");
  // Keep eigenpairs above the clip threshold, largest first.
  std::vector<int> kept;
  for (int i = n - 1; i >= 0; --i)
    if (es.eigenvalues()[i] >= 1e-12) kept.push_back(i);
  Eigen::MatrixXd embeddings(n, static_cast<int>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    Eigen::VectorXd col = es.eigenvectors().col(kept[c]);
    embeddings.col(static_cast<Eigen::Index>(c)) =
        std::sqrt(es.eigenvalues()[kept[c]]) * col;
  }
  fix_column_signs(embeddings);
  StructuredTask task;
  task.labels = std::move(labels);
  task.gram = std::move(gram);
  task.embeddings = std::move(embeddings);
  return task;
}

StructuredTask StructuredTask::from_embeddings(std::vector<std::string> labels,
                                               Eigen::MatrixXd embeddings) {
  if (labels.empty()) throw std::domain_error("StructuredTask: empty label set");
  if (embeddings.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("StructuredTask: embedding rows must match labels");
  StructuredTask task;
  task.labels = std::move(labels);
  task.embeddings = std::move(embeddings);
  task.gram = task.embeddings * task.embeddings.transpose();
  return task;
}

int decode(const StructuredTask& task, const OutputVec& v) {
  if (task.size() == 0) throw std::domain_error("decode: empty label set");
  if (v.size() != task.embed_dim())
    throw std::invalid_argument("decode: coordinate dimension mismatch");
  int best = 0;
  double best_dist = (v.transpose() - task.embeddings.row(0)).squaredNorm();
  for (int j = 1; j < task.size(); ++j) {
    const double dist = (v.transpose() - task.embeddings.row(j)).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

StructuredTask make_kendall3_task() {
  // Permutations of three items, identified by the item order.
  const std::vector<std::array<int, 3>> perms = {
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::string> labels;
  for (const auto& p : perms)
    labels.push_back(std::to_string(p[0]) + std::to_string(p[1]) + std::to_string(p[2]));
  auto rank_of = [](const std::array<int, 3>& perm, int item) {
    for (int pos = 0; pos < 3; ++pos)
      if (perm[pos] == item) return pos;
    return -1;
  };
  const int n = static_cast<int>(perms.size());
  Eigen::MatrixXd gram(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double sum = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          const double sa = rank_of(perms[a], i) < rank_of(perms[a], j) ? 1.0 : -1.0;
          const double sb = rank_of(perms[b], i) < rank_of(perms[b], j) ? 1.0 : -1.0;
          sum += sa * sb;
        }
      }
      gram(a, b) = sum / 3.0;  // normalized over the 3 item pairs
    }
  }
  return StructuredTask::from_gram(std::move(labels), std::move(gram));
}

StructuredTask make_hamming3_task(double gamma) {
  std::vector<std::string> labels;
  for (int code = 0; code < 8; ++code) {
    std::string s;
    for (int bit = 2; bit >= 0; --bit) s += ((code >> bit) & 1) ? '1' : '0';
    labels.push_back(s);
  }
  Eigen::MatrixXd gram(8, 8);
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      int hamming = 0;
      for (int bit = 0; bit < 3; ++bit)
        hamming += ((a >> bit) & 1) != ((b >> bit) & 1) ? 1 : 0;
      gram(a, b) = std::exp(-gamma * hamming);
    }
  }
  return StructuredTask::from_gram(std::move(labels), std::move(gram));
}

LabelProblem LabelProblem::three_label() {
  // Three labels placed at distinct scalar positions under a Gaussian output
  // kernel; distances between embeddings are all different.
  const Eigen::Vector3d positions(0.0, 0.8, 2.0);
  Eigen::MatrixXd gram(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double diff = positions[a] - positions[b];
      gram(a, b) = std::exp(-diff * diff);
    }
  LabelProblem prob;
  prob.task_ = StructuredTask::from_gram({"low", "mid", "high"}, std::move(gram));
  prob.logits_ = [](const Input& x) {
    Eigen::VectorXd logits(3);
    logits[0] = 1.2 * std::sin(3.1 * x[0]) + 0.4 * x[1];
    logits[1] = 0.9 * std::cos(2.3 * (x[0] + x[1]));
    logits[2] = 0.8 * x[0] * x[0] - 0.7 * x[1];
    return logits;
  };
  return prob;
}

LabelProblem LabelProblem::softmax(StructuredTask task, std::uint64_t seed) {
  LabelProblem prob;
  const int n = task.size();
  Eigen::MatrixXd coeff(n, 5);
  auto rng = seed_split(seed, static_cast<std::uint64_t>(n), StreamRole::task);
  for (int z = 0; z < n; ++z) {
    coeff(z, 0) = 0.5 + uniform01(rng);                // amplitude
    coeff(z, 1) = 1.0 + 2.0 * uniform01(rng);          // frequency
    coeff(z, 2) = 6.283185307179586 * uniform01(rng);  // phase
    coeff(z, 3) = 2.0 * uniform01(rng) - 1.0;          // slope in x2
    coeff(z, 4) = 0.6 * uniform01(rng) - 0.3;          // bias
  }
  prob.logits_ = [coeff, n](const Input& x) {
    Eigen::VectorXd logits(n);
    for (int z = 0; z < n; ++z) {
      logits[z] = coeff(z, 0) * std::sin(coeff(z, 1) * x[0] + coeff(z, 2)) +
                  coeff(z, 3) * x[1] + coeff(z, 4);
    }
    return logits;
  };
  prob.task_ = std::move(task);
  return prob;
}

Eigen::VectorXd LabelProblem::probs(const Input& x) const {
  if (x.size() != 2) throw std::invalid_argument("LabelProblem: inputs are planar");
  Eigen::VectorXd logits = 2.0 * logits_(x);
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp();
  return p / p.sum();
}

OutputVec LabelProblem::mean_embedding(const Input& x) const {
  const Eigen::VectorXd p = probs(x);
  OutputVec m = OutputVec::Zero(task_.embed_dim());
  for (int z = 0; z < task_.size(); ++z) m += p[z] * task_.embedding(z);
  return m;
}

double LabelProblem::conditional_risk(int label, const Input& x) const {
  const Eigen::VectorXd p = probs(x);
  double risk = 0.0;
  for (int z = 0; z < task_.size(); ++z) risk += p[z] * task_.loss(label, z);
  return risk;
}

int LabelProblem::bayes_label(const Input& x) const {
  int best = 0;
  double best_risk = conditional_risk(0, x);
  for (int z = 1; z < task_.size(); ++z) {
    const double r = conditional_risk(z, x);
    if (r < best_risk) {
      best_risk = r;
      best = z;
    }
  }
  return best;
}

Input LabelProblem::sample_input(std::mt19937_64& rng) const {
  Input x(2);
  x[0] = 2.0 * uniform01(rng) - 1.0;
  x[1] = 2.0 * uniform01(rng) - 1.0;
  return x;
}

int LabelProblem::sample_label(const Input& x, std::mt19937_64& rng) const {
  const Eigen::VectorXd p = probs(x);
  double u = uniform01(rng);
  for (int z = 0; z + 1 < task_.size(); ++z) {
    if (u < p[z]) return z;
    u -= p[z];
  }
  return task_.size() - 1;
}

RiskGap surrogate_risk_gap(const LabelProblem& prob, const Predictor& h_hat,
                           const Predictor& h_ref, int n, std::mt19937_64& rng) {
  if (n < 100) throw std::invalid_argument("surrogate_risk_gap: needs n >= 100");
  double gap_mean = 0.0;
  double gap_m2 = 0.0;
  double sq_err = 0.0;
  for (int i = 0; i < n; ++i) {
    const Input x = prob.sample_input(rng);
    const int predicted = decode(prob.task(), h_hat(x));
    const int bayes = prob.bayes_label(x);
    const double gap = prob.conditional_risk(predicted, x) - prob.conditional_risk(bayes, x);
    const double delta = gap - gap_mean;
    gap_mean += delta / static_cast<double>(i + 1);
    gap_m2 += delta * (gap - gap_mean);
    sq_err += (h_hat(x) - h_ref(x)).squaredNorm();
  }
  const double variance = gap_m2 / static_cast<double>(n - 1);
  return {gap_mean, std::sqrt(variance / static_cast<double>(n)),
          std::sqrt(sq_err / static_cast<double>(n))};
}

}  // namespace vvsgd
