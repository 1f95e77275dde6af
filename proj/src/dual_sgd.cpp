#include "vvsgd/dual_sgd.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace vvsgd {

OutputVec GroundTruthDual::predict(const Input& x) const {
  OutputVec acc = OutputVec::Zero(out_dim());
  for (std::size_t i = 0; i < anchors.size(); ++i)
    acc += coeffs[i] * kernel_eval(kernel, anchors[i], x);
  return acc;
}

int GroundTruthDual::out_dim() const {
  return coeffs.empty() ? dim_when_empty : static_cast<int>(coeffs.front().size());
}

DualEstimator::DualEstimator(ScalarKernel kernel, int out_dim)
    : kernel_(std::move(kernel)), out_dim_(out_dim) {
  if (out_dim <= 0) throw std::invalid_argument("DualEstimator: out_dim must be positive");
}

OutputVec DualEstimator::predict(const Input& x) const {
  OutputVec acc = OutputVec::Zero(out_dim_);
  for (std::size_t i = 0; i < anchors_.size(); ++i)
    acc += coeffs_[i] * kernel_eval(kernel_, anchors_[i], x);
  return scale_ * acc;
}

void DualEstimator::sgd_step(const Input& x, const OutputVec& y, double eta,
                             double lambda) {
  if (y.size() != out_dim_) throw std::invalid_argument("sgd_step: output dimension mismatch");
  const double shrink = 1.0 - eta * lambda;
  if (!(shrink > 0.0))
    throw std::domain_error("sgd_step: 1 - eta*lambda <= 0, schedule would annihilate the iterate");
  const OutputVec residual = predict(x) - y;
  scale_ *= shrink;
  anchors_.push_back(x);
  coeffs_.push_back((-eta / scale_) * residual);
  ++step_;
  // Underflow guard for long runs: fold the running scale into the stored
  // coefficients once it gets tiny.
  if (scale_ < 1e-150) {
    for (auto& c : coeffs_) c *= scale_;
    scale_ = 1.0;
  }
}

DualEstimator run(const std::vector<std::pair<Input, OutputVec>>& stream,
                  const ScalarKernel& kernel, int out_dim, const Schedule& sched) {
  if (!is_online(sched)) {
    const auto& fin = std::get<FiniteHorizonSchedule>(sched);
    if (static_cast<long>(stream.size()) != fin.horizon)
      throw std::invalid_argument("run: finite-horizon stream length must equal the horizon");
  }
  DualEstimator e(kernel, out_dim);
  long t = 1;
  for (const auto& [x, y] : stream) {
    const StepParams p = step_params(sched, t++);
    e.sgd_step(x, y, p.eta, p.lambda);
  }
  return e;
}

namespace {

struct SignedTerm {
  Input anchor;
  OutputVec coeff;
};

std::uint64_t hash_vector(const Input& v) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits;
    const double d = v[i];
    std::memcpy(&bits, &d, sizeof(bits));
    h ^= bits;
    h *= 1099511628211ULL;
  }
  return h;
}

// Merges terms whose anchors are bitwise identical so that coincident
// expansions cancel exactly.
std::vector<SignedTerm> merged_terms(const DualEstimator& e, const GroundTruthDual* g) {
  std::vector<SignedTerm> terms;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> index;
  auto add = [&](const Input& anchor, const OutputVec& coeff) {
    const std::uint64_t h = hash_vector(anchor);
    for (std::size_t idx : index[h]) {
      if (terms[idx].anchor.size() == anchor.size() && terms[idx].anchor == anchor) {
        terms[idx].coeff += coeff;
        return;
      }
    }
    index[h].push_back(terms.size());
    terms.push_back({anchor, coeff});
  };
  for (std::size_t i = 0; i < e.anchor_count(); ++i) add(e.anchor(i), e.coefficient(i));
  if (g) {
    for (std::size_t j = 0; j < g->anchors.size(); ++j) add(g->anchors[j], -g->coeffs[j]);
  }
  std::erase_if(terms, [](const SignedTerm& t) { return t.coeff.isZero(0.0); });
  return terms;
}

double gram_quadratic_form(const ScalarKernel& kernel, const std::vector<SignedTerm>& terms) {
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    total += kernel_eval(kernel, terms[i].anchor, terms[i].anchor) *
             terms[i].coeff.squaredNorm();
    for (std::size_t j = 0; j < i; ++j) {
      total += 2.0 * kernel_eval(kernel, terms[i].anchor, terms[j].anchor) *
               terms[i].coeff.dot(terms[j].coeff);
    }
  }
  return total;
}

}  // namespace

double rkhs_distance_sq(const DualEstimator& e, const GroundTruthDual& g) {
  if (!e.kernel().same_as(g.kernel))
    throw std::domain_error("rkhs_distance_sq: kernel mismatch");
  return gram_quadratic_form(e.kernel(), merged_terms(e, &g));
}

double rkhs_norm_sq(const DualEstimator& e) {
  return gram_quadratic_form(e.kernel(), merged_terms(e, nullptr));
}

McStats mc_prediction_excess(const DualEstimator& e, const GroundTruthDual& g,
                             const InputSampler& sampler, int n, std::mt19937_64& rng) {
  if (n < 2) throw std::invalid_argument("mc_prediction_excess: needs n >= 2");
  if (g.out_dim() != e.out_dim())
    throw std::invalid_argument("mc_prediction_excess: output dimension mismatch");
  double mean = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Input x = sampler(rng);
    const double v = (e.predict(x) - g.predict(x)).squaredNorm();
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double variance = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n))};
}

}  // namespace vvsgd
