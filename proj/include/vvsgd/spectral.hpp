#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vvsgd/schedules.hpp"

namespace vvsgd {

enum class XiLaw { rademacher, gaussian };
enum class NoiseModel { gaussian, bounded };

// Moment constant of Assumption-4 type for the supported coordinate laws:
// E<phi,f>^4 <= c (E<phi,f>^2)^2 with c = 3 for independent Rademacher or
// Gaussian coordinates (Rademacher: E<phi,f>^4 = 3(E<phi,f>^2)^2 - 2 sum a_k^4).
inline constexpr double kRademacherMomentC = 3.0;
inline constexpr double kGaussianMomentC = 3.0;

struct SpectralWorldConfig {
  int d = 200;       // truncation dimension (retained eigenpairs)
  int d_y = 4;       // output dimension
  double s = 1.0;    // capacity parameter, Tr(C^s) finite
  double r = 0.5;    // source exponent
  double sigma = 0.1;
  double u1 = 0.5;        // leading eigenvalue before renormalization
  double kappa_sq = 1.0;  // cap enforced on Tr(C)
  XiLaw xi_law = XiLaw::rademacher;
  NoiseModel noise = NoiseModel::gaussian;
  double noise_bound = 0.0;   // truncation radius for bounded noise; 0 -> 3*sigma
  double source_scale = 1.0;  // multiplies the source operator (0 = zero target)
  std::uint64_t seed = 1;     // fixes the source operator
};

struct SpectralSample {
  Eigen::VectorXd phi;  // coordinates of phi(x) in the eigenbasis
  Eigen::VectorXd y;
};

// Diagonal ground-truth universe: C = diag(u_1..u_d) with u_k = u1 k^(-1/s)
// rescaled so Tr(C) <= kappa_sq, source S_dag with H_dag = S_dag C^r, input
// coordinates sqrt(u_k) xi_k with iid unit-variance xi, output noise of total
// variance sigma^2.
class SpectralWorld {
 public:
  explicit SpectralWorld(const SpectralWorldConfig& cfg);

  int dim() const { return static_cast<int>(u_.size()); }
  int out_dim() const { return static_cast<int>(target_.rows()); }
  const SpectralWorldConfig& config() const { return cfg_; }
  const Eigen::VectorXd& eigenvalues() const { return u_; }
  const Eigen::MatrixXd& source() const { return source_; }
  const Eigen::MatrixXd& target() const { return target_; }
  double trace_c() const { return u_.sum(); }
  double kappa_sq() const { return cfg_.kappa_sq; }
  double sigma() const { return cfg_.sigma; }
  double moment_c() const;
  // Deterministic bound on ||y||: sup ||H_dag phi|| plus the noise radius.
  // Only meaningful in the bounded-noise mode (Rademacher inputs).
  double output_bound() const;

  SpectralSample sample(std::mt19937_64& input_rng, std::mt19937_64& noise_rng) const;

 private:
  SpectralWorldConfig cfg_;
  Eigen::VectorXd u_;
  Eigen::VectorXd sqrt_u_;
  Eigen::MatrixXd source_;  // d_y x d
  Eigen::MatrixXd target_;  // d_y x d, columns scaled by u_k^r
};

struct SpectralEstimator {
  Eigen::MatrixXd h;  // d_y x d iterate, h = 0 at step 1
  long step = 1;

  static SpectralEstimator zero(int d_y, int d);
};

void spectral_step(SpectralEstimator& e, const Eigen::VectorXd& phi,
                   const Eigen::VectorXd& y, double eta, double lambda);

// ||(H - H_dag) C^alpha||_HS^2, exact in the truncated universe.
// alpha = 1/2 is the prediction excess risk, alpha = 0 the estimation error.
double exact_error(const SpectralWorld& world, const SpectralEstimator& e, double alpha);

// Closed-form regularizing operator H_lambda = H_dag C (C + lambda I)^-1.
Eigen::MatrixXd regularization_path(const SpectralWorld& world, double lambda);

// Excess risk of an arbitrary iterate plus ridge penalty, used by oracle code.
double regularized_objective(const SpectralWorld& world, const Eigen::MatrixXd& h,
                             double lambda);

struct DecompositionTerms {
  double t1;  // approximation error
  double t2;  // initial error
  double t3;  // drift error (exactly zero for constant schedules)
  double t4;  // sample error
  double total() const { return t1 + t2 + t3 + t4; }
};

// Exact evaluation of the four-term error decomposition in eigencoordinates.
// m_bound is the uniform bound on E||(H_t - H_dag) phi(x_t)||^2 entering the
// sample error term.
DecompositionTerms decomposition_terms(const SpectralWorld& world, const Schedule& sched,
                                       long horizon, double alpha, double m_bound);

// Runs one SGD trajectory of the given length; on_step(t, estimator) is
// invoked after the t-th update, when the estimator holds H_{t+1}.
SpectralEstimator run_sgd(const SpectralWorld& world, const Schedule& sched, long horizon,
                          std::mt19937_64& input_rng, std::mt19937_64& noise_rng,
                          const std::function<void(long, const SpectralEstimator&)>& on_step = {});

// Empirical q-quantile of exact_error at step T+1 over R independent runs.
double replicate_quantile(const SpectralWorld& world, const Schedule& sched, long horizon,
                          double alpha, int replicates, double q, std::uint64_t seed,
                          int jobs = 1);

enum class BoundId {
  L1_1,  // operator-product upper bound, single product
  L1_2,  // squared-product bound, power form
  L1_3,  // squared-product bound, capped form
  L2_1,  // step-size sum lower bound
  L2_2,  // eta*lambda sum lower bound
  L2_3,  // full-range step-size sum lower bound (l=1, m=T)
  L2_4,  // full-range eta*lambda sum lower bound (l=1, m=T)
  P_A3,  // weighted decaying sum bound, online setting
  P_512, // weighted decaying sum bound, finite-horizon setting
};

BoundId parse_bound_id(const std::string& name);
std::string bound_id_name(BoundId id);

struct BoundParams {
  long l = 1;
  long m = 1;       // also the horizon T for the full-range bounds
  double beta = 1;  // operator power
  double theta = 1; // polynomial weight exponent
  double v = 1;     // tail-sum power
};

struct BoundCheck {
  double lhs;
  double rhs;
  bool holds;
};

// Evaluates the cited bound exactly in the diagonal universe: the left side
// is computed from the actual eigenvalues and schedule sums, the right side
// from the bound's formula with all constants assembled from the proof.
BoundCheck lemma_oracle(const SpectralWorld& world, const Schedule& sched, BoundId id,
                        const BoundParams& params);

}  // namespace vvsgd
