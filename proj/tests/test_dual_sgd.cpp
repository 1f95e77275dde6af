#include <doctest.h>

#include <cmath>

#include "vvsgd/dual_sgd.hpp"
#include "vvsgd/rng.hpp"
#include "vvsgd/spectral.hpp"

using namespace vvsgd;

namespace {

Input random_input(std::mt19937_64& rng, int dim) {
  Input x(dim);
  for (int i = 0; i < dim; ++i) x[i] = 2.0 * uniform01(rng) - 1.0;
  return x;
}

GroundTruthDual to_ground_truth(const DualEstimator& e) {
  GroundTruthDual g;
  g.kernel = e.kernel();
  for (std::size_t i = 0; i < e.anchor_count(); ++i) {
    g.anchors.push_back(e.anchor(i));
    g.coeffs.push_back(e.coefficient(i));
  }
  return g;
}

// Reference implementation without the lazy scale: every stored coefficient
// is rescaled eagerly at each step.
struct EagerEstimator {
  ScalarKernel kernel;
  std::vector<Input> anchors;
  std::vector<OutputVec> coeffs;
  int out_dim;

  OutputVec predict(const Input& x) const {
    OutputVec acc = OutputVec::Zero(out_dim);
    for (std::size_t i = 0; i < anchors.size(); ++i)
      acc += coeffs[i] * kernel_eval(kernel, anchors[i], x);
    return acc;
  }
  void step(const Input& x, const OutputVec& y, double eta, double lambda) {
    const OutputVec residual = predict(x) - y;
    for (auto& c : coeffs) c *= (1.0 - eta * lambda);
    anchors.push_back(x);
    coeffs.push_back(-eta * residual);
  }
};

}  // namespace

TEST_CASE("fresh estimator predicts zero") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 3);
  auto rng = seed_split(1, 0, StreamRole::trial);
  CHECK(e.predict(random_input(rng, 2)).isZero(0.0));
  CHECK(e.step() == 1);
  CHECK(e.anchor_count() == 0);
}

TEST_CASE("first step stores eta times the output") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 2);
  Input x(2);
  x << 0.5, -0.2;
  OutputVec y(2);
  y << 1.0, -3.0;
  e.sgd_step(x, y, 0.25, 0.0);
  CHECK(e.coefficient(0) == 0.25 * y);
  // Query at the anchor of a one-anchor expansion returns the coefficient.
  CHECK(e.predict(x) == 0.25 * y);
}

TEST_CASE("zero regularization keeps the scale at one") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 1);
  auto rng = seed_split(2, 0, StreamRole::trial);
  for (int t = 0; t < 20; ++t) {
    OutputVec y(1);
    y << uniform01(rng);
    e.sgd_step(random_input(rng, 2), y, 0.1, 0.0);
  }
  CHECK(e.scale() == 1.0);
}

TEST_CASE("sgd_step rejects annihilating schedules") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 1);
  Input x(1);
  x << 0.0;
  OutputVec y(1);
  y << 1.0;
  CHECK_THROWS_AS(e.sgd_step(x, y, 2.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(e.sgd_step(x, y, 4.0, 0.5), std::domain_error);
}

TEST_CASE("lazy scale agrees with eager rescaling") {
  auto rng = seed_split(3, 0, StreamRole::trial);
  const ScalarKernel kernel = ScalarKernel::gaussian(0.7);
  DualEstimator lazy(kernel, 2);
  EagerEstimator eager{kernel, {}, {}, 2};
  for (int t = 1; t <= 60; ++t) {
    const Input x = random_input(rng, 3);
    OutputVec y(2);
    y << uniform01(rng), -uniform01(rng);
    const double eta = 0.5 / std::sqrt(static_cast<double>(t));
    const double lambda = 0.3 / static_cast<double>(t);
    lazy.sgd_step(x, y, eta, lambda);
    eager.step(x, y, eta, lambda);
  }
  for (int q = 0; q < 10; ++q) {
    const Input x = random_input(rng, 3);
    const OutputVec a = lazy.predict(x);
    const OutputVec b = eager.predict(x);
    CHECK((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
  }
}

TEST_CASE("five-step prediction matches a direct expansion") {
  auto rng = seed_split(4, 0, StreamRole::trial);
  const ScalarKernel kernel = ScalarKernel::inverse_multiquadric(1.0, 1.0);
  DualEstimator e(kernel, 2);
  EagerEstimator ref{kernel, {}, {}, 2};
  for (int t = 0; t < 5; ++t) {
    const Input x = random_input(rng, 2);
    OutputVec y(2);
    y << uniform01(rng), uniform01(rng);
    e.sgd_step(x, y, 0.2, 0.1);
    ref.step(x, y, 0.2, 0.1);
  }
  const Input q = random_input(rng, 2);
  CHECK((e.predict(q) - ref.predict(q)).norm() <= 1e-12);
}

TEST_CASE("run folds the stream and is deterministic") {
  auto rng = seed_split(5, 0, StreamRole::trial);
  const ScalarKernel kernel = ScalarKernel::gaussian(1.0);
  const Schedule sched = theorem_presets(0.5, 1.0, Target::prediction, Setting::online);

  const DualEstimator empty = run({}, kernel, 2, sched);
  CHECK(empty.anchor_count() == 0);

  std::vector<std::pair<Input, OutputVec>> stream;
  for (int t = 0; t < 12; ++t) {
    OutputVec y(2);
    y << uniform01(rng), uniform01(rng);
    stream.emplace_back(random_input(rng, 2), y);
  }
  const DualEstimator a = run(stream, kernel, 2, sched);
  const DualEstimator b = run(stream, kernel, 2, sched);
  const Input q = random_input(rng, 2);
  CHECK(a.predict(q) == b.predict(q));

  // Single-element stream equals one manual step.
  const DualEstimator single = run({stream.front()}, kernel, 2, sched);
  DualEstimator manual(kernel, 2);
  const StepParams p = step_params(sched, 1);
  manual.sgd_step(stream.front().first, stream.front().second, p.eta, p.lambda);
  CHECK(single.predict(q) == manual.predict(q));
}

TEST_CASE("finite-horizon run requires a full stream") {
  FiniteHorizonSchedule fin;
  fin.horizon = 4;
  std::vector<std::pair<Input, OutputVec>> stream(3, {Input::Zero(1), OutputVec::Zero(1)});
  CHECK_THROWS_AS(run(stream, ScalarKernel::gaussian(1.0), 1, Schedule(fin)),
                  std::invalid_argument);
}

TEST_CASE("norm is non-increasing once the targets vanish") {
  auto rng = seed_split(6, 0, StreamRole::trial);
  DualEstimator e(ScalarKernel::gaussian(1.0), 2);
  for (int t = 0; t < 5; ++t) {
    OutputVec y(2);
    y << 1.0 + uniform01(rng), -uniform01(rng);
    e.sgd_step(random_input(rng, 2), y, 0.3, 0.05);
  }
  double prev = rkhs_norm_sq(e);
  for (int t = 0; t < 30; ++t) {
    e.sgd_step(random_input(rng, 2), OutputVec::Zero(2), 0.3, 0.05);
    const double cur = rkhs_norm_sq(e);
    CHECK(cur <= prev + 1e-12 * (1.0 + prev));
    prev = cur;
  }
}

TEST_CASE("rkhs distance vanishes exactly on identical expansions") {
  auto rng = seed_split(7, 0, StreamRole::trial);
  DualEstimator e(ScalarKernel::gaussian(1.0), 2);
  for (int t = 0; t < 10; ++t) {
    OutputVec y(2);
    y << uniform01(rng), uniform01(rng);
    e.sgd_step(random_input(rng, 2), y, 0.2, 0.1);
  }
  CHECK(rkhs_distance_sq(e, to_ground_truth(e)) == 0.0);
}

TEST_CASE("rkhs distance against the zero hypothesis") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 2);
  Input x(2);
  x << 0.3, 0.4;
  OutputVec y(2);
  y << 2.0, -1.0;
  e.sgd_step(x, y, 0.5, 0.0);  // single anchor with coefficient 0.5 * y
  GroundTruthDual zero;
  zero.kernel = e.kernel();
  const double expected = (0.5 * y).squaredNorm();  // k(x,x) = 1
  CHECK(rkhs_distance_sq(e, zero) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("rkhs distance matches an independent Gram quadratic form") {
  auto rng = seed_split(8, 0, StreamRole::trial);
  const ScalarKernel kernel = ScalarKernel::gaussian(0.9);
  DualEstimator e(kernel, 2);
  GroundTruthDual g;
  g.kernel = kernel;
  for (int t = 0; t < 7; ++t) {
    OutputVec y(2);
    y << uniform01(rng), -uniform01(rng);
    e.sgd_step(random_input(rng, 2), y, 0.25, 0.08);
    OutputVec c(2);
    c << uniform01(rng) - 0.5, uniform01(rng) - 0.5;
    g.anchors.push_back(random_input(rng, 2));
    g.coeffs.push_back(c);
  }
  // Double-loop oracle over the concatenated signed expansion.
  std::vector<Input> zs;
  std::vector<OutputVec> cs;
  for (std::size_t i = 0; i < e.anchor_count(); ++i) {
    zs.push_back(e.anchor(i));
    cs.push_back(e.coefficient(i));
  }
  for (std::size_t j = 0; j < g.anchors.size(); ++j) {
    zs.push_back(g.anchors[j]);
    cs.push_back(-g.coeffs[j]);
  }
  double oracle = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = 0; j < zs.size(); ++j)
      oracle += kernel_eval(kernel, zs[i], zs[j]) * cs[i].dot(cs[j]);
  const double got = rkhs_distance_sq(e, g);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(got >= -1e-8 * (1.0 + std::abs(oracle)));
}

TEST_CASE("rkhs distance is symmetric under swapping the expansions") {
  auto rng = seed_split(9, 0, StreamRole::trial);
  const ScalarKernel kernel = ScalarKernel::gaussian(1.1);
  DualEstimator e1(kernel, 2), e2(kernel, 2);
  for (int t = 0; t < 6; ++t) {
    OutputVec y(2);
    y << uniform01(rng), uniform01(rng);
    e1.sgd_step(random_input(rng, 2), y, 0.2, 0.05);
    y << -uniform01(rng), uniform01(rng);
    e2.sgd_step(random_input(rng, 2), y, 0.15, 0.02);
  }
  const double d12 = rkhs_distance_sq(e1, to_ground_truth(e2));
  const double d21 = rkhs_distance_sq(e2, to_ground_truth(e1));
  CHECK(d12 == doctest::Approx(d21).epsilon(1e-12));
}

TEST_CASE("rkhs distance rejects mismatched kernels") {
  DualEstimator e(ScalarKernel::gaussian(1.0), 1);
  GroundTruthDual g;
  g.kernel = ScalarKernel::gaussian(2.0);
  CHECK_THROWS_AS(rkhs_distance_sq(e, g), std::domain_error);
}

TEST_CASE("mc_prediction_excess basics") {
  auto rng = seed_split(10, 0, StreamRole::trial);
  DualEstimator e(ScalarKernel::gaussian(1.0), 2);
  for (int t = 0; t < 5; ++t) {
    OutputVec y(2);
    y << uniform01(rng), uniform01(rng);
    e.sgd_step(random_input(rng, 2), y, 0.2, 0.0);  // scale stays 1
  }
  const GroundTruthDual g = to_ground_truth(e);
  const InputSampler sampler = [](std::mt19937_64& r) {
    Input x(2);
    x << uniform01(r), uniform01(r);
    return x;
  };
  auto mc_rng = seed_split(10, 1, StreamRole::mc_eval);
  const McStats same = mc_prediction_excess(e, g, sampler, 50, mc_rng);
  CHECK(same.mean == 0.0);
  CHECK(same.std_error == 0.0);

  CHECK_THROWS_AS(mc_prediction_excess(e, g, sampler, 1, mc_rng), std::invalid_argument);

  // n = 2 arithmetic mean against hand computation.
  GroundTruthDual zero;
  zero.kernel = e.kernel();
  zero.dim_when_empty = e.out_dim();
  auto rng_a = seed_split(10, 2, StreamRole::mc_eval);
  auto rng_b = seed_split(10, 2, StreamRole::mc_eval);
  const Input x1 = sampler(rng_a);
  const Input x2 = sampler(rng_a);
  const double expected =
      0.5 * (e.predict(x1).squaredNorm() + e.predict(x2).squaredNorm());
  const McStats two = mc_prediction_excess(e, zero, sampler, 2, rng_b);
  CHECK(two.mean == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("lazy scale folds into coefficients before underflowing") {
  auto rng = seed_split(63, 0, StreamRole::trial);
  DualEstimator e(ScalarKernel::gaussian(1.0), 1);
  // Constant shrink of 1/2 per step drives the raw product below 1e-150
  // after ~500 steps; the fold must keep the representation usable.
  for (int t = 0; t < 700; ++t) {
    OutputVec y(1);
    y << uniform01(rng) - 0.5;
    e.sgd_step(random_input(rng, 1), y, 0.5, 1.0);
    CHECK(e.scale() >= 1e-150);
    CHECK(e.scale() <= 1.0);
  }
  const Input q = random_input(rng, 1);
  CHECK(std::isfinite(e.predict(q)[0]));
  // Late coefficients dominate; the represented value matches a fresh
  // estimator fed only the recent suffix to within the decayed remainder.
  CHECK(std::abs(e.predict(q)[0]) < 1.0);
}

TEST_CASE("Monte Carlo excess agrees with the exact spectral value") {
  // Encode the same problem in both back-ends: the ground truth is the
  // spectral target written as a dual expansion over unit-vector anchors.
  SpectralWorldConfig wc;
  wc.d = 12;
  wc.d_y = 3;
  wc.s = 0.8;
  wc.sigma = 0.2;
  wc.seed = 60;
  const SpectralWorld world(wc);
  const ScalarKernel kernel = ScalarKernel::explicit_feature(world.dim(), world.kappa_sq());
  GroundTruthDual truth;
  truth.kernel = kernel;
  for (int k = 0; k < world.dim(); ++k) {
    Input e = Input::Zero(world.dim());
    e[k] = 1.0;
    truth.anchors.push_back(e);
    truth.coeffs.push_back(world.target().col(k));
  }
  const Schedule sched =
      theorem_presets(0.5, wc.s, Target::prediction, Setting::online, world.kappa_sq());
  DualEstimator dual(kernel, world.out_dim());
  SpectralEstimator spec = SpectralEstimator::zero(world.out_dim(), world.dim());
  auto in = seed_split(61, 0, StreamRole::inputs);
  auto noise = seed_split(61, 0, StreamRole::noise);
  for (long t = 1; t <= 80; ++t) {
    const SpectralSample z = world.sample(in, noise);
    const StepParams p = step_params(sched, t);
    dual.sgd_step(z.phi, z.y, p.eta, p.lambda);
    spectral_step(spec, z.phi, z.y, p.eta, p.lambda);
  }
  const double exact = exact_error(world, spec, 0.5);
  const InputSampler sampler = [&world](std::mt19937_64& r) {
    std::mt19937_64 unused(0);
    return world.sample(r, unused).phi;
  };
  auto mc_rng = seed_split(62, 0, StreamRole::mc_eval);
  const McStats mc = mc_prediction_excess(dual, truth, sampler, 4000, mc_rng);
  CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.std_error + 1e-12);

  // The RKHS distance of the same pair equals the estimation error exactly.
  const double dist = rkhs_distance_sq(dual, truth);
  CHECK(dist == doctest::Approx(exact_error(world, spec, 0.0)).epsilon(1e-8));
}

TEST_CASE("explicit-feature runs match the spectral iterate") {
  for (int trial = 0; trial < 30; ++trial) {
    SpectralWorldConfig wc;
    wc.d = 6 + trial % 5;
    wc.d_y = 2 + trial % 3;
    wc.s = 0.5 + 0.4 * (trial % 3) / 2.0;
    wc.sigma = trial % 2 == 0 ? 0.1 : 0.0;
    wc.seed = 100 + trial;
    const SpectralWorld world(wc);
    const Schedule sched = theorem_presets(0.5, wc.s, Target::prediction, Setting::online,
                                           world.kappa_sq());
    const ScalarKernel kernel =
        ScalarKernel::explicit_feature(world.dim(), world.kappa_sq());
    DualEstimator dual(kernel, world.out_dim());
    SpectralEstimator spec = SpectralEstimator::zero(world.out_dim(), world.dim());
    auto in = seed_split(200 + trial, 0, StreamRole::inputs);
    auto noise = seed_split(200 + trial, 0, StreamRole::noise);
    auto probe_in = seed_split(300 + trial, 0, StreamRole::mc_eval);
    auto probe_noise = seed_split(300 + trial, 1, StreamRole::mc_eval);
    const Eigen::VectorXd q = world.sample(probe_in, probe_noise).phi;
    for (long t = 1; t <= 50; ++t) {
      const SpectralSample z = world.sample(in, noise);
      const StepParams p = step_params(sched, t);
      dual.sgd_step(z.phi, z.y, p.eta, p.lambda);
      spectral_step(spec, z.phi, z.y, p.eta, p.lambda);
      const Eigen::VectorXd a = dual.predict(q);
      const Eigen::VectorXd b = spec.h * q;
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}
