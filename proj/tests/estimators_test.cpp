// Copyright 2026 The dplabel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dplabel/datagen.hpp"
#include "dplabel/estimators.hpp"
#include "dplabel/metrics.hpp"
#include "oracles.hpp"

namespace dplabel {
namespace {

Vector gaussian(std::size_t d, RngStream& rng, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

bool in_theta_b(const RewardParam& p, double B) {
  double sum = 0;
  for (double c : p.coords()) sum += c;
  return std::abs(sum) <= 1e-9 && norm2(p.coords()) <= B + 1e-9;
}

struct Problem {
  RewardParam theta_star;
  std::vector<PreferenceSample> clear;
};

Problem make_problem(std::size_t d, std::size_t n, std::uint64_t seed) {
  GenSpec spec;
  spec.d = d;
  spec.n = n;
  spec.feature_mode = FeatureMode::kGaussianClipped;
  spec.L = 1.0;
  spec.seed = seed;
  RngStream tr(seed, kThetaStream), dr(seed, kDataStream);
  Problem p;
  p.theta_star = generate_theta_star(spec, tr);
  p.clear = generate_dataset(spec, p.theta_star, dr);
  return p;
}

TEST(ProjectThetaB, FeasibleIsFixedAndConstantsVanish) {
  const Vector v{0.3, -0.1, -0.2};
  const auto p = project_theta_B(v, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], v[i], 1e-15);
  const auto constant = project_theta_B(Vector(4, 2.5), 1.0);
  for (double c : constant.coords()) EXPECT_NEAR(c, 0.0, 1e-15);
  EXPECT_THROW(project_theta_B(v, 0.0), DomainError);
}

TEST(ProjectThetaB, VariationalInequality) {
  RngStream rng(1, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + rng.uniform_index(8);
    const double B = 0.5 + 2 * rng.uniform();
    const Vector v = gaussian(d, rng, 3.0);
    const auto p = project_theta_B(v, B);
    ASSERT_TRUE(in_theta_b(p, B));
    const Vector r = subtract(v, p.coords());
    for (int k = 0; k < 100; ++k) {
      Vector q = gaussian(d, rng);
      q = project_theta_B(q, B * rng.uniform() + 1e-3).coords();
      ASSERT_LE(dot(r, subtract(q, p.coords())), 1e-9);
    }
  }
}

TEST(EstimateKappa, FloorAndOverride) {
  const std::vector<PreferenceSample> one{{{1.0, 0.0, 0.0}, 1}};
  OptimizerConfig cfg;
  EXPECT_EQ(estimate_kappa(one, cfg), 1e-6);
  cfg.kappa_override = 0.3;
  EXPECT_EQ(estimate_kappa(one, cfg), 0.3);
}

TEST(FitMleClear, Consistency) {
  const auto p = make_problem(5, 10000, 3);
  const auto fit = fit_mle_clear(p.clear, ParamSpace(5, 1.0, 1.0), {});
  EXPECT_TRUE(fit.converged);
  EXPECT_TRUE(in_theta_b(fit.theta_hat, 1.0));
  EXPECT_LE(l2_error(fit.theta_hat, p.theta_star), 5 * std::sqrt(5.0 / 10000) / gamma_constant(1, 1));
  EXPECT_TRUE(std::isinf(fit.budget_spent.epsilon));
}

TEST(FitMleClear, SymmetricDataHasNoComponentAlongX) {
  const Vector x{1.0, -0.5, -0.5};
  const std::vector<PreferenceSample> s{{x, 1}, {scaled(x, -1), 1}};
  const auto fit = fit_mle_clear(s, ParamSpace(3, 1.0, 1.0), {});
  EXPECT_NEAR(dot(fit.theta_hat, x), 0.0, 1e-8);
}

TEST(FitMleClear, SeparableSampleHitsBoundary) {
  const std::vector<PreferenceSample> s{{{1.0, -1.0, 0.0}, 1}};
  const auto fit = fit_mle_clear(s, ParamSpace(3, 1.5, 1.0), {});
  EXPECT_NEAR(norm2(fit.theta_hat.coords()), 1.5, 1e-9);
  EXPECT_TRUE(fit.converged);
}

TEST(FitMleClear, ObjectiveIsMonotoneAcrossIterations) {
  const auto p = make_problem(4, 300, 4);
  const ParamSpace space(4, 1.0, 1.0);
  double prev = INFINITY;
  for (std::size_t k = 1; k <= 40; ++k) {
    OptimizerConfig cfg;
    cfg.max_iterations = k;
    const auto fit = fit_mle_clear(p.clear, space, cfg);
    const double f = nll_clear(p.clear, fit.theta_hat).value;
    EXPECT_LE(f, prev + 1e-12 * std::abs(prev)) << k;
    prev = f;
  }
}

TEST(FitMleClear, IterationCapReportsNonConvergence) {
  const auto p = make_problem(4, 300, 5);
  OptimizerConfig cfg;
  cfg.max_iterations = 2;
  const auto fit = fit_mle_clear(p.clear, ParamSpace(4, 1.0, 1.0), cfg);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations_used, 2u);
}

TEST(FitMleRr, LargeEpsilonMatchesClear) {
  const auto p = make_problem(5, 2000, 6);
  RngStream rr(6, kRandomizerStream);
  const auto data = randomize_labels(p.clear, 50.0, rr);
  const ParamSpace space(5, 1.0, 1.0);
  const auto a = fit_mle_rr(data, space, {});
  const auto b = fit_mle_clear(data.samples, space, {});
  EXPECT_LT(l2_error(a.theta_hat, b.theta_hat), 1e-4);
  EXPECT_FALSE(a.outside_guarantee_regime);
  EXPECT_TRUE(fit_mle_rr(randomize_labels(p.clear, 1.0, rr), space, {}).outside_guarantee_regime);
}

TEST(FitMleRr, ZeroEpsilonCarriesNoSignal) {
  // With eps = 0 the likelihood is flat, so the fit stays at 0 and its
  // error is exactly |theta*| = B on every repetition.
  const ParamSpace space(5, 1.0, 1.0);
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto p = make_problem(5, 500, 100 + rep);
    RngStream rr(rep, kRandomizerStream);
    const auto fit = fit_mle_rr(randomize_labels(p.clear, 0.0, rr), space, {});
    EXPECT_NEAR(l2_error(fit.theta_hat, p.theta_star), l2_error(Vector(5, 0.0), p.theta_star),
                1e-12);
  }
}

TEST(FitDebiasedRr, LargeEpsilonMatchesClear) {
  const auto p = make_problem(5, 2000, 7);
  RngStream rr(7, kRandomizerStream);
  const auto data = randomize_labels(p.clear, 50.0, rr);
  const ParamSpace space(5, 1.0, 1.0);
  EXPECT_LT(l2_error(fit_debiased_rr(data, space, {}).theta_hat,
                     fit_mle_clear(data.samples, space, {}).theta_hat),
            1e-4);
  EXPECT_THROW(fit_debiased_rr(RandomizedDataset{data.samples, 0.0}, space, {}), DomainError);
}

TEST(SgdRr, SingleStepByHand) {
  const Vector x{0.8, -0.2, 0.4};
  const ParamSpace space(3, 1.0, 1.0);
  OptimizerConfig cfg;
  cfg.schedule = StepSchedule::kFixed;
  cfg.step_size = 0.1;
  // At theta = 0 the correction term cancels and g = -x/2 for y~ = 1, so the
  // step moves to 0.05 x, then centers.
  const auto fit = sgd_rr(RandomizedDataset{{{x, 1}}, 0.7}, space, cfg);
  const double mean = (0.8 - 0.2 + 0.4) / 3;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(fit.theta_hat[i], 0.05 * (x[i] - mean), 1e-15);

  // Inverse-t step with overrides: eta_1 = 1 / (gamma (2 sigma(eps) - 1) kappa).
  OptimizerConfig inv;
  inv.gamma_override = 0.25;
  inv.kappa_override = 2.0;
  const double eps = 1.0;
  const double eta = 1 / (0.25 * (2 * sigmoid(eps) - 1) * 2.0);
  const auto fit2 = sgd_rr(RandomizedDataset{{{x, 0}}, eps}, space, inv);
  Vector v = scaled(x, -0.5 * eta);
  const double m = (v[0] + v[1] + v[2]) / 3;
  for (double& c : v) c -= m;
  const double nv = norm2(v);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(fit2.theta_hat[i], nv > 1 ? v[i] / nv : v[i], 1e-15);
}

TEST(SgdRr, ZeroFeaturesStayAtZero) {
  std::vector<PreferenceSample> s(50, PreferenceSample{Vector(4, 0.0), 1});
  OptimizerConfig cfg;
  cfg.schedule = StepSchedule::kFixed;
  const auto fit = sgd_rr(RandomizedDataset{s, 1.0}, ParamSpace(4, 1.0, 1.0), cfg);
  EXPECT_EQ(fit.theta_hat.coords(), Vector(4, 0.0));
}

TEST(SgdRr, ScheduleAndLinkValidation) {
  const auto p = make_problem(3, 100, 8);
  const ParamSpace space(3, 1.0, 1.0);
  EXPECT_THROW(sgd_rr(RandomizedDataset{p.clear, 0.0}, space, {}), DomainError);
  OptimizerConfig fixed;
  fixed.schedule = StepSchedule::kFixed;
  EXPECT_NO_THROW(sgd_rr(RandomizedDataset{p.clear, 0.0}, space, fixed));
  EXPECT_THROW(sgd_rr(RandomizedDataset{p.clear, 1.0}, space, {}, LinkModel::kThurstone),
               DomainError);
  OptimizerConfig g;
  g.gamma_override = 0.2;
  EXPECT_TRUE(in_theta_b(
      sgd_rr(RandomizedDataset{p.clear, 1.0}, space, g, LinkModel::kThurstone).theta_hat, 1.0));
  OptimizerConfig constant;
  constant.schedule = StepSchedule::kConstant;
  EXPECT_TRUE(in_theta_b(sgd_rr(RandomizedDataset{p.clear, 1.0}, space, constant).theta_hat, 1.0));
}

TEST(SgdKrr, TwoWayTrajectoryMatchesSgdRr) {
  GenSpec spec;
  spec.d = 4;
  spec.n = 3000;
  spec.feature_mode = FeatureMode::kGaussianClipped;
  spec.model = PreferenceModel::kPlackettLuce;
  spec.K = 2;
  RngStream tr(9, kThetaStream), dr(9, kDataStream);
  const auto ts = generate_theta_star(spec, tr);
  const auto kw = generate_kwise_dataset(spec, ts, dr);
  RngStream ra(9, kRandomizerStream), rb(9, kRandomizerStream);
  const auto kdata = randomize_labels(kw, 0.8, 2, ra);
  const auto pair = reduce_two_way(kw);
  const auto pdata = randomize_labels(pair, 0.8, rb);
  const ParamSpace space(4, 1.0, 1.0);
  OptimizerConfig cfg;
  cfg.gamma_override = 0.1;
  cfg.kappa_override = 0.4;
  for (std::size_t t = 1; t <= spec.n; t += 499) {
    const KWiseRandomizedDataset kprefix{{kdata.samples.begin(), kdata.samples.begin() + t}, 2, 0.8};
    const RandomizedDataset pprefix{{pdata.samples.begin(), pdata.samples.begin() + t}, 0.8};
    const auto a = sgd_krr(kprefix, space, cfg), b = sgd_rr(pprefix, space, cfg);
    for (std::size_t i = 0; i < 4; ++i) ASSERT_NEAR(a.theta_hat[i], b.theta_hat[i], 1e-10) << t;
  }
}

TEST(SgdKrr, IdenticalFeaturesStayAtZero) {
  std::vector<KWiseSample> s(30, KWiseSample{std::vector<Vector>(3, Vector{0.5, -0.5, 1.0}), 2});
  const auto fit = sgd_krr(KWiseRandomizedDataset{s, 3, 1.0}, ParamSpace(3, 1.0, 1.0), {});
  for (double c : fit.theta_hat.coords()) EXPECT_NEAR(c, 0.0, 1e-15);
}

TEST(FitObjectivePerturbation, DegenerateReductionIsMle) {
  const auto p = make_problem(5, 2000, 10);
  const ParamSpace space(5, 1.0, 1.0);
  RngStream noise(10, kObjectiveNoiseStream);
  const PrivacyBudget budget(1.0, 0.001, PrivacyMode::kCentralLabel);
  const auto op = fit_objective_perturbation(p.clear, space, budget, 0.0, noise, {}, 0.0);
  const auto mle = fit_mle_clear(p.clear, space, {});
  EXPECT_LT(l2_error(op.theta_hat, mle.theta_hat), 1e-6);
  EXPECT_TRUE(op.approximate_minimizer);
  EXPECT_EQ(op.beta, 0.0);
}

TEST(FitObjectivePerturbation, CalibrationAndModes) {
  const auto p = make_problem(4, 400, 11);
  const ParamSpace space(4, 1.0, 1.0);
  RngStream noise(11, kObjectiveNoiseStream);
  const PrivacyBudget label(0.5, 0.001, PrivacyMode::kCentralLabel);
  const auto a = fit_objective_perturbation(p.clear, space, label, std::nullopt, noise, {});
  EXPECT_DOUBLE_EQ(a.noise_sigma, central_noise_sigma(1.0, label));
  EXPECT_DOUBLE_EQ(a.beta, std::sqrt(400.0));
  EXPECT_EQ(a.budget_spent, label);
  const PrivacyBudget standard(0.05, 0.001, PrivacyMode::kCentralStandard);
  const auto b = fit_objective_perturbation(p.clear, space, standard, std::nullopt, noise, {});
  EXPECT_DOUBLE_EQ(b.beta, 80.0);  // 4 L^2 / eps beats sqrt(n) / B
  EXPECT_THROW(
      fit_objective_perturbation(p.clear, space, PrivacyBudget::local(1.0), 1.0, noise, {}),
      DomainError);
}

TEST(Estimators, OutputsInThetaBAndDeterministic) {
  const auto p = make_problem(5, 800, 12);
  const ParamSpace space(5, 0.7, 1.0);
  for (int run = 0; run < 2; ++run) {
    RngStream r1(12, kRandomizerStream), r2(12, kRandomizerStream);
    RngStream n1(12, kObjectiveNoiseStream), n2(12, kObjectiveNoiseStream);
    const auto data = randomize_labels(p.clear, 0.5, r1);
    const auto again = randomize_labels(p.clear, 0.5, r2);
    const PrivacyBudget central(0.5, 0.001, PrivacyMode::kCentralLabel);
    const std::vector<std::pair<EstimatorResult, EstimatorResult>> pairs{
        {fit_mle_clear(p.clear, space, {}), fit_mle_clear(p.clear, space, {})},
        {fit_mle_rr(data, space, {}), fit_mle_rr(again, space, {})},
        {fit_debiased_rr(data, space, {}), fit_debiased_rr(again, space, {})},
        {sgd_rr(data, space, {}), sgd_rr(again, space, {})},
        {fit_objective_perturbation(p.clear, space, central, std::nullopt, n1, {}),
         fit_objective_perturbation(p.clear, space, central, std::nullopt, n2, {})}};
    for (const auto& [x, y] : pairs) {
      EXPECT_TRUE(in_theta_b(x.theta_hat, 0.7));
      EXPECT_EQ(x.theta_hat, y.theta_hat);
      EXPECT_EQ(x.iterations_used, y.iterations_used);
    }
  }
}

TEST(GreedyPolicyAction, TiesScalingAndBruteForce) {
  const std::vector<Vector> actions{{1, 0}, {0, 1}, {-1, -1}};
  EXPECT_EQ(greedy_policy_action(Vector{0, 0}, actions), 0u);
  RngStream rng(13, 0);
  for (int t = 0; t < 500; ++t) {
    std::vector<Vector> a{gaussian(2, rng), gaussian(2, rng), gaussian(2, rng)};
    const Vector th = gaussian(2, rng);
    const auto k = greedy_policy_action(th, a);
    EXPECT_EQ(k, oracle::argmax_reward(a, th));
    EXPECT_EQ(greedy_policy_action(scaled(th, 0.1 + 5 * rng.uniform()), a), k);
  }
  EXPECT_THROW(greedy_policy_action(Vector{0, 0}, std::vector<Vector>{}), DomainError);
}

}  // namespace
}  // namespace dplabel
