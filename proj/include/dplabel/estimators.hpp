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

// Reward-parameter estimators.
//
// Batch estimators (clear MLE, noisy MLE, de-biased RR, objective
// perturbation) minimize a convex sum-form objective over the centered ball
// by projected gradient descent. One-pass estimators (SGD-RR, SGD-KRR) make
// a single projected stochastic-gradient pass over the data in order.

#ifndef DPLABEL_ESTIMATORS_HPP_
#define DPLABEL_ESTIMATORS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/losses.hpp"
#include "dplabel/privacy.hpp"
#include "dplabel/rng.hpp"

namespace dplabel {

// Step-size rule for the one-pass SGD estimators. `lambda` below is
// gamma_eps * kappa, the strong-convexity modulus of the expected
// per-sample gradient.
enum class StepSchedule {
  kInverseT,  // eta_t = 1 / (lambda t)
  kConstant,  // eta_t = 1 / lambda
  kFixed,     // eta_t = OptimizerConfig::step_size
};

inline std::string_view to_string(StepSchedule s) {
  switch (s) {
    case StepSchedule::kInverseT:
      return "inverse-t";
    case StepSchedule::kConstant:
      return "constant";
    case StepSchedule::kFixed:
      return "paper-eta";
  }
  return "unknown";
}

struct OptimizerConfig {
  std::size_t max_iterations = 100000;
  StepSchedule schedule = StepSchedule::kInverseT;
  double step_size = 0.1;  // used by kFixed only
  double gradient_tolerance = 1e-8;
  std::optional<double> kappa_override;
  std::optional<double> gamma_override;
};

struct EstimatorResult {
  RewardParam theta_hat;
  std::size_t iterations_used = 0;
  double final_gradient_norm = 0.0;
  PrivacyBudget budget_spent;
  bool converged = true;
  // MLE-RR only: eps <= 2LB, where its error guarantee is vacuous.
  bool outside_guarantee_regime = false;
  // Objective perturbation only: the central guarantee covers the exact
  // minimizer; the returned iterate is an approximation of it.
  bool approximate_minimizer = false;
  double noise_sigma = 0.0;
  double beta = 0.0;
};

// Euclidean projection onto {sum(theta) = 0, |theta| <= B}. The hyperplane
// passes through the center of the ball, so centering followed by radial
// shrinkage is the exact projection.
inline RewardParam project_theta_B(ConstVectorView v, double B) {
  if (!(B > 0.0)) throw DomainError("project_theta_B: B must be positive");
  if (v.empty()) throw DomainError("project_theta_B: empty vector");
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  Vector p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i] - mean;
  const double norm = norm2(p);
  if (norm > B) {
    const double shrink = B / norm;
    for (double& c : p) c *= shrink;
  }
  return RewardParam(std::move(p), B);
}

// kappa_hat = max(lambda_min(Sigma_D), 1e-6), or the override.
inline double estimate_kappa(std::span<const PreferenceSample> samples,
                             const OptimizerConfig& cfg) {
  if (cfg.kappa_override) return *cfg.kappa_override;
  return std::max(min_eigenvalue(empirical_covariance(samples)), 1e-6);
}

// K-wise coverage: the smallest lambda_min over the covariances of all
// pairwise action-feature differences.
inline double estimate_kappa(std::span<const KWiseSample> samples,
                             const OptimizerConfig& cfg) {
  if (cfg.kappa_override) return *cfg.kappa_override;
  if (samples.empty()) throw DomainError("estimate_kappa: empty dataset");
  const std::size_t K = samples.front().K();
  double kappa = std::numeric_limits<double>::infinity();
  std::vector<Vector> rows(samples.size());
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i + 1; j < K; ++j) {
      for (std::size_t t = 0; t < samples.size(); ++t)
        rows[t] = subtract(samples[t].action_features[j],
                           samples[t].action_features[i]);
      kappa = std::min(kappa, min_eigenvalue(covariance_of_rows(rows)));
    }
  }
  return std::max(kappa, 1e-6);
}

namespace detail {

inline void check_optimizer_config(const OptimizerConfig& cfg) {
  if (cfg.max_iterations == 0)
    throw DomainError("OptimizerConfig: max_iterations must be positive");
  if (!(cfg.gradient_tolerance > 0.0))
    throw DomainError("OptimizerConfig: gradient_tolerance must be positive");
  if (!(cfg.step_size > 0.0))
    throw DomainError("OptimizerConfig: step_size must be positive");
  if (cfg.kappa_override && !(*cfg.kappa_override > 0.0))
    throw DomainError("OptimizerConfig: kappa_override must be positive");
  if (cfg.gamma_override && !(*cfg.gamma_override > 0.0))
    throw DomainError("OptimizerConfig: gamma_override must be positive");
}

inline void check_samples(std::span<const PreferenceSample> samples,
                          const ParamSpace& space, const char* what) {
  if (samples.empty()) throw DomainError(what);
  for (const auto& s : samples)
    if (s.x.size() != space.d) throw DomainError("estimator: dimension mismatch");
}

// lambda_max(sum_i x_i x_i^T).
inline double scatter_max_eigenvalue(std::span<const PreferenceSample> samples) {
  return max_eigenvalue(empirical_covariance(samples).entries) *
         static_cast<double>(samples.size());
}

using Objective = std::function<LossEval(const Vector&)>;

// Projected gradient descent from theta = 0.
//
// `certified_step` must be 1 / (a global smoothness bound of the objective),
// so a step of that size always decreases it. Each iteration first tries
// twice the previous step and backtracks by halving under the Armijo rule
// (constant 1e-4) until it passes or the certified step is reached.
// Stops when the gradient-mapping norm |theta - theta+| / step is at most
// the tolerance.
inline EstimatorResult projected_gradient_descent(const Objective& objective,
                                                  const ParamSpace& space,
                                                  double certified_step,
                                                  const OptimizerConfig& cfg) {
  constexpr double kArmijo = 1e-4;
  RewardParam theta = RewardParam::zero(space.d);
  LossEval current = objective(theta.coords());
  double step = certified_step;

  EstimatorResult result;
  result.converged = false;
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    double trial = std::max(2.0 * step, certified_step);
    RewardParam next;
    LossEval next_eval;
    for (;;) {
      Vector moved = theta.coords();
      axpy(-trial, current.gradient, moved);
      next = project_theta_B(moved, space.B);
      next_eval = objective(next.coords());
      if (trial <= certified_step) break;
      const Vector delta = subtract(next.coords(), theta.coords());
      if (next_eval.value <= current.value + kArmijo * dot(current.gradient, delta))
        break;
      trial = std::max(0.5 * trial, certified_step);
    }
    const double mapping_norm =
        norm2(subtract(theta.coords(), next.coords())) / trial;

    result.iterations_used = iter + 1;
    result.final_gradient_norm = mapping_norm;
    if (mapping_norm <= cfg.gradient_tolerance) {
      result.converged = true;
      break;
    }
    theta = std::move(next);
    current = std::move(next_eval);
    step = trial;
  }
  result.theta_hat = std::move(theta);
  return result;
}

}  // namespace detail

// Minimizer of the clear-text negative log-likelihood over the ball.
inline EstimatorResult fit_mle_clear(std::span<const PreferenceSample> samples,
                                     const ParamSpace& space,
                                     const OptimizerConfig& cfg) {
  detail::check_samples(samples, space, "fit_mle_clear: empty dataset");
  detail::check_optimizer_config(cfg);
  const double smooth = 0.25 * detail::scatter_max_eigenvalue(samples);
  auto result = detail::projected_gradient_descent(
      [&](const Vector& th) { return nll_clear(samples, th); }, space,
      smooth > 0.0 ? 1.0 / smooth : 1.0, cfg);
  result.budget_spent = PrivacyBudget::none();
  return result;
}

// Minimizer of the randomized-label likelihood. Flags eps <= 2LB.
inline EstimatorResult fit_mle_rr(const RandomizedDataset& data,
                                  const ParamSpace& space,
                                  const OptimizerConfig& cfg) {
  detail::check_samples(data.samples, space, "fit_mle_rr: empty dataset");
  detail::check_optimizer_config(cfg);
  const double eps = data.epsilon;
  if (!(eps >= 0.0)) throw DomainError("fit_mle_rr: epsilon < 0");
  // |h''| <= u + u^2 with u = min(1, gap / (4 * flip)), gap = 2 sigma(eps) - 1.
  const double flip = sigmoid(-eps);
  const double gap = sigmoid(eps) - flip;
  const double u = std::min(1.0, gap / (4.0 * flip));
  const double smooth = (u + u * u) * detail::scatter_max_eigenvalue(data.samples);
  auto result = detail::projected_gradient_descent(
      [&](const Vector& th) { return nll_rr(data.samples, th, eps); }, space,
      smooth > 0.0 ? 1.0 / smooth : 1.0, cfg);
  result.budget_spent = PrivacyBudget::local(eps);
  result.outside_guarantee_regime = eps <= 2.0 * space.L * space.B;
  return result;
}

// Minimizer of the de-biased randomized-response loss.
inline EstimatorResult fit_debiased_rr(const RandomizedDataset& data,
                                       const ParamSpace& space,
                                       const OptimizerConfig& cfg) {
  detail::check_samples(data.samples, space, "fit_debiased_rr: empty dataset");
  detail::check_optimizer_config(cfg);
  const double eps = data.epsilon;
  if (!(eps > 0.0)) throw DomainError("fit_debiased_rr: epsilon must be positive");
  const double gap = sigmoid(eps) - sigmoid(-eps);
  const double smooth = 0.25 * gap * detail::scatter_max_eigenvalue(data.samples);
  auto result = detail::projected_gradient_descent(
      [&](const Vector& th) { return debiased_rr_loss(data.samples, th, eps); },
      space, smooth > 0.0 ? 1.0 / smooth : 1.0, cfg);
  result.budget_spent = PrivacyBudget::local(eps);
  return result;
}

namespace detail {

inline double sgd_step(const OptimizerConfig& cfg, double lambda,
                       std::size_t t) {
  switch (cfg.schedule) {
    case StepSchedule::kInverseT:
      return 1.0 / (lambda * static_cast<double>(t));
    case StepSchedule::kConstant:
      return 1.0 / lambda;
    case StepSchedule::kFixed:
      return cfg.step_size;
  }
  return cfg.step_size;
}

inline void require_positive_modulus(const OptimizerConfig& cfg, double lambda,
                                     const char* what) {
  if (cfg.schedule != StepSchedule::kFixed && !(lambda > 0.0))
    throw DomainError(what);
}

}  // namespace detail

// One projected SGD pass with the randomized-response corrected gradient,
// theta_1 = 0. With the default schedule the step is 1 / (gamma_eps kappa t)
// where gamma_eps = gamma (2 sigma(eps) - 1). The Thurstone link has no
// closed-form gamma, so it needs cfg.gamma_override unless the fixed step is
// used.
inline EstimatorResult sgd_rr(const RandomizedDataset& data,
                              const ParamSpace& space,
                              const OptimizerConfig& cfg,
                              LinkModel link = LinkModel::kBtl) {
  detail::check_samples(data.samples, space, "sgd_rr: empty dataset");
  detail::check_optimizer_config(cfg);
  const double eps = data.epsilon;
  if (!(eps >= 0.0)) throw DomainError("sgd_rr: epsilon < 0");

  double lambda = 0.0;
  if (cfg.schedule != StepSchedule::kFixed) {
    double gamma = 0.0;
    if (cfg.gamma_override) {
      gamma = *cfg.gamma_override;
    } else if (link == LinkModel::kBtl) {
      gamma = gamma_constant(space.L, space.B);
    } else {
      throw DomainError("sgd_rr: Thurstone link requires gamma_override");
    }
    lambda = gamma * (sigmoid(eps) - sigmoid(-eps)) *
             estimate_kappa(data.samples, cfg);
  }
  detail::require_positive_modulus(
      cfg, lambda, "sgd_rr: eps = 0 gives an infinite step; use paper-eta");

  Vector theta(space.d, 0.0);
  std::size_t t = 0;
  for (const PreferenceSample& s : data.samples) {
    ++t;
    const Vector g = sgd_rr_gradient(s.x, s.y, theta, eps, link);
    axpy(-detail::sgd_step(cfg, lambda, t), g, theta);
    theta = project_theta_B(theta, space.B).coords();
  }

  EstimatorResult result;
  result.theta_hat = RewardParam(std::move(theta), space.B);
  result.iterations_used = t;
  result.budget_spent = PrivacyBudget::local(eps);
  return result;
}

// K-ary analogue of sgd_rr under the top-choice Plackett-Luce model. The
// default gamma is exp(-4LB)/2 and gamma_eps = gamma (e^eps - 1)/(e^eps + K - 1).
inline EstimatorResult sgd_krr(const KWiseRandomizedDataset& data,
                               const ParamSpace& space,
                               const OptimizerConfig& cfg) {
  if (data.samples.empty()) throw DomainError("sgd_krr: empty dataset");
  if (data.K < 2) throw DomainError("sgd_krr: K must be >= 2");
  detail::check_optimizer_config(cfg);
  const double eps = data.epsilon;
  if (!(eps >= 0.0)) throw DomainError("sgd_krr: epsilon < 0");
  for (const KWiseSample& s : data.samples) {
    if (static_cast<int>(s.K()) != data.K)
      throw DomainError("sgd_krr: sample has the wrong number of actions");
    if (s.y < 1 || s.y > data.K) throw DomainError("sgd_krr: label out of range");
    for (const Vector& phi : s.action_features)
      if (phi.size() != space.d) throw DomainError("sgd_krr: dimension mismatch");
  }

  double lambda = 0.0;
  if (cfg.schedule != StepSchedule::kFixed) {
    const double gamma = cfg.gamma_override
                             ? *cfg.gamma_override
                             : pl_gamma_constant(space.L, space.B);
    const double e_neg = std::exp(-eps);
    const double scale =
        (1.0 - e_neg) / (1.0 + static_cast<double>(data.K - 1) * e_neg);
    lambda = gamma * scale * estimate_kappa(data.samples, cfg);
  }
  detail::require_positive_modulus(
      cfg, lambda, "sgd_krr: eps = 0 gives an infinite step; use paper-eta");

  Vector theta(space.d, 0.0);
  std::size_t t = 0;
  for (const KWiseSample& s : data.samples) {
    ++t;
    const Vector g = sgd_krr_gradient(s.action_features, s.y, theta, eps, data.K);
    axpy(-detail::sgd_step(cfg, lambda, t), g, theta);
    theta = project_theta_B(theta, space.B).coords();
  }

  EstimatorResult result;
  result.theta_hat = RewardParam(std::move(theta), space.B);
  result.iterations_used = t;
  result.budget_spent = PrivacyBudget::local(eps);
  return result;
}

// Central-model objective perturbation:
//   argmin_{theta in ball} l_D(theta) + (beta/2)|theta|^2 + w^T theta,
//   w ~ N(0, sigma^2 I), sigma = central_noise_sigma(L, budget).
// Default beta is sqrt(n)/B; central-standard mode raises it to at least
// 4L^2/eps. `sigma_override` replaces the calibrated noise scale and exists
// for testing degenerate reductions; it voids the privacy guarantee.
inline EstimatorResult fit_objective_perturbation(
    std::span<const PreferenceSample> samples, const ParamSpace& space,
    const PrivacyBudget& budget, std::optional<double> beta, RngStream& rng,
    const OptimizerConfig& cfg, std::optional<double> sigma_override = {}) {
  detail::check_samples(samples, space, "fit_objective_perturbation: empty dataset");
  detail::check_optimizer_config(cfg);
  if (budget.mode == PrivacyMode::kLocalLabel)
    throw DomainError("fit_objective_perturbation: budget must be central");
  const double sigma =
      sigma_override ? *sigma_override : central_noise_sigma(space.L, budget);
  if (!(sigma >= 0.0)) throw DomainError("fit_objective_perturbation: sigma < 0");

  double reg = std::sqrt(static_cast<double>(samples.size())) / space.B;
  if (beta) {
    reg = *beta;
  } else if (budget.mode == PrivacyMode::kCentralStandard) {
    reg = std::max(reg, standard_dp_beta_floor(space.L, budget.epsilon));
  }
  if (!(reg >= 0.0)) throw DomainError("fit_objective_perturbation: beta < 0");

  const Vector w = sample_gaussian_vector(space.d, sigma, rng);
  const detail::Objective objective = [&](const Vector& th) {
    LossEval e = nll_clear(samples, th);
    e.value += 0.5 * reg * dot(th, th) + dot(w, th);
    axpy(reg, th, e.gradient);
    axpy(1.0, w, e.gradient);
    return e;
  };
  const double smooth = 0.25 * detail::scatter_max_eigenvalue(samples) + reg;
  auto result = detail::projected_gradient_descent(
      objective, space, smooth > 0.0 ? 1.0 / smooth : 1.0, cfg);
  result.budget_spent = budget;
  result.approximate_minimizer = true;
  result.noise_sigma = sigma;
  result.beta = reg;
  return result;
}

// Greedy plug-in policy: the action with the largest estimated reward,
// lowest index on ties.
inline std::size_t greedy_policy_action(ConstVectorView theta_hat,
                                        std::span<const Vector> action_features) {
  if (action_features.empty())
    throw DomainError("greedy_policy_action: empty action list");
  std::size_t best = 0;
  double best_score = dot(action_features[0], theta_hat);
  for (std::size_t a = 1; a < action_features.size(); ++a) {
    const double score = dot(action_features[a], theta_hat);
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

}  // namespace dplabel

#endif  // DPLABEL_ESTIMATORS_HPP_
