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

// Training objectives and per-sample stochastic gradients.
//
// Dataset losses are sums over samples, not means. Every batch loss here is
// a sum of terms f(x_i^T theta) so each gradient is sum_i c_i x_i for a
// scalar coefficient c_i; the coefficients are written out per loss.
//
// With s = sigmoid(x^T theta), a = sigmoid(eps) and c = 1 - a:
//
//   clear NLL       y=1: -log s                          coef: s - y
//   noisy NLL       y=1: -log(c + (a - c) s)             coef: -(a-c)s(1-s)/p
//   de-biased loss  y=1: -[a log s - c log(1 - s)]       coef: (a-c)s + c - y
//
// The de-biased scores satisfy log p1 - log p0 = x^T theta for every eps.

#ifndef DPLABEL_LOSSES_HPP_
#define DPLABEL_LOSSES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/privacy.hpp"

namespace dplabel {

struct LossEval {
  double value = 0.0;
  Vector gradient;
};

namespace detail {

inline constexpr double kLogFloor = 1e-300;

inline void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw DomainError(what);
}

inline void require_binary(int y, const char* what) {
  if (y != 0 && y != 1) throw DomainError(what);
}

inline void require_epsilon(double epsilon, const char* what) {
  if (!(epsilon >= 0.0)) throw DomainError(what);
}

// Accumulates sum_i term_i(z_i) and sum_i coef_i(z_i) x_i in sample order.
template <typename Term>
LossEval sum_over_samples(std::span<const PreferenceSample> samples,
                          ConstVectorView theta, Term term) {
  LossEval out{0.0, Vector(theta.size(), 0.0)};
  for (const PreferenceSample& s : samples) {
    require_same_dim(s.x, theta, "loss: dimension mismatch");
    const double z = dot(s.x, theta);
    const auto [value, coef] = term(z, s.y);
    out.value += value;
    axpy(coef, s.x, out.gradient);
  }
  return out;
}

}  // namespace detail

// Clear-text negative log-likelihood under BTL.
inline LossEval nll_clear(std::span<const PreferenceSample> samples,
                          ConstVectorView theta) {
  detail::require_nonempty(samples.size(), "nll_clear: empty dataset");
  return detail::sum_over_samples(
      samples, theta, [](double z, int y) -> std::pair<double, double> {
        detail::require_binary(y, "nll_clear: label must be 0 or 1");
        const double value = y == 1 ? -log_sigmoid(z) : -log_sigmoid(-z);
        return {value, sigmoid(z) - y};
      });
}

// Likelihood of the randomized labels:
//   p1 = s a + (1 - s)(1 - a),  p0 = 1 - p1.
inline LossEval nll_rr(std::span<const PreferenceSample> samples,
                       ConstVectorView theta, double epsilon) {
  detail::require_nonempty(samples.size(), "nll_rr: empty dataset");
  detail::require_epsilon(epsilon, "nll_rr: epsilon < 0");
  const double keep = sigmoid(epsilon);
  const double flip = sigmoid(-epsilon);
  const double gap = keep - flip;
  return detail::sum_over_samples(
      samples, theta, [=](double z, int y) -> std::pair<double, double> {
        detail::require_binary(y, "nll_rr: label must be 0 or 1");
        const double s = sigmoid(z);
        const double one_minus_s = sigmoid(-z);
        const double slope = gap * s * one_minus_s;
        if (y == 1) {
          const double p = std::max(flip + gap * s, detail::kLogFloor);
          return {-std::log(p), -slope / p};
        }
        const double p = std::max(flip + gap * one_minus_s, detail::kLogFloor);
        return {-std::log(p), slope / p};
      });
}

inline LossEval nll_rr(const RandomizedDataset& data, ConstVectorView theta) {
  return nll_rr(data.samples, theta, data.epsilon);
}

// log of the de-biased scores (p1_hat, p0_hat) at z = x^T theta, evaluated
// in log space so the scores themselves never have to be representable.
inline std::pair<double, double> debiased_log_scores(double z, double epsilon) {
  detail::require_epsilon(epsilon, "debiased_log_scores: epsilon < 0");
  const double keep = sigmoid(epsilon);
  const double flip = sigmoid(-epsilon);
  const double log_s = log_sigmoid(z);
  const double log_1ms = log_sigmoid(-z);
  return {keep * log_s - flip * log_1ms, keep * log_1ms - flip * log_s};
}

inline LossEval debiased_rr_loss(std::span<const PreferenceSample> samples,
                                 ConstVectorView theta, double epsilon) {
  detail::require_nonempty(samples.size(), "debiased_rr_loss: empty dataset");
  detail::require_epsilon(epsilon, "debiased_rr_loss: epsilon < 0");
  const double keep = sigmoid(epsilon);
  const double flip = sigmoid(-epsilon);
  return detail::sum_over_samples(
      samples, theta, [=](double z, int y) -> std::pair<double, double> {
        detail::require_binary(y, "debiased_rr_loss: label must be 0 or 1");
        const auto [log_p1, log_p0] = debiased_log_scores(z, epsilon);
        const double coef = (keep - flip) * sigmoid(z) + flip - y;
        return {y == 1 ? -log_p1 : -log_p0, coef};
      });
}

inline LossEval debiased_rr_loss(const RandomizedDataset& data,
                                 ConstVectorView theta) {
  return debiased_rr_loss(data.samples, theta, data.epsilon);
}

// ---------------------------------------------------------------------------
// Per-sample stochastic gradients

// Scalar coefficients of grad log p_1 and grad log p_0 along x at z.
inline std::pair<double, double> log_prob_slopes(LinkModel link, double z) {
  if (link == LinkModel::kBtl) return {sigmoid(-z), -sigmoid(z)};
  // Thurstone: d/dz log Phi(z) = pdf(z)/Phi(z). Use the asymptotic Mills
  // ratio once Phi underflows.
  auto hazard = [](double t) {
    const double cdf = normal_cdf(t);
    if (cdf > 1e-280) return normal_pdf(t) / cdf;
    return -t - 1.0 / t;
  };
  return {hazard(z), -hazard(-z)};
}

// The randomized-response corrected gradient
//   g = (grad log p_0 + grad log p_1) / (e^eps + 1) - grad log p_{y_tilde}.
// Its expectation over y_tilde given the clear label y is
// (2 sigmoid(eps) - 1) (-grad log p_y).
inline Vector sgd_rr_gradient(ConstVectorView x, int y_tilde,
                              ConstVectorView theta, double epsilon,
                              LinkModel link = LinkModel::kBtl) {
  detail::require_binary(y_tilde, "sgd_rr_gradient: label must be 0 or 1");
  detail::require_epsilon(epsilon, "sgd_rr_gradient: epsilon < 0");
  require_same_dim(x, theta, "sgd_rr_gradient: dimension mismatch");
  const double z = dot(x, theta);
  const auto [slope1, slope0] = log_prob_slopes(link, z);
  const double inv_denominator = sigmoid(-epsilon);  // 1 / (e^eps + 1)
  const double observed = y_tilde == 1 ? slope1 : slope0;
  return scaled(x, inv_denominator * (slope1 + slope0) - observed);
}

// grad_theta log P[top choice = label] under the top-choice Plackett-Luce
// model, label in {1..K}: phi_label - sum_j softmax_j phi_j.
inline Vector pl_log_prob_gradient(std::span<const Vector> action_features,
                                   int label, ConstVectorView theta) {
  const int K = static_cast<int>(action_features.size());
  if (label < 1 || label > K)
    throw DomainError("pl_log_prob_gradient: label out of range");
  const Vector probs = pl_label_probs(action_features, theta);
  Vector grad(action_features[static_cast<std::size_t>(label - 1)]);
  for (std::size_t j = 0; j < probs.size(); ++j)
    axpy(-probs[j], action_features[j], grad);
  return grad;
}

// K-ary analogue of sgd_rr_gradient:
//   g = sum_y grad log p_y / (e^eps + K - 1) - grad log p_{y_tilde}.
inline Vector sgd_krr_gradient(std::span<const Vector> action_features,
                               int y_tilde, ConstVectorView theta,
                               double epsilon, int K) {
  if (K < 2) throw DomainError("sgd_krr_gradient: K must be >= 2");
  if (static_cast<int>(action_features.size()) != K)
    throw DomainError("sgd_krr_gradient: feature count differs from K");
  if (y_tilde < 1 || y_tilde > K)
    throw DomainError("sgd_krr_gradient: label out of range");
  detail::require_epsilon(epsilon, "sgd_krr_gradient: epsilon < 0");

  const Vector probs = pl_label_probs(action_features, theta);
  const std::size_t d = theta.size();
  Vector mean_feature(d, 0.0);
  for (std::size_t j = 0; j < probs.size(); ++j)
    axpy(probs[j], action_features[j], mean_feature);

  // 1 / (e^eps + K - 1) without overflow.
  const double e_neg = std::exp(-epsilon);
  const double weight =
      e_neg / (1.0 + static_cast<double>(K - 1) * e_neg);

  // sum_y grad log p_y = sum_y phi_y - K * mean_feature.
  Vector g(d, 0.0);
  for (const Vector& phi : action_features) axpy(weight, phi, g);
  axpy(-weight * static_cast<double>(K), mean_feature, g);

  const Vector& observed = action_features[static_cast<std::size_t>(y_tilde - 1)];
  axpy(-1.0, observed, g);
  axpy(1.0, mean_feature, g);
  return g;
}

}  // namespace dplabel

#endif  // DPLABEL_LOSSES_HPP_
