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

// Self-checks behind the `check-privacy` and `gradcheck` subcommands. The
// mechanism and gradient under test are injectable so a broken
// implementation can be shown to fail.

#ifndef DPLABEL_CHECKS_HPP_
#define DPLABEL_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/losses.hpp"
#include "dplabel/privacy.hpp"
#include "dplabel/rng.hpp"

namespace dplabel {

// ---------------------------------------------------------------------------
// Mechanism frequencies

using BinaryRandomizer = std::function<int(int y, double epsilon, RngStream& rng)>;
using KaryRandomizer = std::function<int(int y, int K, double epsilon, RngStream& rng)>;

struct PrivacyCheckReport {
  double epsilon = 0.0;
  std::size_t trials = 0;
  double keep_rate = 0.0;
  double expected_keep_rate = 0.0;
  double z_score = 0.0;
  int krr_K = 0;
  double krr_chi_square = 0.0;
  double krr_p_value = 1.0;
  bool rr_pass = false;
  bool krr_pass = false;
  bool pass = false;
};

inline constexpr double kPrivacyZThreshold = 4.0;
inline constexpr double kPrivacyChiSquareLevel = 1e-3;

// Binary keep-rate z-test plus a chi-square goodness-of-fit test of the K-RR
// output distribution relative to the true label. True labels cycle through
// every class so both directions are exercised.
inline PrivacyCheckReport check_privacy(double epsilon, std::size_t trials, RngStream& rng,
                                        const BinaryRandomizer& rr = randomized_response,
                                        const KaryRandomizer& krr = k_randomized_response,
                                        int K = 4) {
  if (!(epsilon >= 0.0)) throw DomainError("check_privacy: epsilon must be >= 0");
  if (trials < 10000) throw DomainError("check_privacy: trials must be >= 10000");
  if (K < 2) throw DomainError("check_privacy: K must be >= 2");

  PrivacyCheckReport rep;
  rep.epsilon = epsilon;
  rep.trials = trials;
  rep.krr_K = K;

  std::size_t kept = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int y = static_cast<int>(t % 2);
    if (rr(y, epsilon, rng) == y) ++kept;
  }
  const double T = static_cast<double>(trials);
  rep.keep_rate = static_cast<double>(kept) / T;
  rep.expected_keep_rate = rr_keep_probability(epsilon);
  const double p = rep.expected_keep_rate;
  const double se = std::sqrt(p * (1.0 - p) / T);
  const double diff = rep.keep_rate - p;
  if (se > 0.0) {
    rep.z_score = diff / se;
  } else {
    rep.z_score = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  rep.rr_pass = std::abs(rep.z_score) <= kPrivacyZThreshold;

  // Category 0 = label kept, category k = label shifted by k (mod K).
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    const int y = 1 + static_cast<int>(t % static_cast<std::size_t>(K));
    const int out = krr(y, K, epsilon, rng);
    if (out < 1 || out > K) {
      rep.krr_chi_square = std::numeric_limits<double>::infinity();
      break;
    }
    ++counts[static_cast<std::size_t>((out - y + K) % K)];
  }
  if (std::isfinite(rep.krr_chi_square)) {
    const double keep = krr_keep_probability(K, epsilon);
    for (int k = 0; k < K; ++k) {
      const double prob = k == 0 ? keep : (1.0 - keep) / static_cast<double>(K - 1);
      const double expected = prob * T;
      const double observed = static_cast<double>(counts[static_cast<std::size_t>(k)]);
      if (expected < 1e-12) {
        if (observed > 0.0) rep.krr_chi_square = std::numeric_limits<double>::infinity();
        continue;
      }
      rep.krr_chi_square += (observed - expected) * (observed - expected) / expected;
    }
  }
  if (std::isfinite(rep.krr_chi_square)) {
    const boost::math::chi_squared dist(static_cast<double>(K - 1));
    rep.krr_p_value = boost::math::cdf(boost::math::complement(dist, rep.krr_chi_square));
  } else {
    rep.krr_p_value = 0.0;
  }
  rep.krr_pass = rep.krr_p_value >= kPrivacyChiSquareLevel;
  rep.pass = rep.rr_pass && rep.krr_pass;
  return rep;
}

// ---------------------------------------------------------------------------
// Gradient checks

using BatchLoss = std::function<LossEval(std::span<const PreferenceSample>,
                                         ConstVectorView theta, double epsilon)>;
using RrGradient = std::function<Vector(ConstVectorView x, int y_tilde, ConstVectorView theta,
                                        double epsilon)>;
using KrrGradient = std::function<Vector(std::span<const Vector> features, int y_tilde,
                                         ConstVectorView theta, double epsilon, int K)>;

// The implementations under test. Defaults are the library's own.
struct GradcheckTargets {
  BatchLoss nll_clear = [](std::span<const PreferenceSample> s, ConstVectorView t, double) {
    return dplabel::nll_clear(s, t);
  };
  BatchLoss nll_rr = [](std::span<const PreferenceSample> s, ConstVectorView t, double e) {
    return dplabel::nll_rr(s, t, e);
  };
  BatchLoss debiased_rr_loss = [](std::span<const PreferenceSample> s, ConstVectorView t,
                                  double e) { return dplabel::debiased_rr_loss(s, t, e); };
  RrGradient sgd_rr = [](ConstVectorView x, int y, ConstVectorView t, double e) {
    return sgd_rr_gradient(x, y, t, e);
  };
  KrrGradient sgd_krr = [](std::span<const Vector> f, int y, ConstVectorView t, double e,
                           int K) { return sgd_krr_gradient(f, y, t, e, K); };
};

struct GradcheckReport {
  std::uint64_t seed = 0;
  std::size_t cases = 0;
  double max_fd_error_nll_clear = 0.0;
  double max_fd_error_nll_rr = 0.0;
  double max_fd_error_debiased = 0.0;
  double max_identity_error_rr = 0.0;
  double max_identity_error_krr = 0.0;
  bool pass = false;

  double max_fd_error() const {
    return std::max({max_fd_error_nll_clear, max_fd_error_nll_rr, max_fd_error_debiased});
  }
  double max_identity_error() const {
    return std::max(max_identity_error_rr, max_identity_error_krr);
  }
};

inline constexpr double kFiniteDifferenceTolerance = 1e-5;
inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kFiniteDifferenceStep = 1e-6;

namespace detail {

inline double max_abs(ConstVectorView v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// max_i |a_i - b_i| / max(1, max_i |b_i|); NaN anywhere counts as infinite.
inline double relative_error(ConstVectorView a, ConstVectorView b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    if (std::isnan(diff)) return std::numeric_limits<double>::infinity();
    m = std::max(m, diff);
  }
  return m / std::max(1.0, max_abs(b));
}

inline Vector gaussian_vector(std::size_t d, double scale, RngStream& rng) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline double fd_error(const BatchLoss& loss, std::span<const PreferenceSample> samples,
                       const Vector& theta, double epsilon) {
  const LossEval analytic = loss(samples, theta, epsilon);
  Vector numeric(theta.size());
  Vector probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + kFiniteDifferenceStep;
    const double up = loss(samples, probe, epsilon).value;
    probe[i] = theta[i] - kFiniteDifferenceStep;
    const double down = loss(samples, probe, epsilon).value;
    probe[i] = theta[i];
    numeric[i] = (up - down) / (2.0 * kFiniteDifferenceStep);
  }
  return relative_error(analytic.gradient, numeric);
}

}  // namespace detail

// Each case draws d in [2, 10], n in [1, 20], Gaussian features, a random
// theta and eps in [0.05, 3]. The loss gradients are compared to central
// differences. The stochastic gradients are averaged exactly over the
// randomizer's output distribution and compared to the scaled clear-text
// gradient, computed here from scratch.
inline GradcheckReport gradcheck(std::uint64_t seed, std::size_t cases,
                                 const GradcheckTargets& targets = {}) {
  if (cases < 1) throw DomainError("gradcheck: cases must be >= 1");
  GradcheckReport rep;
  rep.seed = seed;
  rep.cases = cases;
  RngStream rng(seed, 0);

  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t d = 2 + rng.uniform_index(9);
    const std::size_t n = 1 + rng.uniform_index(20);
    const double epsilon = 0.05 + 2.95 * rng.uniform();
    const Vector theta = detail::gaussian_vector(d, 0.7, rng);
    std::vector<PreferenceSample> samples(n);
    for (auto& s : samples) {
      s.x = detail::gaussian_vector(d, 1.0, rng);
      s.y = rng.uniform() < 0.5 ? 1 : 0;
    }

    rep.max_fd_error_nll_clear = std::max(
        rep.max_fd_error_nll_clear, detail::fd_error(targets.nll_clear, samples, theta, epsilon));
    rep.max_fd_error_nll_rr = std::max(
        rep.max_fd_error_nll_rr, detail::fd_error(targets.nll_rr, samples, theta, epsilon));
    rep.max_fd_error_debiased =
        std::max(rep.max_fd_error_debiased,
                 detail::fd_error(targets.debiased_rr_loss, samples, theta, epsilon));

    // Binary: E[g | y] = (2 sigmoid(eps) - 1) (s - y) x.
    const double keep = 1.0 / (1.0 + std::exp(-epsilon));
    for (const auto& s : samples) {
      const double z = dot(s.x, theta);
      const double prob1 = 1.0 / (1.0 + std::exp(-z));
      for (int y = 0; y <= 1; ++y) {
        Vector expected(d, 0.0);
        axpy(keep, targets.sgd_rr(s.x, y, theta, epsilon), expected);
        axpy(1.0 - keep, targets.sgd_rr(s.x, 1 - y, theta, epsilon), expected);
        const Vector oracle = scaled(s.x, (2.0 * keep - 1.0) * (prob1 - y));
        rep.max_identity_error_rr =
            std::max(rep.max_identity_error_rr, detail::relative_error(expected, oracle));
      }
    }

    // K-ary: E[g | y] = (e^eps - 1)/(e^eps + K - 1) (sum_j pi_j phi_j - phi_y).
    const int K = 2 + static_cast<int>(rng.uniform_index(5));
    std::vector<Vector> features(static_cast<std::size_t>(K));
    for (auto& f : features) f = detail::gaussian_vector(d, 1.0, rng);
    std::vector<double> weights(features.size());
    double total = 0.0;
    for (std::size_t j = 0; j < features.size(); ++j) {
      weights[j] = std::exp(dot(features[j], theta));
      total += weights[j];
    }
    Vector mean_feature(d, 0.0);
    for (std::size_t j = 0; j < features.size(); ++j)
      axpy(weights[j] / total, features[j], mean_feature);
    const double e = std::exp(epsilon);
    const double keep_k = e / (e + K - 1.0);
    const double other_k = 1.0 / (e + K - 1.0);
    const double factor = (e - 1.0) / (e + K - 1.0);
    std::vector<Vector> grads;
    for (int yt = 1; yt <= K; ++yt) grads.push_back(targets.sgd_krr(features, yt, theta, epsilon, K));
    for (int y = 1; y <= K; ++y) {
      Vector expected(d, 0.0);
      for (int yt = 1; yt <= K; ++yt)
        axpy(yt == y ? keep_k : other_k, grads[static_cast<std::size_t>(yt - 1)], expected);
      Vector oracle = subtract(mean_feature, features[static_cast<std::size_t>(y - 1)]);
      for (double& v : oracle) v *= factor;
      rep.max_identity_error_krr =
          std::max(rep.max_identity_error_krr, detail::relative_error(expected, oracle));
    }
  }
  rep.pass = rep.max_fd_error() < kFiniteDifferenceTolerance &&
             rep.max_identity_error() < kIdentityTolerance;
  return rep;
}

}  // namespace dplabel

#endif  // DPLABEL_CHECKS_HPP_
