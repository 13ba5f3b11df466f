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

// Label privacy mechanisms.
//
// Local model: every label passes through randomized response (binary) or
// K-ary randomized response before the learner sees it.
//
// Central model: the learner sees clear labels and perturbs its training
// objective with a Gaussian linear term whose scale is calibrated here.

#ifndef DPLABEL_PRIVACY_HPP_
#define DPLABEL_PRIVACY_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/rng.hpp"

namespace dplabel {

enum class PrivacyMode { kLocalLabel, kCentralLabel, kCentralStandard };

inline std::string_view to_string(PrivacyMode mode) {
  switch (mode) {
    case PrivacyMode::kLocalLabel:
      return "local-label";
    case PrivacyMode::kCentralLabel:
      return "central-label";
    case PrivacyMode::kCentralStandard:
      return "central-standard";
  }
  return "unknown";
}

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  PrivacyMode mode = PrivacyMode::kLocalLabel;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del, PrivacyMode m)
      : epsilon(eps), delta(del), mode(m) {
    if (!(epsilon >= 0.0)) throw DomainError("PrivacyBudget: epsilon < 0");
    if (!(delta >= 0.0 && delta < 1.0))
      throw DomainError("PrivacyBudget: delta must lie in [0, 1)");
    if (mode == PrivacyMode::kLocalLabel && delta != 0.0)
      throw DomainError("PrivacyBudget: local-label mode requires delta = 0");
  }

  static PrivacyBudget local(double eps) {
    return {eps, 0.0, PrivacyMode::kLocalLabel};
  }
  // A budget tag for estimators that apply no mechanism at all.
  static PrivacyBudget none() {
    return {std::numeric_limits<double>::infinity(), 0.0,
            PrivacyMode::kLocalLabel};
  }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;
};

// Probability that randomized response reports the true label.
inline double rr_keep_probability(double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("randomized_response: epsilon < 0");
  return sigmoid(epsilon);
}

// e^eps / (e^eps + K - 1), written in the overflow-free form. For K = 2 this
// is the same expression as sigmoid(eps).
inline double krr_keep_probability(int K, double epsilon) {
  if (K < 2) throw DomainError("k_randomized_response: K must be >= 2");
  if (!(epsilon >= 0.0))
    throw DomainError("k_randomized_response: epsilon < 0");
  return 1.0 / (1.0 + static_cast<double>(K - 1) * std::exp(-epsilon));
}

// Binary randomized response on y in {0, 1}. Consumes one uniform draw.
inline int randomized_response(int y, double epsilon, RngStream& rng) {
  if (y != 0 && y != 1)
    throw DomainError("randomized_response: label must be 0 or 1");
  const double keep = rr_keep_probability(epsilon);
  return rng.uniform() < keep ? y : 1 - y;
}

// K-ary randomized response on y in {1..K}. Consumes one uniform draw; the
// draw is split so that for K = 2 the output matches randomized_response on
// the same stream.
inline int k_randomized_response(int y, int K, double epsilon, RngStream& rng) {
  if (K < 2) throw DomainError("k_randomized_response: K must be >= 2");
  if (y < 1 || y > K)
    throw DomainError("k_randomized_response: label out of range");
  const double keep = krr_keep_probability(K, epsilon);
  const double u = rng.uniform();
  if (u < keep) return y;
  auto slot = static_cast<int>((u - keep) / (1.0 - keep) *
                               static_cast<double>(K - 1));
  if (slot > K - 2) slot = K - 2;
  // slot indexes the K - 1 labels other than y, in increasing order.
  const int label = slot + 1;
  return label >= y ? label + 1 : label;
}

// Objective-perturbation noise scale.
//   central-label:    L sqrt(8 ln(2/delta) + 4 eps) / eps
//   central-standard: 4 L sqrt(8 ln(4/delta) + 2 eps) / eps
inline double central_noise_sigma(double L, const PrivacyBudget& budget) {
  if (budget.mode == PrivacyMode::kLocalLabel)
    throw ModeError("central_noise_sigma: budget is in local-label mode");
  if (!(budget.epsilon > 0.0))
    throw DomainError("central_noise_sigma: epsilon must be positive");
  if (!(budget.delta > 0.0 && budget.delta < 1.0))
    throw DomainError("central_noise_sigma: delta must lie in (0, 1)");
  if (!(L >= 0.0)) throw DomainError("central_noise_sigma: L < 0");
  const double eps = budget.epsilon;
  if (budget.mode == PrivacyMode::kCentralLabel)
    return L * std::sqrt(8.0 * std::log(2.0 / budget.delta) + 4.0 * eps) / eps;
  return 4.0 * L * std::sqrt(8.0 * std::log(4.0 / budget.delta) + 2.0 * eps) /
         eps;
}

// Minimum regularizer 4 L^2 / eps for the central-standard guarantee.
inline double standard_dp_beta_floor(double L, double epsilon) {
  if (!(epsilon > 0.0))
    throw DomainError("standard_dp_beta_floor: epsilon must be positive");
  return 4.0 * L * L / epsilon;
}

inline Vector sample_gaussian_vector(std::size_t d, double sigma,
                                     RngStream& rng) {
  if (d < 1) throw DomainError("sample_gaussian_vector: d must be >= 1");
  if (!(sigma >= 0.0))
    throw DomainError("sample_gaussian_vector: sigma must be >= 0");
  Vector w(d);
  for (double& v : w) v = sigma * rng.normal();
  return w;
}

// Samples whose labels went through randomized_response with `epsilon`.
struct RandomizedDataset {
  std::vector<PreferenceSample> samples;
  double epsilon = 0.0;
};

// K-wise samples whose labels went through k_randomized_response.
struct KWiseRandomizedDataset {
  std::vector<KWiseSample> samples;
  int K = 2;
  double epsilon = 0.0;
};

}  // namespace dplabel

#endif  // DPLABEL_PRIVACY_HPP_
