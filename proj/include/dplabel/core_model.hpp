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

// Preference models over a linear reward r(s, a) = phi(s, a)^T theta.
//
// Pairwise feedback carries the differential feature
//   x = phi(s, a1) - phi(s, a0)
// and a label y in {0, 1}, with y = 1 meaning a1 was preferred. Under the
// Bradley-Terry-Luce model P[y = 1 | x] = sigmoid(x^T theta); under the
// Thurstone model it is the standard normal CDF of x^T theta. K-wise
// feedback is a top choice y in {1..K} drawn from a softmax over the K
// action rewards (Plackett-Luce, top choice only).
//
// theta lives in the centered ball {theta : sum(theta) = 0, |theta| <= B}.

#ifndef DPLABEL_CORE_MODEL_HPP_
#define DPLABEL_CORE_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"

namespace dplabel {

inline constexpr double kCenterTolerance = 1e-9;
inline constexpr double kNormTolerance = 1e-9;

struct ParamSpace {
  std::size_t d = 2;
  double B = 1.0;  // norm bound on theta
  double L = 1.0;  // norm bound on action features

  ParamSpace() = default;
  ParamSpace(std::size_t dim, double bound, double feature_bound)
      : d(dim), B(bound), L(feature_bound) {
    if (d < 2) throw DomainError("ParamSpace: d must be >= 2");
    if (!(B > 0.0)) throw DomainError("ParamSpace: B must be positive");
    if (!(L > 0.0)) throw DomainError("ParamSpace: L must be positive");
  }
};

// A reward parameter known to lie in the centered ball of radius B.
class RewardParam {
 public:
  RewardParam() = default;

  // Throws DomainError unless coords are centered and within the ball.
  RewardParam(Vector coords, double bound) : coords_(std::move(coords)) {
    const double sum = std::accumulate(coords_.begin(), coords_.end(), 0.0);
    if (std::abs(sum) > kCenterTolerance)
      throw DomainError("RewardParam: coordinates must sum to zero");
    if (norm2(coords_) > bound + kNormTolerance)
      throw DomainError("RewardParam: norm exceeds bound");
  }

  static RewardParam zero(std::size_t d) {
    RewardParam p;
    p.coords_.assign(d, 0.0);
    return p;
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  const Vector& coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  operator ConstVectorView() const noexcept { return coords_; }

  friend bool operator==(const RewardParam&, const RewardParam&) = default;

 private:
  Vector coords_;
};

struct PreferenceSample {
  Vector x;   // differential feature phi(s, a1) - phi(s, a0)
  int y = 0;  // 1 iff a1 preferred
};

struct KWiseSample {
  std::vector<Vector> action_features;  // K vectors of length d
  int y = 1;                            // top choice, 1-based

  std::size_t K() const noexcept { return action_features.size(); }
};

struct CovarianceMatrix {
  Matrix entries;
  std::size_t n = 0;

  std::size_t dim() const noexcept { return entries.dim(); }
};

enum class LinkModel { kBtl, kThurstone };

// ---------------------------------------------------------------------------
// Scalar links

// Stable logistic function; never overflows for finite z.
inline double sigmoid(double z) {
  if (!std::isfinite(z)) throw DomainError("sigmoid: non-finite input");
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(sigmoid(z)), finite for every finite z.
inline double log_sigmoid(double z) {
  if (!std::isfinite(z)) throw DomainError("log_sigmoid: non-finite input");
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

// Standard normal CDF through the erfc relation Phi(z) = erfc(-z/sqrt2)/2.
inline double normal_cdf(double z) {
  if (!std::isfinite(z)) throw DomainError("normal_cdf: non-finite input");
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

inline double normal_pdf(double z) {
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// P[y = 1 | x] under BTL.
inline double btl_label_prob(ConstVectorView x, ConstVectorView theta) {
  require_same_dim(x, theta, "btl_label_prob: dimension mismatch");
  return sigmoid(dot(x, theta));
}

// P[y = 1 | x] under Thurstone.
inline double thurstone_label_prob(ConstVectorView x, ConstVectorView theta) {
  require_same_dim(x, theta, "thurstone_label_prob: dimension mismatch");
  return normal_cdf(dot(x, theta));
}

inline double label_prob(LinkModel link, ConstVectorView x,
                         ConstVectorView theta) {
  return link == LinkModel::kBtl ? btl_label_prob(x, theta)
                                 : thurstone_label_prob(x, theta);
}

// Softmax of the action rewards: component k is the probability that action
// k (0-based here) is the top choice.
inline Vector pl_label_probs(std::span<const Vector> action_features,
                             ConstVectorView theta) {
  if (action_features.size() < 2)
    throw DomainError("pl_label_probs: need at least two actions");
  Vector scores(action_features.size());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    require_same_dim(action_features[k], theta,
                     "pl_label_probs: dimension mismatch");
    scores[k] = dot(action_features[k], theta);
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    total += s;
  }
  for (double& s : scores) s /= total;
  return scores;
}

// Lower bound on sigmoid'(z) over |z| <= 2LB, the BTL curvature constant.
inline double gamma_constant(double L, double B) {
  if (!(L >= 0.0) || !(B >= 0.0))
    throw DomainError("gamma_constant: L and B must be nonnegative");
  const double t = 2.0 * L * B;
  return 1.0 / (2.0 + std::exp(-t) + std::exp(t));
}

// Curvature constant of the top-choice Plackett-Luce loss, exp(-4LB)/2.
inline double pl_gamma_constant(double L, double B) {
  if (!(L >= 0.0) || !(B >= 0.0))
    throw DomainError("pl_gamma_constant: L and B must be nonnegative");
  return 0.5 * std::exp(-4.0 * L * B);
}

// ---------------------------------------------------------------------------
// Covariance and spectrum

// (1/n) sum_i x_i x_i^T over a range of row vectors.
inline CovarianceMatrix covariance_of_rows(std::span<const Vector> rows) {
  if (rows.empty()) throw DomainError("empirical_covariance: empty input");
  const std::size_t d = rows.front().size();
  CovarianceMatrix cov{Matrix(d), rows.size()};
  for (const Vector& x : rows) {
    if (x.size() != d)
      throw DomainError("empirical_covariance: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) cov.entries(i, j) += x[i] * x[j];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov.entries(i, j) *= inv_n;
      cov.entries(j, i) = cov.entries(i, j);
    }
  return cov;
}

inline CovarianceMatrix empirical_covariance(
    std::span<const PreferenceSample> samples) {
  std::vector<Vector> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.x);
  return covariance_of_rows(rows);
}

inline void require_symmetric(const Matrix& m) {
  if (m.asymmetry() > 1e-9)
    throw DomainError("eigenvalue: matrix is not symmetric");
}

inline double min_eigenvalue(const Matrix& m) {
  require_symmetric(m);
  if (m.dim() == 0) throw DomainError("min_eigenvalue: empty matrix");
  return symmetric_eigenvalues(m).front();
}

inline double min_eigenvalue(const CovarianceMatrix& m) {
  return min_eigenvalue(m.entries);
}

inline double max_eigenvalue(const Matrix& m) {
  require_symmetric(m);
  if (m.dim() == 0) throw DomainError("max_eigenvalue: empty matrix");
  return symmetric_eigenvalues(m).back();
}

}  // namespace dplabel

#endif  // DPLABEL_CORE_MODEL_HPP_
