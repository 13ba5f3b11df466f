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

#ifndef DPLABEL_METRICS_HPP_
#define DPLABEL_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/estimators.hpp"
#include "dplabel/linalg.hpp"

namespace dplabel {

struct ErrorRecord {
  std::string estimator;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double l2_error = 0.0;
  double seminorm_error = 0.0;

  friend bool operator==(const ErrorRecord&, const ErrorRecord&) = default;
};

inline double l2_error(ConstVectorView theta_hat, ConstVectorView theta_star) {
  require_same_dim(theta_hat, theta_star, "l2_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < theta_hat.size(); ++i) {
    const double diff = theta_hat[i] - theta_star[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

// sqrt(delta^T (Sigma_D + lambda I) delta), delta = theta_hat - theta_star.
inline double seminorm_error(ConstVectorView theta_hat, ConstVectorView theta_star,
                             const CovarianceMatrix& sigma_d, double lambda) {
  require_same_dim(theta_hat, theta_star, "seminorm_error: dimension mismatch");
  if (sigma_d.dim() != theta_hat.size())
    throw DomainError("seminorm_error: dimension mismatch");
  if (!(lambda >= 0.0)) throw DomainError("seminorm_error: lambda < 0");
  const Vector delta = subtract(theta_hat, theta_star);
  const double q = sigma_d.entries.quadratic_form(delta) + lambda * dot(delta, delta);
  return std::sqrt(std::max(q, 0.0));
}

// lambda = ((e^eps + 1)/(e^eps - 1))^2 (d + log(1/alpha)) / (B^2 gamma^2 n),
// the tuning that balances the two terms of the de-biased estimator's
// semi-norm bound. eps = 0 has no finite value; 0 is returned there.
inline double default_seminorm_lambda(double epsilon, std::size_t d,
                                      std::size_t n, double B, double gamma,
                                      double alpha = 0.1) {
  if (!(epsilon > 0.0)) return 0.0;
  if (std::isinf(epsilon)) epsilon = 700.0;
  const double ratio = 1.0 / std::tanh(0.5 * epsilon);  // (e^eps+1)/(e^eps-1)
  return ratio * ratio * (static_cast<double>(d) + std::log(1.0 / alpha)) /
         (B * B * gamma * gamma * static_cast<double>(n));
}

// Least-squares slope of log(error) against log(n).
inline double rate_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("rate_fit: need at least 3 points");
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [n, err] : points) {
    if (!(n > 0.0) || !(err > 0.0))
      throw DomainError("rate_fit: values must be positive");
    logs.emplace_back(std::log(n), std::log(err));
    sx += logs.back().first;
    sy += logs.back().second;
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (!(sxx > 0.0)) throw DomainError("rate_fit: all n are equal");
  return sxy / sxx;
}

// Mean over states of max_a r*(a) - r*(greedy action under theta_hat), with
// r*(a) = phi(s, a)^T theta_star.
inline double suboptimality_gap(ConstVectorView theta_hat, ConstVectorView theta_star,
                                std::span<const std::vector<Vector>> eval_states) {
  if (eval_states.empty()) throw DomainError("suboptimality_gap: empty set");
  double total = 0.0;
  for (const auto& actions : eval_states) {
    const std::size_t best = greedy_policy_action(theta_star, actions);
    const std::size_t chosen = greedy_policy_action(theta_hat, actions);
    total += dot(actions[best], theta_star) - dot(actions[chosen], theta_star);
  }
  return total / static_cast<double>(eval_states.size());
}

// ---------------------------------------------------------------------------
// Aggregation and comparison across repetitions

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

// One-sided Welch t-test of H1: mean(a) < mean(b). Returns the p-value.
inline double welch_less_pvalue(std::span<const double> a, std::span<const double> b) {
  const Summary sa = summarize(a), sb = summarize(b);
  if (sa.count < 2 || sb.count < 2)
    throw DomainError("welch_less_pvalue: need at least two values per group");
  const double va = sa.stddev * sa.stddev / static_cast<double>(sa.count);
  const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.count);
  const double se = std::sqrt(va + vb);
  if (se == 0.0) return sa.mean < sb.mean ? 0.0 : 1.0;
  const double t = (sa.mean - sb.mean) / se;
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(sa.count - 1) +
                     vb * vb / static_cast<double>(sb.count - 1));
  const boost::math::students_t dist(df);
  return boost::math::cdf(dist, t);
}

}  // namespace dplabel

#endif  // DPLABEL_METRICS_HPP_
