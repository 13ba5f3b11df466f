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

// Synthetic preference data: a random true parameter on the sphere of the
// centered ball, standard Gaussian action features (optionally clipped to
// norm L) and labels drawn from the chosen preference model.

#ifndef DPLABEL_DATAGEN_HPP_
#define DPLABEL_DATAGEN_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dplabel/core_model.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/privacy.hpp"
#include "dplabel/rng.hpp"

namespace dplabel {

enum class FeatureMode { kGaussianUnbounded, kGaussianClipped };
enum class PreferenceModel { kBtl, kThurstone, kPlackettLuce };

struct GenSpec {
  std::size_t d = 5;
  std::size_t n = 1000;
  double B = 1.0;
  double L = 1.0;  // clip radius in kGaussianClipped mode
  FeatureMode feature_mode = FeatureMode::kGaussianUnbounded;
  PreferenceModel model = PreferenceModel::kBtl;
  int K = 2;  // plackett-luce only
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 2) throw DomainError("GenSpec: d must be >= 2");
    if (n < 1) throw DomainError("GenSpec: n must be >= 1");
    if (!(B > 0.0)) throw DomainError("GenSpec: B must be positive");
    if (!(L > 0.0)) throw DomainError("GenSpec: L must be positive");
    if (model == PreferenceModel::kPlackettLuce && K < 2)
      throw DomainError("GenSpec: K must be >= 2 for plackett-luce");
  }
};

// q-quantile of the norm of a d-dimensional standard Gaussian vector.
inline double gaussian_norm_quantile(std::size_t d, double q) {
  const boost::math::chi_squared dist(static_cast<double>(d));
  return std::sqrt(boost::math::quantile(dist, q));
}

// Reported feature bound: the clip radius in clipped mode, otherwise the
// 99th-percentile action-feature norm. Unbounded features are not enforced
// against it.
inline double default_feature_bound(const GenSpec& spec) {
  if (spec.feature_mode == FeatureMode::kGaussianClipped) return spec.L;
  return gaussian_norm_quantile(spec.d, 0.99);
}

inline RewardParam generate_theta_star(const GenSpec& spec, RngStream& rng) {
  spec.validate();
  for (;;) {
    Vector v(spec.d);
    for (double& c : v) c = rng.normal();
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(spec.d);
    for (double& c : v) c -= mean;
    const double norm = norm2(v);
    if (norm < 1e-12) continue;
    for (double& c : v) c *= spec.B / norm;
    // Remove the rounding residue of the centering step.
    const double residue =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(spec.d);
    for (double& c : v) c -= residue;
    return RewardParam(std::move(v), spec.B);
  }
}

inline Vector draw_action_feature(const GenSpec& spec, RngStream& rng) {
  Vector phi(spec.d);
  for (double& c : phi) c = rng.normal();
  if (spec.feature_mode == FeatureMode::kGaussianClipped) {
    const double norm = norm2(phi);
    if (norm > spec.L)
      for (double& c : phi) c *= spec.L / norm;
  }
  return phi;
}

// Pairwise samples under the BTL or Thurstone model.
inline std::vector<PreferenceSample> generate_dataset(
    const GenSpec& spec, const RewardParam& theta_star, RngStream& rng) {
  spec.validate();
  if (theta_star.dim() != spec.d)
    throw DomainError("generate_dataset: dimension mismatch");
  if (spec.model == PreferenceModel::kPlackettLuce)
    throw DomainError("generate_dataset: use generate_kwise_dataset for plackett-luce");
  const LinkModel link = spec.model == PreferenceModel::kBtl
                             ? LinkModel::kBtl
                             : LinkModel::kThurstone;
  std::vector<PreferenceSample> out;
  out.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Vector phi0 = draw_action_feature(spec, rng);
    const Vector phi1 = draw_action_feature(spec, rng);
    PreferenceSample s{subtract(phi1, phi0), 0};
    const double p = label_prob(link, s.x, theta_star);
    s.y = rng.uniform() < p ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

// K-wise samples with a top-choice label drawn from the softmax of rewards.
inline std::vector<KWiseSample> generate_kwise_dataset(
    const GenSpec& spec, const RewardParam& theta_star, RngStream& rng) {
  spec.validate();
  if (theta_star.dim() != spec.d)
    throw DomainError("generate_kwise_dataset: dimension mismatch");
  if (spec.K < 2) throw DomainError("generate_kwise_dataset: K must be >= 2");
  std::vector<KWiseSample> out;
  out.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    KWiseSample s;
    s.action_features.reserve(static_cast<std::size_t>(spec.K));
    for (int k = 0; k < spec.K; ++k)
      s.action_features.push_back(draw_action_feature(spec, rng));
    const Vector probs = pl_label_probs(s.action_features, theta_star);
    const double u = rng.uniform();
    double cumulative = 0.0;
    s.y = spec.K;
    for (int k = 0; k < spec.K; ++k) {
      cumulative += probs[static_cast<std::size_t>(k)];
      if (u < cumulative) {
        s.y = k + 1;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline RandomizedDataset randomize_labels(std::span<const PreferenceSample> samples,
                                          double epsilon, RngStream& rng) {
  if (!(epsilon >= 0.0)) throw DomainError("randomize_labels: epsilon < 0");
  RandomizedDataset out;
  out.epsilon = epsilon;
  out.samples.assign(samples.begin(), samples.end());
  for (PreferenceSample& s : out.samples)
    s.y = randomized_response(s.y, epsilon, rng);
  return out;
}

inline KWiseRandomizedDataset randomize_labels(std::span<const KWiseSample> samples,
                                               double epsilon, int K,
                                               RngStream& rng) {
  if (!(epsilon >= 0.0)) throw DomainError("randomize_labels: epsilon < 0");
  KWiseRandomizedDataset out;
  out.epsilon = epsilon;
  out.K = K;
  out.samples.assign(samples.begin(), samples.end());
  for (KWiseSample& s : out.samples) {
    if (static_cast<int>(s.K()) != K)
      throw DomainError("randomize_labels: sample has the wrong number of actions");
    s.y = k_randomized_response(s.y, K, epsilon, rng);
  }
  return out;
}

// Pairwise datasets reduced from K = 2 samples: x = phi_2 - phi_1 and
// y = 1 iff the top choice is action 2.
inline std::vector<PreferenceSample> reduce_two_way(std::span<const KWiseSample> samples) {
  std::vector<PreferenceSample> out;
  out.reserve(samples.size());
  for (const KWiseSample& s : samples) {
    if (s.K() != 2) throw DomainError("reduce_two_way: K must be 2");
    out.push_back({subtract(s.action_features[1], s.action_features[0]),
                   s.y == 2 ? 1 : 0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset CSV
//
// Pairwise: header `y,x0,...,x{d-1}`, one sample per row.
// K-wise:   header `y,a1_0,...,a1_{d-1},a2_0,...,aK_{d-1}`, label 1-based.
// Reals are written with 17 significant digits and round-trip exactly.

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError(line, "bad number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "bad number '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ParseError(line, "number out of range '" + s + "'");
  }
}

inline long long parse_integer(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw ParseError(line, "bad integer '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "bad integer '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ParseError(line, "integer out of range '" + s + "'");
  }
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

inline void write_dataset_csv(std::ostream& out,
                              std::span<const PreferenceSample> samples) {
  if (samples.empty()) throw DomainError("write_dataset_csv: empty dataset");
  const std::size_t d = samples.front().x.size();
  out << "y";
  for (std::size_t j = 0; j < d; ++j) out << ",x" << j;
  out << '\n';
  for (const auto& s : samples) {
    if (s.x.size() != d) throw DomainError("write_dataset_csv: ragged dataset");
    out << s.y;
    for (double v : s.x) out << ',' << detail::format_real(v);
    out << '\n';
  }
}

inline std::vector<PreferenceSample> read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  detail::strip_cr(line);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "y")
    throw ParseError(1, "pairwise header must be y,x0,...");
  const std::size_t d = header.size() - 1;
  std::vector<PreferenceSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != d + 1)
      throw ParseError(line_no, "expected " + std::to_string(d + 1) + " fields");
    PreferenceSample s;
    const long long y = detail::parse_integer(fields[0], line_no);
    if (y != 0 && y != 1) throw ParseError(line_no, "label must be 0 or 1");
    s.y = static_cast<int>(y);
    s.x.reserve(d);
    for (std::size_t j = 0; j < d; ++j)
      s.x.push_back(detail::parse_real(fields[j + 1], line_no));
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_kwise_dataset_csv(std::ostream& out,
                                    std::span<const KWiseSample> samples) {
  if (samples.empty()) throw DomainError("write_kwise_dataset_csv: empty dataset");
  const std::size_t K = samples.front().K();
  const std::size_t d = samples.front().action_features.front().size();
  out << "y";
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < d; ++j) out << ",a" << (k + 1) << '_' << j;
  out << '\n';
  for (const auto& s : samples) {
    if (s.K() != K) throw DomainError("write_kwise_dataset_csv: ragged dataset");
    out << s.y;
    for (const Vector& phi : s.action_features) {
      if (phi.size() != d) throw DomainError("write_kwise_dataset_csv: ragged dataset");
      for (double v : phi) out << ',' << detail::format_real(v);
    }
    out << '\n';
  }
}

inline std::vector<KWiseSample> read_kwise_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  detail::strip_cr(line);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "y")
    throw ParseError(1, "k-wise header must be y,a1_0,...");
  // Count actions from the a<k>_0 columns.
  std::size_t K = 0;
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c].size() > 2 && header[c].ends_with("_0")) ++K;
  if (K < 2 || (header.size() - 1) % K != 0)
    throw ParseError(1, "k-wise header is inconsistent");
  const std::size_t d = (header.size() - 1) / K;
  std::vector<KWiseSample> out;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != K * d + 1)
      throw ParseError(line_no, "expected " + std::to_string(K * d + 1) + " fields");
    KWiseSample s;
    const long long y = detail::parse_integer(fields[0], line_no);
    if (y < 1 || y > static_cast<long long>(K))
      throw ParseError(line_no, "label out of range");
    s.y = static_cast<int>(y);
    for (std::size_t k = 0; k < K; ++k) {
      Vector phi(d);
      for (std::size_t j = 0; j < d; ++j)
        phi[j] = detail::parse_real(fields[1 + k * d + j], line_no);
      s.action_features.push_back(std::move(phi));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dplabel

#endif  // DPLABEL_DATAGEN_HPP_
