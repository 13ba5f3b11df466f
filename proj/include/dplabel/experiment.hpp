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

// Configuration-driven error sweeps.
//
// Config file: one `key = value` per line, `#` starts a comment, lists are
// comma-separated. Results CSV header:
//
//   estimator,n,epsilon,repetition,seed,l2_error,seminorm_error
//
// Every record carries the seed that reproduces its repetition:
//
//   h = splitmix64(base_seed)
//   h = mix(h, fnv1a64(estimator tag))
//   h = mix(h, n)
//   h = mix(h, bit pattern of epsilon)
//   seed = mix(h, repetition)        with mix(h, v) = splitmix64(h ^ splitmix64(v))
//
// and the repetition draws theta*, the data, the label randomization and the
// objective noise from RngStream(seed, k) for the fixed stream indices k in
// rng.hpp.

#ifndef DPLABEL_EXPERIMENT_HPP_
#define DPLABEL_EXPERIMENT_HPP_

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "dplabel/core_model.hpp"
#include "dplabel/datagen.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/estimators.hpp"
#include "dplabel/metrics.hpp"
#include "dplabel/privacy.hpp"
#include "dplabel/rng.hpp"

namespace dplabel {

inline constexpr std::string_view kResultsCsvHeader =
    "estimator,n,epsilon,repetition,seed,l2_error,seminorm_error";

enum class EstimatorKind { kMle, kMleRr, kDebiasedRr, kSgdRr, kSgdKrr, kObjPert };

inline std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kMle:
      return "mle";
    case EstimatorKind::kMleRr:
      return "mle-rr";
    case EstimatorKind::kDebiasedRr:
      return "debiased-rr";
    case EstimatorKind::kSgdRr:
      return "sgd-rr";
    case EstimatorKind::kSgdKrr:
      return "sgd-krr";
    case EstimatorKind::kObjPert:
      return "obj-pert";
  }
  return "unknown";
}

inline std::optional<EstimatorKind> parse_estimator(std::string_view tag) {
  for (auto kind : {EstimatorKind::kMle, EstimatorKind::kMleRr,
                    EstimatorKind::kDebiasedRr, EstimatorKind::kSgdRr,
                    EstimatorKind::kSgdKrr, EstimatorKind::kObjPert})
    if (to_string(kind) == tag) return kind;
  return std::nullopt;
}

struct ExperimentConfig {
  std::size_t d = 5;
  std::vector<std::size_t> n_values;
  std::vector<double> epsilon_values;
  double delta = 0.001;
  std::vector<EstimatorKind> estimators;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  PreferenceModel model = PreferenceModel::kBtl;
  int K = 4;  // sgd-krr action count
  StepSchedule step_schedule = StepSchedule::kInverseT;
  std::string output_path;

  double B = 1.0;
  // Feature bound. Required in gaussian-clipped mode (clip radius); in
  // unbounded mode it defaults to the 99th-percentile feature norm.
  std::optional<double> L;
  FeatureMode feature_mode = FeatureMode::kGaussianUnbounded;
  double eta = 0.1;  // paper-eta step size
  std::optional<double> gamma_override;
  std::optional<double> kappa_override;
  std::size_t max_iterations = 100000;
  double tolerance = 1e-8;
  PrivacyMode central_mode = PrivacyMode::kCentralLabel;
  std::optional<double> beta;
  std::optional<double> seminorm_lambda;
  double seminorm_alpha = 0.1;
  std::size_t workers = 1;

  bool has(EstimatorKind kind) const {
    return std::find(estimators.begin(), estimators.end(), kind) != estimators.end();
  }

  double feature_bound() const {
    if (L) return *L;
    GenSpec spec;
    spec.d = d;
    spec.feature_mode = feature_mode;
    return default_feature_bound(spec);
  }

  OptimizerConfig optimizer() const {
    OptimizerConfig cfg;
    cfg.max_iterations = max_iterations;
    cfg.schedule = step_schedule;
    cfg.step_size = eta;
    cfg.gradient_tolerance = tolerance;
    cfg.gamma_override = gamma_override;
    cfg.kappa_override = kappa_override;
    return cfg;
  }

  // Throws ConfigError naming the offending key.
  void validate() const {
    if (d < 2) throw ConfigError("d", "d must be >= 2");
    if (n_values.empty()) throw ConfigError("n_values", "n_values must be nonempty");
    for (auto n : n_values)
      if (n < 1) throw ConfigError("n_values", "every n must be >= 1");
    if (epsilon_values.empty())
      throw ConfigError("epsilon_values", "epsilon_values must be nonempty");
    for (double e : epsilon_values)
      if (!(e >= 0.0) || !std::isfinite(e))
        throw ConfigError("epsilon_values", "every epsilon must be finite and >= 0");
    if (estimators.empty())
      throw ConfigError("estimators", "estimators must be nonempty");
    if (repetitions < 1) throw ConfigError("repetitions", "repetitions must be >= 1");
    if (!(B > 0.0)) throw ConfigError("B", "B must be positive");
    if (L && !(*L > 0.0)) throw ConfigError("L", "L must be positive");
    if (feature_mode == FeatureMode::kGaussianClipped && !L)
      throw ConfigError("L", "gaussian-clipped mode needs an explicit L");
    if (!(eta > 0.0)) throw ConfigError("eta", "eta must be positive");
    if (gamma_override && !(*gamma_override > 0.0))
      throw ConfigError("gamma_override", "gamma_override must be positive");
    if (kappa_override && !(*kappa_override > 0.0))
      throw ConfigError("kappa_override", "kappa_override must be positive");
    if (max_iterations < 1)
      throw ConfigError("max_iterations", "max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance", "tolerance must be positive");
    if (workers < 1) throw ConfigError("workers", "workers must be >= 1");
    if (K < 2) throw ConfigError("K", "K must be >= 2");
    if (beta && !(*beta >= 0.0)) throw ConfigError("beta", "beta must be >= 0");
    if (seminorm_lambda && !(*seminorm_lambda >= 0.0))
      throw ConfigError("seminorm_lambda", "seminorm_lambda must be >= 0");
    if (!(seminorm_alpha > 0.0 && seminorm_alpha < 1.0))
      throw ConfigError("seminorm_alpha", "seminorm_alpha must lie in (0, 1)");

    const bool pairwise = std::any_of(estimators.begin(), estimators.end(),
                                      [](EstimatorKind k) { return k != EstimatorKind::kSgdKrr; });
    if (pairwise && model == PreferenceModel::kPlackettLuce)
      throw ConfigError("model", "plackett-luce data only supports sgd-krr");
    if (model == PreferenceModel::kThurstone) {
      for (auto k : estimators)
        if (k != EstimatorKind::kSgdRr && k != EstimatorKind::kSgdKrr)
          throw ConfigError("model", "thurstone data only supports sgd-rr");
      if (step_schedule != StepSchedule::kFixed && !gamma_override)
        throw ConfigError("gamma_override",
                          "thurstone sgd-rr needs gamma_override unless step_schedule = paper-eta");
    }
    for (double e : epsilon_values) {
      if (e > 0.0) continue;
      if (has(EstimatorKind::kDebiasedRr))
        throw ConfigError("epsilon_values", "debiased-rr needs epsilon > 0");
      if (has(EstimatorKind::kObjPert))
        throw ConfigError("epsilon_values", "obj-pert needs epsilon > 0");
      if ((has(EstimatorKind::kSgdRr) || has(EstimatorKind::kSgdKrr)) &&
          step_schedule != StepSchedule::kFixed)
        throw ConfigError("epsilon_values",
                          "epsilon = 0 gives sgd an infinite step; use step_schedule = paper-eta");
    }
    if (has(EstimatorKind::kObjPert) && !(delta > 0.0 && delta < 1.0))
      throw ConfigError("delta", "obj-pert needs delta in (0, 1)");
  }
};

// ---------------------------------------------------------------------------
// Config text

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

inline double config_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "key '" + key + "': expected a number, got '" + value + "'");
}

inline std::uint64_t config_unsigned(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] != '-') {
      const unsigned long long v = std::stoull(value, &used, 0);
      if (used == value.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "key '" + key + "': expected a nonnegative integer, got '" +
                             value + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty())
      throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError(key, "key '" + key + "' given twice");

    if (key == "d") {
      cfg.d = detail::config_unsigned(key, value);
    } else if (key == "n_values") {
      cfg.n_values.clear();
      for (const auto& item : detail::split_list(value))
        cfg.n_values.push_back(detail::config_unsigned(key, item));
    } else if (key == "epsilon_values") {
      cfg.epsilon_values.clear();
      for (const auto& item : detail::split_list(value))
        cfg.epsilon_values.push_back(detail::config_real(key, item));
    } else if (key == "delta") {
      cfg.delta = detail::config_real(key, value);
    } else if (key == "estimators") {
      cfg.estimators.clear();
      for (const auto& item : detail::split_list(value)) {
        const auto kind = parse_estimator(item);
        if (!kind) throw ConfigError(key, "key 'estimators': unknown estimator '" + item + "'");
        cfg.estimators.push_back(*kind);
      }
    } else if (key == "repetitions") {
      cfg.repetitions = detail::config_unsigned(key, value);
    } else if (key == "base_seed") {
      cfg.base_seed = detail::config_unsigned(key, value);
    } else if (key == "model") {
      if (value == "btl") cfg.model = PreferenceModel::kBtl;
      else if (value == "thurstone") cfg.model = PreferenceModel::kThurstone;
      else if (value == "plackett-luce") cfg.model = PreferenceModel::kPlackettLuce;
      else throw ConfigError(key, "key 'model': unknown model '" + value + "'");
    } else if (key == "K") {
      cfg.K = static_cast<int>(detail::config_unsigned(key, value));
    } else if (key == "step_schedule") {
      if (value == "inverse-t") cfg.step_schedule = StepSchedule::kInverseT;
      else if (value == "constant") cfg.step_schedule = StepSchedule::kConstant;
      else if (value == "paper-eta") cfg.step_schedule = StepSchedule::kFixed;
      else throw ConfigError(key, "key 'step_schedule': unknown schedule '" + value + "'");
    } else if (key == "output_path") {
      cfg.output_path = value;
    } else if (key == "B") {
      cfg.B = detail::config_real(key, value);
    } else if (key == "L") {
      cfg.L = detail::config_real(key, value);
    } else if (key == "feature_mode") {
      if (value == "gaussian-unbounded") cfg.feature_mode = FeatureMode::kGaussianUnbounded;
      else if (value == "gaussian-clipped") cfg.feature_mode = FeatureMode::kGaussianClipped;
      else throw ConfigError(key, "key 'feature_mode': unknown mode '" + value + "'");
    } else if (key == "eta") {
      cfg.eta = detail::config_real(key, value);
    } else if (key == "gamma_override") {
      cfg.gamma_override = detail::config_real(key, value);
    } else if (key == "kappa_override") {
      cfg.kappa_override = detail::config_real(key, value);
    } else if (key == "max_iterations") {
      cfg.max_iterations = detail::config_unsigned(key, value);
    } else if (key == "tolerance") {
      cfg.tolerance = detail::config_real(key, value);
    } else if (key == "central_mode") {
      if (value == "central-label") cfg.central_mode = PrivacyMode::kCentralLabel;
      else if (value == "central-standard") cfg.central_mode = PrivacyMode::kCentralStandard;
      else throw ConfigError(key, "key 'central_mode': unknown mode '" + value + "'");
    } else if (key == "beta") {
      cfg.beta = detail::config_real(key, value);
    } else if (key == "seminorm_lambda") {
      cfg.seminorm_lambda = detail::config_real(key, value);
    } else if (key == "seminorm_alpha") {
      cfg.seminorm_alpha = detail::config_real(key, value);
    } else if (key == "workers") {
      cfg.workers = detail::config_unsigned(key, value);
    } else {
      throw ConfigError(key, "unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------------------
// Results CSV

inline void write_results_csv(std::ostream& out, std::span<const ErrorRecord> records) {
  out << kResultsCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.estimator << ',' << r.n << ',' << detail::format_real(r.epsilon) << ','
        << r.repetition << ',' << r.seed << ',' << detail::format_real(r.l2_error) << ','
        << detail::format_real(r.seminorm_error) << '\n';
  }
}

inline std::vector<ErrorRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  detail::strip_cr(line);
  if (line != kResultsCsvHeader)
    throw ParseError(1, "header must be '" + std::string(kResultsCsvHeader) + "'");
  std::vector<ErrorRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw ParseError(line_no, "expected 7 fields");
    ErrorRecord r;
    r.estimator = f[0];
    if (!parse_estimator(r.estimator))
      throw ParseError(line_no, "unknown estimator '" + r.estimator + "'");
    const long long n = detail::parse_integer(f[1], line_no);
    const long long rep = detail::parse_integer(f[3], line_no);
    if (n < 1 || rep < 0) throw ParseError(line_no, "n and repetition must be nonnegative");
    r.n = static_cast<std::size_t>(n);
    r.epsilon = detail::parse_real(f[2], line_no);
    r.repetition = static_cast<std::size_t>(rep);
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[4], &used);
      if (used != f[4].size() || f[4].starts_with('-')) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad seed '" + f[4] + "'");
    }
    r.l2_error = detail::parse_real(f[5], line_no);
    r.seminorm_error = detail::parse_real(f[6], line_no);
    if (!(r.l2_error >= 0.0) || !(r.seminorm_error >= 0.0))
      throw ParseError(line_no, "errors must be nonnegative");
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t record_seed(std::uint64_t base_seed, EstimatorKind kind,
                                 std::size_t n, double epsilon,
                                 std::size_t repetition) {
  std::uint64_t h = splitmix64(base_seed);
  h = mix_seed(h, fnv1a64(to_string(kind)));
  h = mix_seed(h, n);
  h = mix_seed(h, std::bit_cast<std::uint64_t>(epsilon));
  return mix_seed(h, repetition);
}

// Everything one repetition produced; the sweep keeps only the errors.
struct RepetitionOutcome {
  RewardParam theta_star;
  EstimatorResult fit;
  ErrorRecord record;
};

// Runs a single (estimator, n, epsilon) repetition from its record seed.
inline RepetitionOutcome run_repetition(const ExperimentConfig& cfg, EstimatorKind kind,
                                        std::size_t n, double epsilon,
                                        std::size_t repetition, std::uint64_t seed) {
  const double L = cfg.feature_bound();
  const ParamSpace space(cfg.d, cfg.B, L);
  const OptimizerConfig opt = cfg.optimizer();

  GenSpec spec;
  spec.d = cfg.d;
  spec.n = n;
  spec.B = cfg.B;
  spec.L = L;
  spec.feature_mode = cfg.feature_mode;
  spec.model = cfg.model;
  spec.K = cfg.K;
  spec.seed = seed;

  RngStream theta_rng(seed, kThetaStream);
  RngStream data_rng(seed, kDataStream);
  RngStream randomizer_rng(seed, kRandomizerStream);

  RepetitionOutcome out;
  out.theta_star = generate_theta_star(spec, theta_rng);
  CovarianceMatrix sigma_d;

  if (kind == EstimatorKind::kSgdKrr) {
    spec.model = PreferenceModel::kPlackettLuce;
    const auto clear = generate_kwise_dataset(spec, out.theta_star, data_rng);
    const auto data = randomize_labels(clear, epsilon, cfg.K, randomizer_rng);
    out.fit = sgd_krr(data, space, opt);
    // Semi-norm over the pooled pairwise action differences.
    std::vector<Vector> rows;
    for (const auto& s : clear)
      for (std::size_t i = 0; i < s.K(); ++i)
        for (std::size_t j = i + 1; j < s.K(); ++j)
          rows.push_back(subtract(s.action_features[j], s.action_features[i]));
    sigma_d = covariance_of_rows(rows);
  } else {
    const auto clear = generate_dataset(spec, out.theta_star, data_rng);
    sigma_d = empirical_covariance(clear);
    const LinkModel link = cfg.model == PreferenceModel::kThurstone ? LinkModel::kThurstone
                                                                    : LinkModel::kBtl;
    switch (kind) {
      case EstimatorKind::kMle:
        out.fit = fit_mle_clear(clear, space, opt);
        break;
      case EstimatorKind::kMleRr:
        out.fit = fit_mle_rr(randomize_labels(clear, epsilon, randomizer_rng), space, opt);
        break;
      case EstimatorKind::kDebiasedRr:
        out.fit = fit_debiased_rr(randomize_labels(clear, epsilon, randomizer_rng), space, opt);
        break;
      case EstimatorKind::kSgdRr:
        out.fit = sgd_rr(randomize_labels(clear, epsilon, randomizer_rng), space, opt, link);
        break;
      case EstimatorKind::kObjPert: {
        RngStream noise_rng(seed, kObjectiveNoiseStream);
        const PrivacyBudget budget(epsilon, cfg.delta, cfg.central_mode);
        out.fit = fit_objective_perturbation(clear, space, budget, cfg.beta, noise_rng, opt);
        break;
      }
      case EstimatorKind::kSgdKrr:
        break;
    }
  }

  const double lambda =
      cfg.seminorm_lambda
          ? *cfg.seminorm_lambda
          : default_seminorm_lambda(epsilon, cfg.d, n, cfg.B, gamma_constant(L, cfg.B),
                                    cfg.seminorm_alpha);
  out.record.estimator = std::string(to_string(kind));
  out.record.n = n;
  out.record.epsilon = epsilon;
  out.record.repetition = repetition;
  out.record.seed = seed;
  out.record.l2_error = l2_error(out.fit.theta_hat, out.theta_star);
  out.record.seminorm_error =
      seminorm_error(out.fit.theta_hat, out.theta_star, sigma_d, lambda);
  return out;
}

// All (estimator, n, epsilon, repetition) cells of the sweep, sorted by
// (estimator tag, n, epsilon, repetition). The result does not depend on
// `workers`.
inline std::vector<ErrorRecord> run_sweep_records(const ExperimentConfig& cfg,
                                                  std::size_t workers) {
  cfg.validate();
  struct Task {
    EstimatorKind kind;
    std::size_t n;
    double epsilon;
    std::size_t repetition;
  };
  std::vector<Task> tasks;
  for (auto kind : cfg.estimators)
    for (auto n : cfg.n_values)
      for (double eps : cfg.epsilon_values)
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep)
          tasks.push_back({kind, n, eps, rep});

  std::vector<ErrorRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& t = tasks[i];
        const auto seed = record_seed(cfg.base_seed, t.kind, t.n, t.epsilon, t.repetition);
        records[i] = run_repetition(cfg, t.kind, t.n, t.epsilon, t.repetition, seed).record;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
        return;
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, tasks.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(records.begin(), records.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
    return std::tie(a.estimator, a.n, a.epsilon, a.repetition) <
           std::tie(b.estimator, b.n, b.epsilon, b.repetition);
  });
  return records;
}

// Runs the sweep and writes the CSV to cfg.output_path (when set).
inline std::vector<ErrorRecord> run_sweep(const ExperimentConfig& cfg) {
  auto records = run_sweep_records(cfg, cfg.workers);
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + cfg.output_path + "'");
    write_results_csv(out, records);
    if (!out) throw IoError("failed writing '" + cfg.output_path + "'");
  }
  return records;
}

// Mean l2 error per (estimator, epsilon, n).
using CurveKey = std::tuple<std::string, double, std::size_t>;

inline std::map<CurveKey, std::vector<double>> group_l2_errors(
    std::span<const ErrorRecord> records) {
  std::map<CurveKey, std::vector<double>> groups;
  for (const auto& r : records)
    groups[{r.estimator, r.epsilon, r.n}].push_back(r.l2_error);
  return groups;
}

}  // namespace dplabel

#endif  // DPLABEL_EXPERIMENT_HPP_
