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


// Fits every pairwise estimator on one synthetic dataset and prints its
// l2 error.

#include <cstdio>

#include "dplabel.hpp"

int main() {
  using namespace dplabel;

  GenSpec spec;
  spec.d = 5;
  spec.n = 5000;
  spec.feature_mode = FeatureMode::kGaussianClipped;
  spec.L = 1.0;
  spec.seed = 1;

  RngStream theta_rng(spec.seed, kThetaStream);
  RngStream data_rng(spec.seed, kDataStream);
  RngStream label_rng(spec.seed, kRandomizerStream);
  RngStream noise_rng(spec.seed, kObjectiveNoiseStream);

  const RewardParam theta_star = generate_theta_star(spec, theta_rng);
  const auto clear = generate_dataset(spec, theta_star, data_rng);

  const double epsilon = 1.0;
  const RandomizedDataset private_labels = randomize_labels(clear, epsilon, label_rng);
  const ParamSpace space(spec.d, spec.B, spec.L);
  const OptimizerConfig cfg;

  const auto print = [&](const char* name, const EstimatorResult& r) {
    std::printf("%-12s l2 error %.4f  iterations %zu\n", name,
                l2_error(r.theta_hat, theta_star), r.iterations_used);
  };
  print("mle", fit_mle_clear(clear, space, cfg));
  print("mle-rr", fit_mle_rr(private_labels, space, cfg));
  print("debiased-rr", fit_debiased_rr(private_labels, space, cfg));
  print("sgd-rr", sgd_rr(private_labels, space, cfg));
  print("obj-pert",
        fit_objective_perturbation(clear, space,
                                   PrivacyBudget(epsilon, 1e-3, PrivacyMode::kCentralLabel),
                                   std::nullopt, noise_rng, cfg));
  return 0;
}
