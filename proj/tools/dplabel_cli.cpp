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

// Command-line front end. Exit codes: 0 success or PASS, 1 FAIL, 2 usage,
// configuration or input error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dplabel/checks.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/experiment.hpp"
#include "dplabel/plot.hpp"
#include "dplabel/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int run_command(const std::string& config_path, std::size_t workers_override) {
  auto cfg = dplabel::load_config(config_path);
  if (workers_override > 0) cfg.workers = workers_override;
  const auto records = dplabel::run_sweep(cfg);
  if (cfg.output_path.empty()) {
    dplabel::write_results_csv(std::cout, records);
  } else {
    std::cerr << "wrote " << records.size() << " records to " << cfg.output_path << '\n';
  }
  return kExitOk;
}

int check_privacy_command(double epsilon, std::size_t trials, std::uint64_t seed) {
  dplabel::RngStream rng(seed, dplabel::kRandomizerStream);
  const auto r = dplabel::check_privacy(epsilon, trials, rng);
  std::printf("epsilon        %g\n", r.epsilon);
  std::printf("trials         %zu\n", r.trials);
  std::printf("rr keep rate   %.6f (expected %.6f)\n", r.keep_rate, r.expected_keep_rate);
  std::printf("rr z-score     %.3f  %s\n", r.z_score, r.rr_pass ? "PASS" : "FAIL");
  std::printf("krr K          %d\n", r.krr_K);
  std::printf("krr chi-square %.3f (p = %.4g)  %s\n", r.krr_chi_square, r.krr_p_value,
              r.krr_pass ? "PASS" : "FAIL");
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
  return r.pass ? kExitOk : kExitFail;
}

int gradcheck_command(std::size_t cases, std::uint64_t seed) {
  const auto r = dplabel::gradcheck(seed, cases);
  std::printf("cases                      %zu\n", r.cases);
  std::printf("seed                       %llu\n", static_cast<unsigned long long>(r.seed));
  std::printf("fd error nll_clear         %.3e\n", r.max_fd_error_nll_clear);
  std::printf("fd error nll_rr            %.3e\n", r.max_fd_error_nll_rr);
  std::printf("fd error debiased_rr_loss  %.3e\n", r.max_fd_error_debiased);
  std::printf("identity error sgd-rr      %.3e\n", r.max_identity_error_rr);
  std::printf("identity error sgd-krr     %.3e\n", r.max_identity_error_krr);
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
  return r.pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dplabel: reward estimation from preference data under label privacy"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t workers = 0;
  auto* run = app.add_subcommand("run", "Run an error sweep from a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--workers", workers, "Override the config's worker count");

  std::string csv_path, svg_path;
  auto* plot = app.add_subcommand("plot", "Render a results CSV as SVG");
  plot->add_option("csv", csv_path, "Results CSV")->required();
  plot->add_option("out", svg_path, "Output SVG")->required();

  double epsilon = 1.0;
  std::size_t trials = 100000;
  std::uint64_t privacy_seed = 0;
  auto* privacy = app.add_subcommand("check-privacy", "Test randomizer output frequencies");
  privacy->add_option("--eps", epsilon, "Privacy parameter")->required();
  privacy->add_option("--trials", trials, "Number of trials (>= 10000)")->required();
  privacy->add_option("--seed", privacy_seed, "RNG seed");

  std::size_t cases = 100;
  std::uint64_t grad_seed = 0;
  auto* grad = app.add_subcommand("gradcheck", "Check loss and SGD gradients");
  grad->add_option("--cases", cases, "Number of random instances");
  grad->add_option("--seed", grad_seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return run_command(config_path, workers);
    if (*plot) {
      dplabel::emit_svg(csv_path, svg_path);
      return kExitOk;
    }
    if (*privacy) return check_privacy_command(epsilon, trials, privacy_seed);
    if (*grad) return gradcheck_command(cases, grad_seed);
  } catch (const dplabel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dplabel::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
