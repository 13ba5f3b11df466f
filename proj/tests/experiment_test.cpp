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


#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "dplabel/experiment.hpp"
#include "dplabel/plot.hpp"

namespace dplabel {
namespace {

namespace fs = std::filesystem;

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv_of(const std::vector<ErrorRecord>& records) {
  std::ostringstream out;
  write_results_csv(out, records);
  return out.str();
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("dplabel_" + std::to_string(::getpid()) + "_" + name);
}

const char* kSmallConfig = R"(# small sweep
d = 3
n_values = 200, 400
epsilon_values = 0.5, 1
estimators = mle, sgd-rr, obj-pert   # three estimators
repetitions = 2
base_seed = 99
feature_mode = gaussian-clipped
L = 1
)";

TEST(Config, ParsesKeysListsAndComments) {
  const auto cfg = parse(kSmallConfig);
  EXPECT_EQ(cfg.d, 3u);
  EXPECT_EQ(cfg.n_values, (std::vector<std::size_t>{200, 400}));
  EXPECT_EQ(cfg.epsilon_values, (std::vector<double>{0.5, 1.0}));
  ASSERT_EQ(cfg.estimators.size(), 3u);
  EXPECT_EQ(cfg.estimators[2], EstimatorKind::kObjPert);
  EXPECT_EQ(cfg.repetitions, 2u);
  EXPECT_EQ(cfg.base_seed, 99u);
  EXPECT_EQ(cfg.feature_mode, FeatureMode::kGaussianClipped);
  EXPECT_EQ(*cfg.L, 1.0);
  EXPECT_EQ(cfg.delta, 0.001);
  EXPECT_EQ(cfg.step_schedule, StepSchedule::kInverseT);
}

TEST(Config, AllOptionalKeys) {
  const auto cfg = parse(
      "n_values = 10\nepsilon_values = 1\nestimators = sgd-krr\nmodel = plackett-luce\nK = 3\n"
      "step_schedule = paper-eta\neta = 0.05\noutput_path = out.csv\nB = 2\n"
      "gamma_override = 0.1\nkappa_override = 0.2\nmax_iterations = 50\ntolerance = 1e-6\n"
      "central_mode = central-standard\nbeta = 3\nseminorm_lambda = 0.5\nseminorm_alpha = 0.05\n"
      "workers = 2\ndelta = 0.01\n");
  EXPECT_EQ(cfg.model, PreferenceModel::kPlackettLuce);
  EXPECT_EQ(cfg.K, 3);
  EXPECT_EQ(cfg.step_schedule, StepSchedule::kFixed);
  EXPECT_EQ(cfg.output_path, "out.csv");
  EXPECT_EQ(cfg.central_mode, PrivacyMode::kCentralStandard);
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_EQ(cfg.optimizer().max_iterations, 50u);
  EXPECT_EQ(*cfg.optimizer().gamma_override, 0.1);
}

void expect_config_error(const std::string& text, const std::string& key) {
  try {
    parse(text);
    FAIL() << "no error for: " << text;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), key) << e.what();
  }
}

TEST(Config, ErrorsNameTheKey) {
  const std::string ok = "n_values = 10\nepsilon_values = 1\nestimators = mle\n";
  expect_config_error(ok + "colour = blue\n", "colour");
  expect_config_error(ok + "repetitions = 0\n", "repetitions");
  expect_config_error(ok + "d = five\n", "d");
  expect_config_error(ok + "d = 1\n", "d");
  expect_config_error("epsilon_values = 1\nestimators = mle\n", "n_values");
  expect_config_error("n_values = 10\nestimators = mle\n", "epsilon_values");
  expect_config_error("n_values = 10\nepsilon_values = 1\n", "estimators");
  expect_config_error(ok.substr(0, ok.size() - 4) + "magic\n", "estimators");
  expect_config_error("n_values = 10\nepsilon_values = 1\nestimators = obj-pert\ndelta = 1\n",
                      "delta");
  expect_config_error("n_values = 10\nepsilon_values = 0\nestimators = sgd-rr\n",
                      "epsilon_values");
  expect_config_error("n_values = 10\nepsilon_values = 1\nestimators = mle\nmodel = thurstone\n",
                      "model");
  expect_config_error(
      "n_values = 10\nepsilon_values = 1\nestimators = sgd-rr\nmodel = thurstone\n",
      "gamma_override");
  expect_config_error(ok + "feature_mode = gaussian-clipped\n", "L");
  expect_config_error(ok + "d = 3\nd = 4\n", "d");
}

TEST(ResultsCsv, RoundTrip) {
  std::vector<ErrorRecord> recs{
      {"mle", 1000, 0.1, 0, 18446744073709551615ULL, 0.1234567890123456789, 1.0 / 3},
      {"sgd-rr", 10, 1.0, 7, 0, 2e-300, 12345.678901234567}};
  const std::string text = csv_of(recs);
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsCsvHeader);
  std::istringstream in(text);
  EXPECT_EQ(read_results_csv(in), recs);
}

TEST(ResultsCsv, MalformedRowsReportLine) {
  const std::string header = std::string(kResultsCsvHeader) + "\n";
  for (const auto& [body, line] : std::vector<std::pair<std::string, std::size_t>>{
           {"mle,10,1,0,5,0.1,0.2\nmle,10,1,0,5,0.1\n", 3},
           {"mle,10,abc,0,5,0.1,0.2\n", 2},
           {"nope,10,1,0,5,0.1,0.2\n", 2},
           {"mle,10,1,0,-5,0.1,0.2\n", 2}}) {
    std::istringstream in(header + body);
    try {
      read_results_csv(in);
      FAIL() << body;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << body;
    }
  }
  std::istringstream wrong("a,b,c\n");
  EXPECT_THROW(read_results_csv(wrong), ParseError);
}

TEST(Sweep, SingleCellGivesOneRow) {
  auto cfg = parse("n_values = 300\nepsilon_values = 1\nestimators = debiased-rr\n");
  const auto out = temp_path("single.csv");
  cfg.output_path = out.string();
  const auto recs = run_sweep(cfg);
  ASSERT_EQ(recs.size(), 1u);
  std::ifstream in(out);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 2);
  fs::remove(out);
}

TEST(Sweep, SortedDeterministicAndWorkerInvariant) {
  const auto cfg = parse(kSmallConfig);
  const auto a = run_sweep_records(cfg, 1);
  ASSERT_EQ(a.size(), 3u * 2 * 2 * 2);
  for (std::size_t i = 1; i < a.size(); ++i)
    EXPECT_LE(std::tie(a[i - 1].estimator, a[i - 1].n, a[i - 1].epsilon, a[i - 1].repetition),
              std::tie(a[i].estimator, a[i].n, a[i].epsilon, a[i].repetition));
  const auto b = run_sweep_records(cfg, 1);
  const auto c = run_sweep_records(cfg, 4);
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_EQ(csv_of(a), csv_of(c));
}

TEST(Sweep, SeedsAreDistinctAndReproduceRepetitions) {
  const auto cfg = parse(kSmallConfig);
  const auto recs = run_sweep_records(cfg, 1);
  std::set<std::uint64_t> seeds;
  for (const auto& r : recs) seeds.insert(r.seed);
  EXPECT_EQ(seeds.size(), recs.size());
  for (const auto& r : recs) {
    const auto kind = *parse_estimator(r.estimator);
    EXPECT_EQ(r.seed, record_seed(cfg.base_seed, kind, r.n, r.epsilon, r.repetition));
    const auto again = run_repetition(cfg, kind, r.n, r.epsilon, r.repetition, r.seed);
    EXPECT_EQ(again.record, r);
    const auto twice = run_repetition(cfg, kind, r.n, r.epsilon, r.repetition, r.seed);
    EXPECT_EQ(again.fit.theta_hat, twice.fit.theta_hat);
  }
}

TEST(Sweep, AllEstimatorsAndModelsRun) {
  auto cfg = parse(
      "d = 4\nn_values = 150\nepsilon_values = 0.5, 3\n"
      "estimators = mle, mle-rr, debiased-rr, sgd-rr, sgd-krr, obj-pert\n");
  const auto recs = run_sweep_records(cfg, 2);
  EXPECT_EQ(recs.size(), 12u);
  for (const auto& r : recs) {
    EXPECT_TRUE(std::isfinite(r.l2_error));
    EXPECT_LE(r.l2_error, 2.0 + 1e-9);
  }
  cfg = parse(
      "d = 3\nn_values = 150\nepsilon_values = 1\nestimators = sgd-rr\nmodel = thurstone\n"
      "gamma_override = 0.2\n");
  EXPECT_EQ(run_sweep_records(cfg, 1).size(), 1u);
}

TEST(Sweep, UnwritableOutputIsIoError) {
  auto cfg = parse("n_values = 50\nepsilon_values = 1\nestimators = mle\n");
  cfg.output_path = "/nonexistent-dir/x/out.csv";
  EXPECT_THROW(run_sweep(cfg), IoError);
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t c = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++c;
  return c;
}

TEST(Svg, PanelsPolylinesAndLegend) {
  const auto recs = run_sweep_records(parse(kSmallConfig), 1);
  const std::string svg = render_svg(recs);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\""), std::string::npos);
  EXPECT_EQ(count(svg, "<g class=\"panel\""), 2u);
  // Each panel holds one polyline per estimator.
  std::size_t start = 0;
  for (int panel = 0; panel < 2; ++panel) {
    const auto p = svg.find("<g class=\"panel\"", start);
    const auto end = svg.find("<g class=\"panel\"", p + 1);
    const std::string body = svg.substr(p, end == std::string::npos ? std::string::npos : end - p);
    EXPECT_EQ(count(body, "<polyline"), 3u);
    EXPECT_EQ(count(body, "class=\"legend\""), 3u);
    EXPECT_EQ(count(body, "class=\"marker\""), 6u);
    start = p + 1;
  }
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, SinglePointSeriesHaveOneMarkerEach) {
  std::vector<ErrorRecord> recs{{"mle", 100, 1.0, 0, 1, 0.2, 0.1},
                                {"sgd-rr", 100, 1.0, 0, 2, 0.5, 0.3}};
  const std::string svg = render_svg(recs);
  EXPECT_EQ(count(svg, "class=\"marker\""), 2u);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
}

TEST(Svg, EmptyOrMalformedInputWritesNothing) {
  const auto csv = temp_path("empty.csv"), svg = temp_path("empty.svg");
  {
    std::ofstream out(csv);
    out << kResultsCsvHeader << '\n';
  }
  EXPECT_THROW(emit_svg(csv.string(), svg.string()), DomainError);
  EXPECT_FALSE(fs::exists(svg));
  {
    std::ofstream out(csv);
    out << kResultsCsvHeader << "\nmle,10,1,0,1,0.5,0.5\nmle,10\n";
  }
  try {
    emit_svg(csv.string(), svg.string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_FALSE(fs::exists(svg));
  fs::remove(csv);
}

TEST(Svg, WritesFileFromCsv) {
  const auto csv = temp_path("ok.csv"), svg = temp_path("ok.svg");
  auto cfg = parse(kSmallConfig);
  cfg.output_path = csv.string();
  run_sweep(cfg);
  emit_svg(csv.string(), svg.string());
  std::ifstream in(svg);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(count(buf.str(), "<polyline"), 6u);
  fs::remove(csv);
  fs::remove(svg);
}

}  // namespace
}  // namespace dplabel
