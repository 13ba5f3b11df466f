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

#include <cmath>

#include "dplabel/checks.hpp"

namespace dplabel {
namespace {

TEST(CheckPrivacy, HonestMechanismPasses) {
  for (double e : {0.0, 0.5, 1.0, 2.0, 50.0}) {
    RngStream rng(1, kRandomizerStream);
    const auto r = check_privacy(e, 100000, rng);
    EXPECT_TRUE(r.pass) << e << " z=" << r.z_score << " p=" << r.krr_p_value;
    EXPECT_LE(std::abs(r.z_score), 4.0);
    if (e == 1.0) EXPECT_NEAR(r.keep_rate, std::exp(1.0) / (1 + std::exp(1.0)), 0.005);
    if (e == 0.0) EXPECT_NEAR(r.keep_rate, 0.5, 0.005);
  }
}

TEST(CheckPrivacy, AlwaysKeepingStubFails) {
  RngStream rng(2, kRandomizerStream);
  const BinaryRandomizer keep_all = [](int y, double, RngStream&) { return y; };
  const auto r = check_privacy(1.0, 100000, rng, keep_all);
  EXPECT_FALSE(r.rr_pass);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.keep_rate, 1.0);
}

TEST(CheckPrivacy, BiasedKaryStubFails) {
  RngStream rng(3, kRandomizerStream);
  // Never reports the label just above the true one.
  const KaryRandomizer skewed = [](int y, int K, double e, RngStream& g) {
    int out = k_randomized_response(y, K, e, g);
    if (out == y % K + 1) out = y;
    return out;
  };
  const auto r = check_privacy(1.0, 100000, rng, randomized_response, skewed);
  EXPECT_TRUE(r.rr_pass);
  EXPECT_FALSE(r.krr_pass);
  EXPECT_FALSE(r.pass);
}

TEST(CheckPrivacy, RejectsTooFewTrials) {
  RngStream rng(4, 0);
  EXPECT_THROW(check_privacy(1.0, 9999, rng), DomainError);
}

TEST(Gradcheck, DefaultRunPasses) {
  const auto r = gradcheck(0, 100);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_fd_error(), 1e-5);
  EXPECT_LT(r.max_identity_error(), 1e-10);
  EXPECT_EQ(r.cases, 100u);
}

TEST(Gradcheck, SignFlipIsCaught) {
  GradcheckTargets flipped;
  flipped.nll_rr = [](std::span<const PreferenceSample> s, ConstVectorView t, double e) {
    auto v = nll_rr(s, t, e);
    for (double& g : v.gradient) g = -g;
    return v;
  };
  EXPECT_FALSE(gradcheck(0, 5, flipped).pass);

  GradcheckTargets flipped_sgd;
  flipped_sgd.sgd_rr = [](ConstVectorView x, int y, ConstVectorView t, double e) {
    return scaled(sgd_rr_gradient(x, y, t, e), -1.0);
  };
  const auto r = gradcheck(0, 5, flipped_sgd);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_identity_error_rr, 1e-3);
  EXPECT_LT(r.max_identity_error_krr, 1e-10);

  GradcheckTargets flipped_krr;
  flipped_krr.sgd_krr = [](std::span<const Vector> f, int y, ConstVectorView t, double e, int K) {
    return scaled(sgd_krr_gradient(f, y, t, e, K), -1.0);
  };
  EXPECT_FALSE(gradcheck(0, 5, flipped_krr).pass);
}

TEST(Gradcheck, SingleCaseIsDeterministic) {
  const auto a = gradcheck(17, 1), b = gradcheck(17, 1);
  EXPECT_EQ(a.max_fd_error_nll_clear, b.max_fd_error_nll_clear);
  EXPECT_EQ(a.max_fd_error_nll_rr, b.max_fd_error_nll_rr);
  EXPECT_EQ(a.max_fd_error_debiased, b.max_fd_error_debiased);
  EXPECT_EQ(a.max_identity_error_rr, b.max_identity_error_rr);
  EXPECT_EQ(a.max_identity_error_krr, b.max_identity_error_krr);
  EXPECT_THROW(gradcheck(1, 0), DomainError);
}

}  // namespace
}  // namespace dplabel
