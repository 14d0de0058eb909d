// Copyright 2026 The PLATE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "plate/dynamics.h"
#include "test_util.h"

namespace plate {
namespace {

using testing::OracleC;
using testing::OracleM;
using testing::OracleWd;
using testing::RelErr;
using testing::TaylorExp;

TEST(DiscretizeTest, DoubleIntegratorClosedForm) {
  const ContinuousModel m = testing::TrackingModel();
  for (double d : {1.0 / 30.0, 0.1, 0.3, 1.0, 2.5}) {
    const Transition tr = Discretize(m, d);
    Matrix ad = Matrix::Identity(4, 4);
    ad(0, 1) = ad(2, 3) = d;
    Matrix wd = Matrix::Zero(4, 4);
    for (int k : {0, 2}) {
      wd(k, k) = 0.5 * d * d * d / 3.0;
      wd(k, k + 1) = wd(k + 1, k) = 0.5 * d * d / 2.0;
      wd(k + 1, k + 1) = 0.5 * d;
    }
    EXPECT_LT((tr.Ad - ad).norm(), 1e-14) << d;
    EXPECT_LT(RelErr(tr.Wd, wd), 1e-12) << d;
  }
}

TEST(DiscretizeTest, ZeroDurationIsIdentity) {
  const ContinuousModel m = testing::TrackingModel();
  const Transition tr = Discretize(m, 0.0);
  EXPECT_EQ(tr.Ad, Matrix::Identity(4, 4));
  EXPECT_EQ(tr.Wd, Matrix::Zero(4, 4));
}

TEST(DiscretizeTest, RejectsNegativeDuration) {
  const ContinuousModel m = testing::TrackingModel();
  try {
    Discretize(m, -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(DiscretizeTest, ScalarStable) {
  // dx = -x dt + dw, W = 2: Ad = e^-d, Wd = 1 - e^-2d.
  const ContinuousModel m = testing::ScalarModel(-1.0, 2.0);
  const Transition tr = Discretize(m, 0.7);
  EXPECT_NEAR(tr.Ad(0, 0), std::exp(-0.7), 1e-15);
  EXPECT_NEAR(tr.Wd(0, 0), 1.0 - std::exp(-1.4), 1e-14);
}

TEST(DiscretizeTest, SemigroupProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ContinuousModel m = testing::RandomModel(rng, 1 + trial % 6);
    const double a = 0.1 + 0.05 * (trial % 4);
    const double b = 0.2;
    const Transition ta = Discretize(m, a);
    const Transition tb = Discretize(m, b);
    const Transition tab = Discretize(m, a + b);
    EXPECT_LT(RelErr(tb.Ad * ta.Ad, tab.Ad), 1e-12);
    EXPECT_LT(RelErr(tb.Ad * ta.Wd * tb.Ad.transpose() + tb.Wd, tab.Wd), 1e-11);
  }
}

TEST(DiscretizeTest, MatchesTaylorAndSimpsonOracles) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const ContinuousModel m = testing::RandomModel(rng, 1 + trial % 6);
    const double d = m.dt_s * (1 + trial % 8);
    const Transition tr = Discretize(m, d);
    EXPECT_LT(RelErr(tr.Ad, TaylorExp(m.A, d)), 1e-12);
    EXPECT_LT(RelErr(tr.Wd, OracleWd(m, d)), 1e-9);
    EXPECT_TRUE(IsPsd(tr.Wd));
  }
}

TEST(CostGramTest, DoubleIntegratorClosedForm) {
  const ContinuousModel m = testing::TrackingModel();
  for (double d : {0.1, 0.3, 1.0}) {
    const StageGram g = CostGram(m, d);
    Matrix want = Matrix::Zero(4, 4);
    for (int k : {0, 2}) {
      want(k, k) = d;
      want(k, k + 1) = want(k + 1, k) = d * d / 2.0;
      want(k + 1, k + 1) = d + d * d * d / 3.0;
    }
    const double c = 2.0 * 0.5 * (std::pow(d, 4) / 12.0 + d * d / 2.0);
    EXPECT_LT(RelErr(g.M, want), 1e-13) << d;
    EXPECT_NEAR(g.c, c, 1e-13 * c) << d;
  }
}

TEST(CostGramTest, ZeroDuration) {
  const StageGram g = CostGram(testing::TrackingModel(), 0.0);
  EXPECT_EQ(g.M.norm(), 0.0);
  EXPECT_EQ(g.c, 0.0);
}

TEST(CostGramTest, MatchesAdaptiveQuadrature) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const ContinuousModel m = testing::RandomModel(rng, 1 + trial % 6);
    const double d = m.dt_s * (1 + trial % 9);
    const StageGram g = CostGram(m, d);
    EXPECT_LT(RelErr(g.M, OracleM(m, d)), 1e-8);
    EXPECT_NEAR(g.c, OracleC(m, d), 1e-8 * std::abs(OracleC(m, d)));
    EXPECT_TRUE(IsPsd(g.M));
    EXPECT_GE(g.c, 0.0);
  }
}

TEST(DiscretizedDynamicsTest, TablesMatchDirectCalls) {
  const ContinuousModel m = testing::TrackingModel();
  const DiscretizedDynamics dyn(m, 9);
  EXPECT_EQ(dyn.max_steps(), 9);
  for (int j = 0; j <= 9; ++j) {
    const Transition tr = Discretize(m, j * m.dt_s);
    const StageGram g = CostGram(m, j * m.dt_s);
    EXPECT_LT((dyn.Ad(j) - tr.Ad).norm(), 1e-13);
    EXPECT_LT((dyn.Wd(j) - tr.Wd).norm(), 1e-13);
    EXPECT_LT((dyn.gram(j).M - g.M).norm(), 1e-12);
    EXPECT_NEAR(dyn.gram(j).c, g.c, 1e-12);
  }
  EXPECT_THROW(dyn.Ad(10), Error);
}

TEST(DiscretizedDynamicsTest, IntegratedTraceIsTraceIntegral) {
  std::mt19937_64 rng(9);
  const ContinuousModel m = testing::TrackingModel();
  const DiscretizedDynamics dyn(m, 9);
  const Matrix p = testing::RandomSpd(rng, 4);
  const double want =
      testing::AdaptiveSimpson(
          [&](double t) {
            const Transition tr = Discretize(m, t);
            return Matrix::Constant(
                1, 1, (tr.Ad * p * tr.Ad.transpose() + tr.Wd).trace());
          },
          0.0, 9 * m.dt_s)(0, 0);
  EXPECT_NEAR(dyn.IntegratedTrace(p, 9), want, 1e-10 * want);
}

}  // namespace
}  // namespace plate
