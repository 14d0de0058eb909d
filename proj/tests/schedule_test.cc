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
#include <vector>

#include <gtest/gtest.h>

#include "plate/exact.h"
#include "plate/schedule.h"
#include "test_util.h"

namespace plate {
namespace {

// Every minimal covering schedule, enumerated with an explicit odometer
// instead of recursion.
std::vector<Schedule> EnumerateCovering(std::span<const PerceptionMethod> methods,
                                        Ticks window) {
  std::vector<Schedule> out;
  const int d = static_cast<int>(methods.size());
  std::vector<int> digits{0};
  while (!digits.empty()) {
    Ticks total = 0;
    for (int x : digits) total += methods[x].steps;
    if (total >= window) {
      Schedule s;
      for (int x : digits) s.methods.push_back(methods[x].id);
      out.push_back(std::move(s));
      // Advance: drop exhausted trailing digits, bump the last one.
      while (!digits.empty() && digits.back() == d - 1) digits.pop_back();
      if (!digits.empty()) ++digits.back();
    } else {
      digits.push_back(0);
    }
  }
  return out;
}

class TrackingFixture : public ::testing::Test {
 protected:
  ContinuousModel model = testing::TrackingModel();
  std::vector<PerceptionMethod> methods = testing::TrackingMethods();
  DiscretizedDynamics dyn{model, 9};
  CostSpec cost{1.0, 5.0};
};

TEST_F(TrackingFixture, ScheduleBookkeeping) {
  const Schedule s1 = Schedule::Static(1, methods, 30);
  const Schedule s2 = Schedule::Static(2, methods, 30);
  EXPECT_EQ(s1.methods.size(), 10u);
  EXPECT_EQ(s2.methods.size(), 4u);
  EXPECT_EQ(s1.Attention(methods, 30), 10);
  EXPECT_EQ(s2.Attention(methods, 30), 4);
  EXPECT_DOUBLE_EQ(s1.CpuLoad(methods, 30), 0.5);
  EXPECT_NEAR(s2.CpuLoad(methods, 30), 0.8, 1e-15);
  EXPECT_EQ(s2.Epochs(methods), (std::vector<Ticks>{0, 9, 18, 27, 36}));
  EXPECT_TRUE(MinimallyCovers(s2, methods, 30));
  Schedule longer = s2;
  longer.methods.push_back(1);
  EXPECT_FALSE(MinimallyCovers(longer, methods, 30));
}

TEST_F(TrackingFixture, EvaluateMatchesFineTrapezoid) {
  const Schedule s{{2, 2, 2, 2}};
  const CostBreakdown got =
      EvaluateScheduleBreakdown(model.P0, s, cost, methods, dyn);
  // Independent: integrate tr(P(t)) with dt = 1e-4 over each epoch.
  double integral = 0.0;
  Matrix p = model.P0;
  double tau = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double end = std::min(tau + 0.3, 1.0);
    const int n = static_cast<int>(std::lround((end - tau) / 1e-4));
    const double h = (end - tau) / n;
    BeliefState b{0.0, Vector::Zero(4), p};
    double prev = p.trace();
    for (int j = 1; j <= n; ++j) {
      const double cur = PredictSeconds(b, j * h, model).Phat.trace();
      integral += 0.5 * h * (prev + cur);
      prev = cur;
    }
    p = RiccatiStep(p, methods[1], dyn);
    tau += 0.3;
  }
  EXPECT_NEAR(got.covariance, integral, 1e-7 * integral);
  EXPECT_NEAR(got.penalty, 5.0 * 4 * 0.24, 1e-12);
  EXPECT_TRUE(std::isfinite(got.total));
}

TEST_F(TrackingFixture, ZeroNoiseZeroCost) {
  model.W.setZero();
  const DiscretizedDynamics quiet(model, 9);
  for (auto& m : methods) m.penalty = 0.0;
  const Schedule s{{1, 2, 1, 2, 1}};
  Schedule minimal;
  Ticks tau = 0;
  for (MethodId id : s.methods) {
    if (tau >= 30) break;
    minimal.methods.push_back(id);
    tau += methods[id - 1].steps;
  }
  while (tau < 30) {
    minimal.methods.push_back(1);
    tau += 3;
  }
  EXPECT_EQ(EvaluateSchedule(Matrix::Zero(4, 4), minimal, cost, methods, quiet), 0.0);
}

TEST_F(TrackingFixture, RejectsBadSchedules) {
  try {
    EvaluateSchedule(model.P0, Schedule{{2, 2}}, cost, methods, dyn);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteSchedule);
  }
  try {
    EvaluateSchedule(model.P0, Schedule{{2, 2, 2, 2, 2}}, cost, methods, dyn);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST_F(TrackingFixture, EnumeratorCountsCompositions) {
  // Minimal covers of 30 ticks with parts {3, 9}.
  const auto all = EnumerateCovering(methods, 30);
  std::vector<long> ways(40, 0);
  ways[0] = 1;
  long count = 0;
  for (int t = 0; t < 30; ++t) {
    for (int s : {3, 9}) {
      if (t + s >= 30) count += ways[t];
      else ways[t + s] += ways[t];
    }
  }
  EXPECT_EQ(static_cast<long>(all.size()), count);
  for (const auto& s : all) EXPECT_TRUE(MinimallyCovers(s, methods, 30));
}

TEST_F(TrackingFixture, ExactMatchesBruteForce) {
  const auto all = EnumerateCovering(methods, 30);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix p0 = testing::RandomSpd(rng, 4, 0.01) * (trial + 1);
    const ExactResult r = DynProgExact(p0, cost, methods, dyn);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : all) best = std::min(best, EvaluateSchedule(p0, s, cost, methods, dyn));
    EXPECT_NEAR(r.cost, best, 1e-10 * best);
    EXPECT_NEAR(EvaluateSchedule(p0, r.schedule, cost, methods, dyn), r.cost, 1e-12 * best);
    // alpha_max = 30 / 3 = 10, D = 2.
    EXPECT_LE(r.calls, 1 << 10);
  }
}

TEST_F(TrackingFixture, ExactIsOptimalAgainstEverySchedule) {
  cost.lambda_alpha = 0.2;  // make the slow accurate detector competitive
  const auto all = EnumerateCovering(methods, 30);
  const ExactResult r = DynProgExact(model.P0, cost, methods, dyn);
  for (const auto& s : all)
    EXPECT_LE(r.cost, EvaluateSchedule(model.P0, s, cost, methods, dyn) + 1e-12);
}

TEST_F(TrackingFixture, HugePenaltyPicksCheapestSchedule) {
  cost.lambda_alpha = 1e6;
  const ExactResult r = DynProgExact(model.P0, cost, methods, dyn);
  EXPECT_EQ(r.schedule, Schedule::Static(1, methods, 30));
}

TEST_F(TrackingFixture, IdenticalMethodsGiveStaticCost) {
  methods[1] = methods[0];
  methods[1].id = 2;
  const ExactResult r = DynProgExact(model.P0, cost, methods, dyn);
  EXPECT_NEAR(r.cost,
              EvaluateSchedule(model.P0, Schedule::Static(2, methods, 30), cost, methods, dyn),
              1e-12);
  // Ties resolve to the lower id.
  EXPECT_EQ(r.schedule, Schedule::Static(1, methods, 30));
}

TEST_F(TrackingFixture, SingleMethodHasOneSchedule) {
  methods.resize(1);
  const ExactResult r = DynProgExact(model.P0, cost, methods, dyn);
  EXPECT_EQ(r.calls, 10);
  EXPECT_DOUBLE_EQ(r.cost, EvaluateSchedule(model.P0, r.schedule, cost, methods, dyn));
}

TEST_F(TrackingFixture, Deterministic) {
  cost.lambda_alpha = 0.2;
  const ExactResult a = DynProgExact(model.P0, cost, methods, dyn);
  const ExactResult b = DynProgExact(model.P0, cost, methods, dyn);
  EXPECT_EQ(a.schedule, b.schedule);
  EXPECT_EQ(a.cost, b.cost);
}

TEST_F(TrackingFixture, ExplosionGuard) {
  cost.Tf = 10.0;
  try {
    DynProgExact(model.P0, cost, methods, dyn);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExplosionGuard);
    EXPECT_NE(std::string(e.what()).find("qdp"), std::string::npos);
  }
}

}  // namespace
}  // namespace plate
