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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "plate/bounds.h"
#include "plate/covgraph.h"
#include "test_util.h"

namespace plate {
namespace {

TEST(SampleRegionTest, InsideBallAndPsd) {
  const auto reps = SampleRegion(4, 1.0, 1000, 17);
  ASSERT_EQ(reps.size(), 1000u);
  for (const Matrix& p : reps) {
    EXPECT_LE(p.norm(), 1.0 + 1e-15);
    EXPECT_GE(MinEigenvalue(p), -1e-15);
    EXPECT_TRUE(IsSymmetric(p));
  }
}

TEST(SampleRegionTest, DeterministicPerSeed) {
  const auto a = SampleRegion(3, 2.0, 20, 5);
  const auto b = SampleRegion(3, 2.0, 20, 5);
  const auto c = SampleRegion(3, 2.0, 20, 6);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], c[0]);
  EXPECT_EQ(SampleRegion(2, 1.0, 1, 99).size(), 1u);
  EXPECT_THROW(SampleRegion(2, 1.0, 0, 1), Error);
}

TEST(QuantizeTest, RepresentativeMapsToItself) {
  CovarianceGraph g;
  g.reps = SampleRegion(4, 1.0, 50, 3);
  for (NodeId q = 0; q < g.size(); ++q) EXPECT_EQ(Quantize(g.reps[q], g), q);
}

TEST(QuantizeTest, TiesGoToLowerId) {
  CovarianceGraph g;
  for (int i = 0; i < 10; ++i) g.reps.push_back(100.0 * (i + 1) * Matrix::Identity(2, 2));
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  Matrix b = Matrix::Zero(2, 2);
  b(1, 1) = 1.0;
  g.reps[3] = a;
  g.reps[7] = b;
  EXPECT_EQ(Quantize(0.5 * (a + b), g), 3);
  // Perturbation within round-off still resolves to 3.
  Matrix p = 0.5 * (a + b);
  p(1, 1) += 1e-16;
  EXPECT_EQ(Quantize(p, g), 3);
}

TEST(QuantizeTest, MatchesLinearScan) {
  CovarianceGraph g;
  g.reps = SampleRegion(4, 1.0, 500, 8);
  const auto probes = SampleRegion(4, 1.5, 200, 9);
  for (const Matrix& p : probes) {
    NodeId best = 0;
    for (NodeId q = 1; q < g.size(); ++q)
      if ((p - g.reps[q]).norm() < (p - g.reps[best]).norm()) best = q;
    EXPECT_EQ(Quantize(p, g), best);
  }
}

TEST(QuantizeTest, EmptyGraph) {
  CovarianceGraph g;
  try {
    Quantize(Matrix::Identity(2, 2), g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGraph);
  }
}

class ExpandTest : public ::testing::Test {
 protected:
  ContinuousModel model = testing::TrackingModel();
  std::vector<PerceptionMethod> methods = testing::TrackingMethods();
  DiscretizedDynamics dyn{model, 9};
};

TEST_F(ExpandTest, FixedPointIsSelfLoop) {
  methods.resize(1);
  const Matrix fixed = SteadyStateCovariance(methods[0], dyn);
  const CovarianceGraph g = ExpandGraph({fixed}, methods, dyn);
  ASSERT_EQ(g.size(), 1);
  EXPECT_EQ(g.Successor(0, 1), 0);
  EXPECT_LT(g.delta, 1e-10);
}

TEST_F(ExpandTest, EmptyMethodSetLeavesGraph) {
  const auto reps = SampleRegion(4, 1.0, 10, 1);
  const CovarianceGraph g = ExpandGraph(reps, {}, dyn);
  EXPECT_EQ(g.size(), 10);
  EXPECT_TRUE(g.succ.empty());
}

TEST_F(ExpandTest, ClosedPsdAndBounded) {
  ExpandOptions opt;
  opt.B0 = 1.0;
  const CovarianceGraph g = ExpandGraph(SampleRegion(4, 1.0, 200, 2), methods, dyn, opt);
  EXPECT_TRUE(g.Closed());
  EXPECT_GE(g.size(), 200);
  double b = 0.0;
  for (const Matrix& r : g.reps) {
    EXPECT_TRUE(IsPsd(r));
    b = std::max(b, r.norm());
  }
  EXPECT_DOUBLE_EQ(g.B, b);
  for (NodeId q = 0; q < g.size(); ++q)
    for (MethodId id = 1; id <= 2; ++id) {
      const Matrix next = RiccatiStep(g.reps[q], methods[id - 1], dyn);
      // Edges are fixed when recorded; later nodes may lie nearer.
      const double edge = (next - g.reps[g.Successor(q, id)]).norm();
      EXPECT_LE(edge, g.delta + 1e-12);
      EXPECT_LE((next - g.reps[Quantize(next, g)]).norm(), edge + 1e-15);
    }
}

TEST_F(ExpandTest, RepresentativesWithinCertifiedBound) {
  const auto cert = SynthesizeCertificate(methods, dyn, 0.98);
  ASSERT_TRUE(cert.has_value());
  const double bs = BoundBs(*cert, 1.0, methods, dyn);
  ExpandOptions opt;
  opt.B0 = 1.0;
  const CovarianceGraph g = ExpandGraph(SampleRegion(4, 1.0, 500, 4), methods, dyn, opt);
  for (const Matrix& r : g.reps) EXPECT_LE(r.norm(), bs);
}

TEST_F(ExpandTest, Deterministic) {
  const CovarianceGraph a = ExpandGraph(SampleRegion(4, 1.0, 100, 7), methods, dyn);
  const CovarianceGraph b = ExpandGraph(SampleRegion(4, 1.0, 100, 7), methods, dyn);
  EXPECT_EQ(a.succ, b.succ);
  ASSERT_EQ(a.size(), b.size());
  for (NodeId q = 0; q < a.size(); ++q) EXPECT_EQ(a.reps[q], b.reps[q]);
}

TEST_F(ExpandTest, GrowthGuard) {
  ExpandOptions opt;
  opt.admit_tol = 1e-14;
  opt.growth_limit = 2;
  try {
    ExpandGraph(SampleRegion(4, 1.0, 10, 7), methods, dyn, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonTermination);
  }
}

TEST_F(ExpandTest, NoExpansionMapsToExisting) {
  ExpandOptions opt;
  opt.expand = false;
  const CovarianceGraph g = ExpandGraph(SampleRegion(4, 1.0, 1, 7), methods, dyn, opt);
  EXPECT_EQ(g.size(), 1);
  EXPECT_EQ(g.Successor(0, 1), 0);
  EXPECT_EQ(g.Successor(0, 2), 0);
}

TEST_F(ExpandTest, DeltaShrinksWithSampleCount) {
  std::vector<double> medians;
  for (int count : {50, 500, 5000}) {
    std::vector<double> deltas;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ExpandOptions opt;
      opt.B0 = 1.0;
      deltas.push_back(ExpandGraph(SampleRegion(4, 1.0, count, seed), methods, dyn, opt).delta);
    }
    std::nth_element(deltas.begin(), deltas.begin() + 5, deltas.end());
    medians.push_back(deltas[5]);
  }
  EXPECT_GE(medians[0], medians[1]);
  EXPECT_GE(medians[1], medians[2]);
}

}  // namespace
}  // namespace plate
