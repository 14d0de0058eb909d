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

#ifndef PLATE_COVGRAPH_H_
#define PLATE_COVGRAPH_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/types.h"

namespace plate {

// Quantized covariance states and their per-method successors.
struct CovarianceGraph {
  std::vector<Matrix> reps;
  int num_methods = 0;
  // succ[q * num_methods + (id - 1)]; empty when num_methods == 0.
  std::vector<NodeId> succ;
  double delta = 0.0;  // max distance of a mapped successor to its node
  double B0 = 0.0;
  double B = 0.0;  // max |rep|_F
  int initial_count = 0;

  int size() const { return static_cast<int>(reps.size()); }

  NodeId Successor(NodeId q, MethodId id) const {
    return succ[static_cast<std::size_t>(q) * num_methods + (id - 1)];
  }

  bool Closed() const {
    if (succ.size() != reps.size() * static_cast<std::size_t>(num_methods))
      return false;
    for (NodeId s : succ) {
      if (s < 0 || s >= size()) return false;
    }
    return true;
  }
};

// `count` random PSD matrices with |P|_F uniform on (0, B0]: eigenvalues
// uniform then normalized, rotated by a Haar-random orthogonal basis.
inline std::vector<Matrix> SampleRegion(int nx, double B0, int count,
                                        std::uint64_t seed) {
  if (count < 1 || !(B0 > 0.0) || nx < 1)
    throw Error(ErrorCode::kInvalidArgument,
                "sample_region needs count >= 1, B0 > 0, n_x >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector eig(nx);
    for (int j = 0; j < nx; ++j) eig(j) = unit(rng);
    if (eig.norm() == 0.0) eig.setOnes();
    const double radius = B0 * (1.0 - unit(rng));
    eig *= radius / eig.norm();

    Matrix g(nx, nx);
    for (int r = 0; r < nx; ++r)
      for (int c = 0; c < nx; ++c) g(r, c) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(nx, nx);
    const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < nx; ++j) {
      if (rr(j, j) < 0.0) q.col(j) *= -1.0;
    }
    Matrix p = Symmetrize(q * eig.asDiagonal() * q.transpose());
    // Guard against round-off pushing the norm past B0.
    const double norm = p.norm();
    if (norm > B0) p *= B0 / norm;
    out.push_back(std::move(p));
  }
  return out;
}

struct NearestNode {
  NodeId id = -1;
  double distance = std::numeric_limits<double>::infinity();
};

inline NearestNode Nearest(const Matrix& p, std::span<const Matrix> reps) {
  if (reps.empty()) throw Error(ErrorCode::kEmptyGraph, "graph has no nodes");
  NearestNode best;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < reps.size(); ++q) {
    const double d = (p - reps[q]).squaredNorm();
    // Near-ties within round-off resolve to the lower id.
    if (d < best_sq && !(best.id >= 0 && d >= best_sq * (1.0 - 1e-14))) {
      best_sq = d;
      best.id = static_cast<NodeId>(q);
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

// Nearest representative under the Frobenius norm; ties to the lowest id.
inline NodeId Quantize(const Matrix& p, const CovarianceGraph& graph) {
  return Nearest(p, graph.reps).id;
}

// Largest nearest-neighbour distance within the initial sample, used as the
// default admission threshold. A single sample covers B0 within |P1| + B0.
inline double InitialCoverRadius(std::span<const Matrix> reps, double B0) {
  if (reps.size() == 1) return reps[0].norm() + B0;
  double radius = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < reps.size(); ++j) {
      if (i != j) nn = std::min(nn, (reps[i] - reps[j]).squaredNorm());
    }
    radius = std::max(radius, nn);
  }
  return std::sqrt(radius);
}

struct ExpandOptions {
  // Successors farther than this from every node become new nodes.
  // Defaults to InitialCoverRadius of the input sample.
  std::optional<double> admit_tol;
  double B0 = 1.0;
  // Abort once the node count exceeds growth_limit * initial count.
  int growth_limit = 100;
  // When false, successors are only mapped to existing nodes.
  bool expand = true;
};

// Builds the transition graph over `reps`: every node gets a successor per
// method through the nominal-R covariance recursion, admitting successors
// that fall outside the current cover as new nodes until closure.
inline CovarianceGraph ExpandGraph(std::vector<Matrix> reps,
                                   std::span<const PerceptionMethod> methods,
                                   const DiscretizedDynamics& dyn,
                                   const ExpandOptions& options = {}) {
  if (reps.empty()) throw Error(ErrorCode::kEmptyGraph, "no representatives");
  CovarianceGraph g;
  g.initial_count = static_cast<int>(reps.size());
  g.B0 = options.B0;
  g.num_methods = static_cast<int>(methods.size());
  const double admit =
      options.admit_tol.value_or(InitialCoverRadius(reps, options.B0));
  const std::size_t limit =
      static_cast<std::size_t>(options.growth_limit) * reps.size();
  g.reps = std::move(reps);

  for (std::size_t q = 0; q < g.reps.size(); ++q) {
    for (const PerceptionMethod& m : methods) {
      Matrix next = RiccatiStep(g.reps[q], m, dyn);
      NearestNode nn = Nearest(next, g.reps);
      if (options.expand && nn.distance > admit) {
        g.reps.push_back(std::move(next));
        nn = {static_cast<NodeId>(g.reps.size() - 1), 0.0};
        if (g.reps.size() > limit) {
          throw Error(ErrorCode::kNonTermination,
                      "graph expansion exceeded " + std::to_string(limit) +
                          " nodes (admit_tol " + std::to_string(admit) + ")");
        }
      }
      g.succ.push_back(nn.id);
      g.delta = std::max(g.delta, nn.distance);
    }
  }
  for (const Matrix& r : g.reps) g.B = std::max(g.B, r.norm());
  return g;
}

}  // namespace plate

#endif  // PLATE_COVGRAPH_H_
