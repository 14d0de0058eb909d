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

#ifndef PLATE_EXACT_H_
#define PLATE_EXACT_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/schedule.h"
#include "plate/types.h"

namespace plate {

struct ExactOptions {
  // Upper bound on floor(Tf / min latency), i.e. the recursion depth.
  int depth_cap = 24;
};

struct ExactResult {
  Schedule schedule;
  double cost = 0.0;
  std::int64_t calls = 0;  // recursive invocations, root included
};

namespace internal {

struct ExactSearch {
  std::span<const PerceptionMethod> methods;
  const DiscretizedDynamics& dyn;
  CostSpec cost;
  Ticks window;
  std::int64_t calls = 0;

  // Best cost-to-go from epoch start `tau` with covariance `p`; the schedule
  // is written to `out` (reversed, caller flips it).
  double Solve(Ticks tau, const Matrix& p, std::vector<MethodId>& out) {
    ++calls;
    double best = std::numeric_limits<double>::infinity();
    std::vector<MethodId> best_tail;
    std::vector<MethodId> tail;
    for (const PerceptionMethod& m : methods) {
      const Ticks next = tau + m.steps;
      double j = StageCost(p, m, tau, window, cost, dyn);
      tail.clear();
      if (next < window) {
        j += Solve(next, RiccatiStep(p, m, dyn), tail);
      }
      // Strict comparison keeps the lowest id among ties.
      if (j < best) {
        best = j;
        best_tail = tail;
        best_tail.push_back(m.id);
      }
    }
    out = std::move(best_tail);
    return best;
  }
};

}  // namespace internal

// Globally optimal schedule over all minimal covering schedules, by
// exhaustive recursion. Exponential in Tf / min latency.
inline ExactResult DynProgExact(const Matrix& p0, const CostSpec& cost,
                                std::span<const PerceptionMethod> methods,
                                const DiscretizedDynamics& dyn,
                                const ExactOptions& options = {}) {
  if (methods.empty())
    throw Error(ErrorCode::kInvalidArgument, "no perception methods");
  const Ticks window = ToTicks(cost.Tf, dyn.dt_s());
  if (window <= 0) throw Error(ErrorCode::kInvalidArgument, "Tf must be > 0");
  const Ticks alpha_max = window / MinSteps(methods);
  if (alpha_max > options.depth_cap) {
    throw Error(ErrorCode::kExplosionGuard,
                "Tf / min latency = " + std::to_string(alpha_max) +
                    " exceeds the exact-search depth cap of " +
                    std::to_string(options.depth_cap) +
                    "; use the quantized scheduler (qdp) instead");
  }
  internal::ExactSearch search{methods, dyn, cost, window};
  ExactResult result;
  std::vector<MethodId> reversed;
  result.cost = search.Solve(0, p0, reversed);
  result.schedule.methods.assign(reversed.rbegin(), reversed.rend());
  result.calls = search.calls;
  return result;
}

}  // namespace plate

#endif  // PLATE_EXACT_H_
