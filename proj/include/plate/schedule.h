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

#ifndef PLATE_SCHEDULE_H_
#define PLATE_SCHEDULE_H_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/types.h"

namespace plate {

// A perception schedule p = {p_k}: one method id per epoch.
struct Schedule {
  std::vector<MethodId> methods;

  bool operator==(const Schedule&) const = default;

  Ticks DurationTicks(std::span<const PerceptionMethod> table) const {
    Ticks total = 0;
    for (MethodId id : methods) total += MethodById(table, id).steps;
    return total;
  }

  // Epoch start ticks tau_0 = 0, tau_{k+1} = tau_k + m_{p_k}.
  std::vector<Ticks> Epochs(std::span<const PerceptionMethod> table) const {
    std::vector<Ticks> out;
    out.reserve(methods.size() + 1);
    Ticks tau = 0;
    out.push_back(tau);
    for (MethodId id : methods) {
      tau += MethodById(table, id).steps;
      out.push_back(tau);
    }
    return out;
  }

  // Processed measurements whose capture time lies in [0, window).
  std::int64_t Attention(std::span<const PerceptionMethod> table,
                         Ticks window) const {
    std::int64_t count = 0;
    Ticks tau = 0;
    for (MethodId id : methods) {
      if (tau >= window) break;
      ++count;
      tau += MethodById(table, id).steps;
    }
    return count;
  }

  // Fraction of [0, window) the computing unit is busy: sum f * latency over
  // the window, with the last epoch truncated at the window end.
  double CpuLoad(std::span<const PerceptionMethod> table, Ticks window) const {
    if (window <= 0) return 0.0;
    double busy = 0.0;
    Ticks tau = 0;
    for (MethodId id : methods) {
      if (tau >= window) break;
      const PerceptionMethod& m = MethodById(table, id);
      busy += m.cpu * static_cast<double>(std::min<Ticks>(tau + m.steps, window) - tau);
      tau += m.steps;
    }
    return busy / static_cast<double>(window);
  }

  static Schedule Static(MethodId id, std::span<const PerceptionMethod> table,
                         Ticks window) {
    Schedule s;
    const int steps = MethodById(table, id).steps;
    for (Ticks tau = 0; tau < window; tau += steps) s.methods.push_back(id);
    return s;
  }
};

// True when the schedule reaches the window end and its last epoch is the
// first one to do so.
inline bool MinimallyCovers(const Schedule& s,
                            std::span<const PerceptionMethod> table,
                            Ticks window) {
  if (s.methods.empty()) return window <= 0;
  const Ticks total = s.DurationTicks(table);
  const Ticks without_last =
      total - MethodById(table, s.methods.back()).steps;
  return total >= window && without_last < window;
}

// Window and penalty weight of the cost functional.
struct CostSpec {
  double Tf = 1.0;
  double lambda_alpha = 1.0;
};

struct CostBreakdown {
  double total = 0.0;
  double covariance = 0.0;  // (1/Tf) int tr(P) dt
  double penalty = 0.0;     // (lambda/Tf) sum r
};

// Per-epoch contribution (1/Tf)[lambda r + c(d) + tr(P M(d))] for an epoch
// starting at `start` with the covariance `p`.
inline double StageCost(const Matrix& p, const PerceptionMethod& m,
                        Ticks start, Ticks window, const CostSpec& cost,
                        const DiscretizedDynamics& dyn) {
  const Ticks d = std::min<Ticks>(start + m.steps, window) - start;
  return (cost.lambda_alpha * m.penalty + dyn.IntegratedTrace(p, d)) / cost.Tf;
}

// Cost of a given schedule from P0 over [0, Tf], filter covariances
// propagated with nominal R.
inline CostBreakdown EvaluateScheduleBreakdown(
    const Matrix& p0, const Schedule& schedule, const CostSpec& cost,
    std::span<const PerceptionMethod> methods, const DiscretizedDynamics& dyn) {
  const Ticks window = ToTicks(cost.Tf, dyn.dt_s());
  if (schedule.DurationTicks(methods) < window)
    throw Error(ErrorCode::kIncompleteSchedule,
                "schedule does not cover the window");
  if (!MinimallyCovers(schedule, methods, window))
    throw Error(ErrorCode::kInvalidArgument,
                "schedule extends past the window (not minimal)");
  CostBreakdown out;
  Matrix p = p0;
  Ticks tau = 0;
  for (std::size_t k = 0; k < schedule.methods.size(); ++k) {
    const PerceptionMethod& m = MethodById(methods, schedule.methods[k]);
    const Ticks d = std::min<Ticks>(tau + m.steps, window) - tau;
    out.covariance += dyn.IntegratedTrace(p, d) / cost.Tf;
    out.penalty += cost.lambda_alpha * m.penalty / cost.Tf;
    tau += m.steps;
    if (tau < window) p = RiccatiStep(p, m, dyn);
  }
  out.total = out.covariance + out.penalty;
  return out;
}

inline double EvaluateSchedule(const Matrix& p0, const Schedule& schedule,
                               const CostSpec& cost,
                               std::span<const PerceptionMethod> methods,
                               const DiscretizedDynamics& dyn) {
  return EvaluateScheduleBreakdown(p0, schedule, cost, methods, dyn).total;
}

}  // namespace plate

#endif  // PLATE_SCHEDULE_H_
