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

#ifndef PLATE_MHPLATE_H_
#define PLATE_MHPLATE_H_

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "plate/covgraph.h"
#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/qdp.h"
#include "plate/types.h"

namespace plate {

// Most recent innovations e = C xhat - z, kept separately per method.
class InnovationWindow {
 public:
  explicit InnovationWindow(int num_methods = 0, int capacity = 10)
      : capacity_(capacity),
        buffers_(static_cast<std::size_t>(num_methods)) {}

  int capacity() const { return capacity_; }

  void Push(MethodId id, const Vector& innovation) {
    auto& buf = buffers_.at(static_cast<std::size_t>(id - 1));
    buf.push_back(innovation);
    while (static_cast<int>(buf.size()) > capacity_) buf.pop_front();
  }

  const std::deque<Vector>& Get(MethodId id) const {
    return buffers_.at(static_cast<std::size_t>(id - 1));
  }

 private:
  int capacity_;
  std::vector<std::deque<Vector>> buffers_;
};

// Online measurement covariance from a window of innovations:
// R = mean(e e^T) - C P C^T, projected so every eigenvalue is at least
// 1e-6 * tr(R_nominal) / n_z. Falls back to the nominal R on an empty window.
inline Matrix AdaptiveR(const std::deque<Vector>& innovations,
                        const Matrix& phat_pre, const Matrix& c,
                        const Matrix& r_nominal) {
  if (innovations.empty()) return r_nominal;
  const int nz = static_cast<int>(c.rows());
  Matrix sum = Matrix::Zero(nz, nz);
  for (const Vector& e : innovations) sum.noalias() += e * e.transpose();
  const Matrix raw = Symmetrize(sum / static_cast<double>(innovations.size()) -
                                c * phat_pre * c.transpose());
  const double floor = 1e-6 * r_nominal.trace() / nz;
  Eigen::SelfAdjointEigenSolver<Matrix> es(raw);
  if (es.eigenvalues()(0) >= floor) return raw;
  const Vector clamped = es.eigenvalues().cwiseMax(floor);
  return Symmetrize(es.eigenvectors() * clamped.asDiagonal() *
                    es.eigenvectors().transpose());
}

struct MhConfig {
  bool adaptive_R = false;
  int window = 10;
  // Measurements captured or delivered inside any [t1, t2] are dropped.
  std::vector<std::pair<double, double>> occlusions;
};

inline bool Occluded(const MhConfig& config, double t) {
  for (const auto& [t1, t2] : config.occlusions) {
    if (t >= t1 && t <= t2) return true;
  }
  return false;
}

struct MhStepResult {
  BeliefState belief;
  MethodId next = 1;
  bool corrected = false;
  std::optional<Matrix> R_used;
};

// Advances the belief from the epoch start tau_k over the latency of the
// method in use (correcting with z[k] when it arrived, predicting
// otherwise), then picks the next method from the precomputed policy.
inline MhStepResult MhStep(const BeliefState& belief,
                           const std::optional<Measurement>& incoming,
                           MethodId current, const Policy& policy,
                           const CovarianceGraph& graph,
                           InnovationWindow& window, const MhConfig& config,
                           std::span<const PerceptionMethod> methods,
                           const DiscretizedDynamics& dyn) {
  const PerceptionMethod& m = MethodById(methods, current);
  MhStepResult out;
  if (incoming) {
    Measurement meas = *incoming;
    if (config.adaptive_R) {
      const Matrix& c = dyn.model().C;
      window.Push(m.id, c * belief.xhat - meas.z);
      meas.R_actual = AdaptiveR(window.Get(m.id), belief.Phat, c, m.R);
    }
    out.R_used = meas.R_actual ? *meas.R_actual : m.R;
    out.belief = Correct(belief, meas, m, dyn);
    out.corrected = true;
  } else {
    out.belief = Predict(belief, m.steps, dyn);
  }
  out.next = policy[Quantize(out.belief.Phat, graph)];
  return out;
}

enum class SourceStatus { kOk, kMissing, kExhausted };

struct SourceResult {
  SourceStatus status = SourceStatus::kMissing;
  Measurement measurement;
};

// Supplies z[k] for a frame captured at `capture_tick` processed by `method`.
using MeasurementSource =
    std::function<SourceResult(Ticks capture_tick, const PerceptionMethod&)>;

struct EpochRecord {
  Ticks tick = 0;
  MethodId method = 1;
  bool measured = false;  // z[k] was used at the end of this epoch
  Vector xhat;
  Matrix Phat;
};

struct GridRecord {
  Ticks tick = 0;
  double t = 0.0;
  Vector xhat;
  double trace = 0.0;
  MethodId method = 1;  // method being processed at this time
  bool measured = false;  // a correction landed at this tick
};

struct PlateTrace {
  double dt_s = 0.0;
  Ticks horizon = 0;
  Ticks end_tick = 0;  // start tick of the epoch after the last one run
  bool exhausted = false;
  std::vector<EpochRecord> epochs;
  std::vector<GridRecord> grid;  // ticks 0..horizon
};

// Event loop: at every epoch pick a method, wait its latency, then fold in
// the processed measurement (or predict through a dropped one).
inline PlateTrace RunPlateLoop(const ContinuousModel& model,
                               std::span<const PerceptionMethod> methods,
                               const DiscretizedDynamics& dyn,
                               const CovarianceGraph& graph,
                               const Policy& policy, double horizon,
                               const MeasurementSource& source,
                               const MhConfig& config = {}) {
  PlateTrace trace;
  trace.dt_s = model.dt_s;
  trace.horizon = ToTicks(horizon, model.dt_s);
  InnovationWindow window(static_cast<int>(methods.size()), config.window);

  BeliefState belief{0.0, model.x0, model.P0};
  MethodId method = policy[Quantize(belief.Phat, graph)];
  bool corrected_here = false;
  Ticks tick = 0;
  while (tick < trace.horizon) {
    const PerceptionMethod& m = MethodById(methods, method);
    SourceResult got = source(tick, m);
    if (got.status == SourceStatus::kExhausted) {
      trace.exhausted = true;
      break;
    }
    trace.epochs.push_back({tick, method, false, belief.xhat, belief.Phat});
    const Ticks stop = std::min<Ticks>(tick + m.steps, trace.horizon + 1);
    for (Ticks s = tick; s < stop; ++s) {
      const BeliefState b = Predict(belief, s - tick, dyn);
      trace.grid.push_back({s, s * model.dt_s, b.xhat, b.Phat.trace(), method,
                            s == tick && corrected_here});
    }

    std::optional<Measurement> incoming;
    const double capture = tick * model.dt_s;
    const double arrival = (tick + m.steps) * model.dt_s;
    if (got.status == SourceStatus::kOk && !Occluded(config, capture) &&
        !Occluded(config, arrival)) {
      incoming = std::move(got.measurement);
    }
    MhStepResult step = MhStep(belief, incoming, method, policy, graph, window,
                               config, methods, dyn);
    trace.epochs.back().measured = step.corrected;
    corrected_here = step.corrected;
    belief = std::move(step.belief);
    method = step.next;
    tick += m.steps;
  }
  trace.end_tick = tick;
  if (!trace.exhausted && tick == trace.horizon) {
    trace.grid.push_back({tick, tick * model.dt_s, belief.xhat,
                          belief.Phat.trace(), method, corrected_here});
  }
  return trace;
}

// One-node graph and policy that always answer `id`: a static schedule.
inline std::pair<CovarianceGraph, Policy> StaticPolicy(
    MethodId id, std::span<const PerceptionMethod> methods, int nx,
    const CostSpec& cost = {}) {
  CovarianceGraph g;
  g.reps.push_back(Matrix::Zero(nx, nx));
  g.num_methods = static_cast<int>(methods.size());
  g.succ.assign(methods.size(), 0);
  g.initial_count = 1;
  Policy p;
  p.cost = cost;
  p.table = {id};
  p.cost_to_go = {0.0};
  return {std::move(g), std::move(p)};
}

}  // namespace plate

#endif  // PLATE_MHPLATE_H_
