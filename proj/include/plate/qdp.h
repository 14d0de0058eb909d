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

#ifndef PLATE_QDP_H_
#define PLATE_QDP_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "plate/covgraph.h"
#include "plate/dynamics.h"
#include "plate/schedule.h"
#include "plate/types.h"

namespace plate {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Forward dynamic-programming tables over the staged expansion of a
// covariance graph. Cell (q, l) is the state q at time l * dt_s.
struct DPTables {
  int num_nodes = 0;
  int alpha_max = 0;
  NodeId q0 = 0;
  std::vector<NodeId> MQ;    // best predecessor node
  std::vector<MethodId> MP;  // method on the arriving edge (0 = none)
  std::vector<double> MJ;    // best cost-to-arrive, +inf when unreached
  std::vector<int> MS;       // stage of the best predecessor
  std::int64_t relaxations = 0;

  std::size_t Cell(NodeId q, int stage) const {
    return static_cast<std::size_t>(q) * (alpha_max + 1) + stage;
  }
  double J(NodeId q, int stage) const { return MJ[Cell(q, stage)]; }
  NodeId Pred(NodeId q, int stage) const { return MQ[Cell(q, stage)]; }
  MethodId Method(NodeId q, int stage) const { return MP[Cell(q, stage)]; }
  int PredStage(NodeId q, int stage) const { return MS[Cell(q, stage)]; }
};

namespace internal {

// tr(P_q M(j)) + c(j) for every node and every j = 0..max latency.
class StageTraceTable {
 public:
  StageTraceTable(const CovarianceGraph& graph, const DiscretizedDynamics& dyn,
                  int max_steps)
      : width_(max_steps + 1) {
    values_.resize(static_cast<std::size_t>(graph.size()) * width_);
    for (NodeId q = 0; q < graph.size(); ++q) {
      for (int j = 0; j <= max_steps; ++j) {
        values_[static_cast<std::size_t>(q) * width_ + j] =
            dyn.IntegratedTrace(graph.reps[static_cast<std::size_t>(q)], j);
      }
    }
  }

  double operator()(NodeId q, Ticks d) const {
    return values_[static_cast<std::size_t>(q) * width_ + d];
  }

 private:
  int width_;
  std::vector<double> values_;
};

inline void CheckGraph(const CovarianceGraph& graph,
                       std::span<const PerceptionMethod> methods) {
  if (graph.size() == 0) throw Error(ErrorCode::kEmptyGraph, "empty graph");
  if (graph.num_methods != static_cast<int>(methods.size()) || !graph.Closed())
    throw Error(ErrorCode::kInvalidArgument,
                "graph is not closed over the given methods");
}

}  // namespace internal

// Forward relaxation: an edge from (q, l) under method rho lands at
// (succ(q, rho), min(l + m_rho, alpha_max)) with the stage cost of an epoch
// starting at l * dt_s, truncated at Tf.
inline DPTables QdpMatrices(NodeId q0, const CostSpec& cost,
                            const CovarianceGraph& graph,
                            std::span<const PerceptionMethod> methods,
                            const DiscretizedDynamics& dyn) {
  internal::CheckGraph(graph, methods);
  if (q0 < 0 || q0 >= graph.size())
    throw Error(ErrorCode::kInvalidArgument, "start node out of range");
  const Ticks window = ToTicks(cost.Tf, dyn.dt_s());
  if (window <= 0) throw Error(ErrorCode::kInvalidArgument, "Tf must be > 0");

  DPTables t;
  t.num_nodes = graph.size();
  t.alpha_max = static_cast<int>(window);
  t.q0 = q0;
  const std::size_t cells =
      static_cast<std::size_t>(t.num_nodes) * (t.alpha_max + 1);
  t.MQ.assign(cells, 0);
  t.MP.assign(cells, 0);
  t.MJ.assign(cells, kInfinity);
  t.MS.assign(cells, 0);
  t.MJ[t.Cell(q0, 0)] = 0.0;

  const internal::StageTraceTable traces(graph, dyn, MaxSteps(methods));
  for (int l = 0; l < t.alpha_max; ++l) {
    for (NodeId q = 0; q < t.num_nodes; ++q) {
      const double here = t.MJ[t.Cell(q, l)];
      for (const PerceptionMethod& m : methods) {
        ++t.relaxations;
        if (here == kInfinity) continue;
        const int target = std::min(l + m.steps, t.alpha_max);
        const double j =
            (cost.lambda_alpha * m.penalty + traces(q, target - l)) / cost.Tf;
        const double cand = here + j;
        const NodeId next = graph.Successor(q, m.id);
        const std::size_t cell = t.Cell(next, target);
        const double cur = t.MJ[cell];
        const bool better =
            cand < cur ||
            (cand == cur && cur != kInfinity &&
             (m.id < t.MP[cell] || (m.id == t.MP[cell] && q < t.MQ[cell])));
        if (better) {
          t.MJ[cell] = cand;
          t.MQ[cell] = q;
          t.MP[cell] = m.id;
          t.MS[cell] = l;
        }
      }
    }
  }
  return t;
}

struct QdpResult {
  Schedule schedule;
  double cost = 0.0;
  NodeId terminal = 0;
  std::int64_t relaxations = 0;
};

// Best terminal cost at the last stage and the schedule recovered by
// tracing predecessors back to (q0, 0).
inline QdpResult TraceBack(const DPTables& t) {
  QdpResult r;
  r.relaxations = t.relaxations;
  r.cost = kInfinity;
  const int last = t.alpha_max;
  for (NodeId q = 0; q < t.num_nodes; ++q) {
    if (t.J(q, last) < r.cost) {
      r.cost = t.J(q, last);
      r.terminal = q;
    }
  }
  if (r.cost == kInfinity)
    throw Error(ErrorCode::kUnreachable, "no path reaches the window end");
  std::vector<MethodId> reversed;
  NodeId q = r.terminal;
  int l = last;
  while (l > 0) {
    reversed.push_back(t.Method(q, l));
    const NodeId prev = t.Pred(q, l);
    l = t.PredStage(q, l);
    q = prev;
  }
  r.schedule.methods.assign(reversed.rbegin(), reversed.rend());
  return r;
}

inline QdpResult Qdp(NodeId q0, const CostSpec& cost,
                     const CovarianceGraph& graph,
                     std::span<const PerceptionMethod> methods,
                     const DiscretizedDynamics& dyn) {
  return TraceBack(QdpMatrices(q0, cost, graph, methods, dyn));
}

// Cost of `schedule` when the covariance is forced along the graph edges
// from q0 (the trajectory qdp optimizes over).
inline double EvaluateQuantizedSchedule(NodeId q0, const Schedule& schedule,
                                        const CostSpec& cost,
                                        const CovarianceGraph& graph,
                                        std::span<const PerceptionMethod> methods,
                                        const DiscretizedDynamics& dyn) {
  const Ticks window = ToTicks(cost.Tf, dyn.dt_s());
  if (!MinimallyCovers(schedule, methods, window))
    throw Error(ErrorCode::kIncompleteSchedule,
                "schedule does not minimally cover the window");
  double total = 0.0;
  NodeId q = q0;
  Ticks tau = 0;
  for (MethodId id : schedule.methods) {
    const PerceptionMethod& m = MethodById(methods, id);
    total += StageCost(graph.reps[static_cast<std::size_t>(q)], m, tau, window,
                       cost, dyn);
    tau += m.steps;
    q = graph.Successor(q, id);
  }
  return total;
}

// First decision of qdp from every node, computed for all start nodes at
// once by a backward cost-to-go pass over the same staged graph.
struct Policy {
  CostSpec cost;
  std::vector<MethodId> table;      // per node
  std::vector<double> cost_to_go;   // per node, at stage 0

  MethodId operator[](NodeId q) const {
    return table[static_cast<std::size_t>(q)];
  }
  int size() const { return static_cast<int>(table.size()); }
};

inline Policy PrecomputePolicy(const CovarianceGraph& graph,
                               const CostSpec& cost,
                               std::span<const PerceptionMethod> methods,
                               const DiscretizedDynamics& dyn) {
  internal::CheckGraph(graph, methods);
  const Ticks window = ToTicks(cost.Tf, dyn.dt_s());
  if (window <= 0) throw Error(ErrorCode::kInvalidArgument, "Tf must be > 0");
  const int stages = static_cast<int>(window);
  const int nodes = graph.size();
  const internal::StageTraceTable traces(graph, dyn, MaxSteps(methods));

  // value[l * nodes + q]: optimal cost-to-go from node q at stage l.
  std::vector<double> value(static_cast<std::size_t>(stages + 1) * nodes, 0.0);
  Policy policy;
  policy.cost = cost;
  policy.table.assign(static_cast<std::size_t>(nodes), methods.front().id);
  for (int l = stages - 1; l >= 0; --l) {
    for (NodeId q = 0; q < nodes; ++q) {
      double best = kInfinity;
      MethodId arg = methods.front().id;
      for (const PerceptionMethod& m : methods) {
        const int target = std::min(l + m.steps, stages);
        const double j =
            (cost.lambda_alpha * m.penalty + traces(q, target - l)) / cost.Tf +
            value[static_cast<std::size_t>(target) * nodes +
                  graph.Successor(q, m.id)];
        if (j < best) {
          best = j;
          arg = m.id;
        }
      }
      value[static_cast<std::size_t>(l) * nodes + q] = best;
      if (l == 0) policy.table[static_cast<std::size_t>(q)] = arg;
    }
  }
  policy.cost_to_go.assign(value.begin(), value.begin() + nodes);
  return policy;
}

}  // namespace plate

#endif  // PLATE_QDP_H_
