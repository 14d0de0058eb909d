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

#ifndef PLATE_SIMKIT_H_
#define PLATE_SIMKIT_H_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "plate/bounds.h"
#include "plate/covgraph.h"
#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/exact.h"
#include "plate/mhplate.h"
#include "plate/qdp.h"
#include "plate/schedule.h"
#include "plate/types.h"

namespace plate {

// SplitMix64 finalizer; mixes (master seed, stream ids) into a seed.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t StreamSeed(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return MixSeed(MixSeed(MixSeed(MixSeed(master) ^ a) ^ b) ^ c);
}

// Largest step <= dt that divides the sampling period.
inline double AlignedStep(double dt_s, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be > 0");
  const double pieces = std::ceil(dt_s / dt - 1e-9);
  return dt_s / std::max(1.0, pieces);
}

inline int SubstepsPerPeriod(double dt_s, double dt) {
  return static_cast<int>(std::lround(dt_s / dt));
}

struct SdePath {
  double dt = 0.0;
  int substeps = 1;  // dt per sampling period
  std::vector<Vector> x;

  // State at a sampling-grid tick.
  const Vector& AtTick(Ticks tick) const {
    return x.at(static_cast<std::size_t>(tick) * substeps);
  }
  Ticks LastTick() const {
    return static_cast<Ticks>((x.size() - 1) / static_cast<std::size_t>(substeps));
  }
};

// Euler-Maruyama: x_{j+1} = x_j + A x_j dt + B sqrt(dt) xi, xi ~ N(0, W),
// x_0 ~ N(x0, P0). `dt` must divide the sampling period.
inline SdePath SimulateSde(const ContinuousModel& model, double horizon,
                           double dt, std::uint64_t seed) {
  const int sub = SubstepsPerPeriod(model.dt_s, dt);
  if (sub < 1 || std::abs(sub * dt - model.dt_s) > 1e-12 * model.dt_s)
    throw Error(ErrorCode::kInvalidArgument,
                "dt must divide the sampling period");
  const Ticks ticks = ToTicks(horizon, model.dt_s);
  const std::size_t steps = static_cast<std::size_t>(ticks) * sub;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int nx = model.nx();
  const auto draw = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    return v;
  };
  SdePath path;
  path.dt = dt;
  path.substeps = sub;
  path.x.reserve(steps + 1);
  path.x.push_back(model.x0 + PsdFactor(model.P0) * draw(nx));
  const Matrix noise = model.B * PsdFactor(model.W) * std::sqrt(dt);
  const Matrix step = Matrix::Identity(nx, nx) + model.A * dt;
  for (std::size_t j = 0; j < steps; ++j) {
    path.x.push_back(step * path.x.back() + noise * draw(model.nw()));
  }
  return path;
}

// z = C x + F xi with F F^T = R (true_R when given, else nominal).
template <typename Rng>
inline Measurement SynthMeasurement(const Vector& x_true,
                                    const PerceptionMethod& method,
                                    const Matrix& c, Rng& rng,
                                    const std::optional<Matrix>& true_R,
                                    std::int64_t k, double capture_time,
                                    double dt_s) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Matrix& r = true_R ? *true_R : method.R;
  Vector xi(c.rows());
  for (int i = 0; i < xi.size(); ++i) xi(i) = gauss(rng);
  Measurement out;
  out.k = k;
  out.z = c * x_true + PsdFactor(r) * xi;
  out.produced_at = capture_time + method.steps * dt_s;
  out.method_id = method.id;
  return out;
}

// Measurement source reading ground truth off a simulated path. Noise for a
// frame depends only on (seed, capture tick, method), so two loops sharing a
// source see identical measurements for identical decisions.
inline MeasurementSource PathSource(
    const SdePath& path, const ContinuousModel& model,
    std::vector<std::optional<Matrix>> true_R, std::uint64_t seed,
    std::vector<Measurement>* log = nullptr) {
  auto k = std::make_shared<std::int64_t>(0);
  return [&path, &model, true_R = std::move(true_R), seed, log, k](
             Ticks tick, const PerceptionMethod& m) -> SourceResult {
    if (tick > path.LastTick()) return {SourceStatus::kExhausted, {}};
    std::mt19937_64 rng(StreamSeed(seed, 0x6d656173ull,
                                   static_cast<std::uint64_t>(tick),
                                   static_cast<std::uint64_t>(m.id)));
    const std::size_t idx = static_cast<std::size_t>(m.id - 1);
    const std::optional<Matrix> r =
        idx < true_R.size() ? true_R[idx] : std::optional<Matrix>{};
    SourceResult out{SourceStatus::kOk,
                     SynthMeasurement(path.AtTick(tick), m, model.C, rng, r,
                                      (*k)++, tick * model.dt_s, model.dt_s)};
    if (log) log->push_back(out.measurement);
    return out;
  };
}

// Transitions on the fine simulation grid, offsets 0..max_steps*substeps.
class FineGrid {
 public:
  FineGrid(const ContinuousModel& model, double dt, int max_steps)
      : dt_(dt), substeps_(SubstepsPerPeriod(model.dt_s, dt)) {
    for (int j = 0; j <= max_steps * substeps_; ++j)
      table_.push_back(Discretize(model, j * dt));
  }
  double dt() const { return dt_; }
  int substeps() const { return substeps_; }
  const Transition& at(int j) const { return table_.at(static_cast<std::size_t>(j)); }

 private:
  double dt_;
  int substeps_;
  std::vector<Transition> table_;
};

struct Metrics {
  double J_empirical = 0.0;
  double covariance = 0.0;
  double penalty = 0.0;
  std::int64_t attention = 0;
  double cpu_load = 0.0;
  double mse = 0.0;  // NaN without ground truth
  double avg_trace = 0.0;  // mean tr(P) over sampling-grid points
};

// Empirical metrics of a loop trace over [0, Tf]. tr(P(t)) is integrated by
// trapezoid on the fine grid within each epoch (left limit at the epoch end).
inline Metrics ComputeMetrics(const PlateTrace& trace, const CostSpec& cost,
                              std::span<const PerceptionMethod> methods,
                              const FineGrid& fine,
                              const SdePath* truth = nullptr) {
  const Ticks window = ToTicks(cost.Tf, trace.dt_s);
  if (trace.end_tick < window || trace.grid.size() < static_cast<std::size_t>(window) + 1)
    throw Error(ErrorCode::kIncompleteSchedule, "trace does not cover [0, Tf]");
  Metrics out;
  const int sub = fine.substeps();
  double busy = 0.0;
  for (const EpochRecord& e : trace.epochs) {
    if (e.tick >= window) break;
    const PerceptionMethod& m = MethodById(methods, e.method);
    const Ticks d = std::min<Ticks>(e.tick + m.steps, window) - e.tick;
    const int n = static_cast<int>(d) * sub;
    double integral = 0.0;
    double prev = e.Phat.trace();
    for (int j = 1; j <= n; ++j) {
      const Transition& tr = fine.at(j);
      const double cur = (tr.Ad * e.Phat * tr.Ad.transpose() + tr.Wd).trace();
      integral += 0.5 * fine.dt() * (prev + cur);
      prev = cur;
    }
    out.covariance += integral / cost.Tf;
    out.penalty += cost.lambda_alpha * m.penalty / cost.Tf;
    busy += m.cpu * static_cast<double>(d);
    ++out.attention;
  }
  out.J_empirical = out.covariance + out.penalty;
  out.cpu_load = busy / static_cast<double>(window);

  double trace_sum = 0.0;
  double err_sum = 0.0;
  std::size_t count = 0;
  for (const GridRecord& g : trace.grid) {
    if (g.tick > window) break;
    trace_sum += g.trace;
    if (truth) err_sum += (g.xhat - truth->AtTick(g.tick)).squaredNorm();
    ++count;
  }
  out.avg_trace = trace_sum / static_cast<double>(count);
  out.mse = truth ? err_sum / static_cast<double>(count)
                  : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------------------
// Scenario description shared by the experiment drivers and the CLI.

struct GraphSpec {
  double B0 = 1.0;
  int samples = 50;
  std::uint64_t seed = 1;
  std::optional<double> admit_tol;
  bool expand = true;
  std::vector<int> sizes;  // cost-histogram sweep; defaults to {samples}
};

struct SimSpec {
  double dt = 1e-3;
  double horizon = 10.0;
  std::vector<std::pair<double, double>> occlusions;
  std::vector<std::optional<Matrix>> true_R;  // per method
  std::uint64_t seed = 1;
  int runs = 1;
  int jobs = 1;
  bool adaptive_R = false;
  int window = 10;
  std::optional<MethodId> static_method;  // bypass the graph policy
  int schedule_steps = 100;               // bound-validation
  int random_schedules = 10000;           // J_min when exhaustive is too deep
  int depth_cap = 24;
  double gamma = 0.98;                    // certificate synthesis
};

struct Scenario {
  ContinuousModel model;
  std::vector<PerceptionMethod> methods;
  CostSpec cost;
  GraphSpec graph;
  SimSpec sim;
  std::optional<LyapunovCertificate> certificate;
  std::string experiment = "moving-horizon";

  DiscretizedDynamics Dynamics() const {
    return DiscretizedDynamics(model, MaxSteps(methods));
  }
};

inline CovarianceGraph BuildGraph(const Scenario& sc,
                                  const DiscretizedDynamics& dyn,
                                  int samples) {
  ExpandOptions opt;
  opt.admit_tol = sc.graph.admit_tol;
  opt.B0 = sc.graph.B0;
  opt.expand = sc.graph.expand;
  return ExpandGraph(
      SampleRegion(sc.model.nx(), sc.graph.B0, samples, sc.graph.seed),
      sc.methods, dyn, opt);
}

struct SimTrace {
  SdePath truth;
  std::vector<Measurement> measurements;
  PlateTrace plate;
  Metrics metrics;
};

// One simulated run of the PLATE loop against ground truth.
inline SimTrace RunScenario(const Scenario& sc, const DiscretizedDynamics& dyn,
                            const CovarianceGraph& graph, const Policy& policy,
                            std::uint64_t seed, bool adaptive,
                            const FineGrid& fine) {
  SimTrace out;
  out.truth = SimulateSde(sc.model, sc.sim.horizon, fine.dt(),
                          StreamSeed(seed, 0x747275ull));
  MhConfig cfg;
  cfg.adaptive_R = adaptive;
  cfg.window = sc.sim.window;
  cfg.occlusions = sc.sim.occlusions;
  const MeasurementSource source =
      PathSource(out.truth, sc.model, sc.sim.true_R, seed, &out.measurements);
  out.plate = RunPlateLoop(sc.model, sc.methods, dyn, graph, policy,
                           sc.sim.horizon, source, cfg);
  CostSpec window = sc.cost;
  window.Tf = sc.sim.horizon;
  out.metrics = ComputeMetrics(out.plate, window, sc.methods, fine, &out.truth);
  return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo driver: independent runs on a worker pool, rows reduced in
// run order.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> errors;  // per row, empty when the run succeeded
};

using RunFn = std::function<std::vector<double>(int run)>;

inline Table MonteCarlo(std::vector<std::string> columns, int runs, int jobs,
                        const RunFn& fn) {
  Table table;
  table.columns = std::move(columns);
  table.rows.assign(static_cast<std::size_t>(runs), {});
  table.errors.assign(static_cast<std::size_t>(runs), {});
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < runs; i = next++) {
      try {
        table.rows[static_cast<std::size_t>(i)] = fn(i);
      } catch (const std::exception& e) {
        table.errors[static_cast<std::size_t>(i)] = e.what();
        table.rows[static_cast<std::size_t>(i)].assign(
            table.columns.size(), std::numeric_limits<double>::quiet_NaN());
      }
    }
  };
  const int workers = std::max(1, std::min(jobs, runs));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return table;
}

inline Schedule RandomSchedule(std::mt19937_64& rng, int num_methods,
                               std::span<const PerceptionMethod> methods,
                               Ticks window) {
  std::uniform_int_distribution<int> pick(1, num_methods);
  Schedule s;
  for (Ticks tau = 0; tau < window;) {
    const MethodId id = pick(rng);
    s.methods.push_back(id);
    tau += MethodById(methods, id).steps;
  }
  return s;
}

// Covariance bound validation against B_s for random P0 and schedules.
inline Table BoundValidation(const Scenario& sc) {
  const DiscretizedDynamics dyn = sc.Dynamics();
  std::optional<LyapunovCertificate> cert = sc.certificate;
  if (!cert) cert = SynthesizeCertificate(sc.methods, dyn, sc.sim.gamma);
  if (!cert)
    throw Error(ErrorCode::kInfeasibleCertificate,
                "no certificate supplied and synthesis failed");
  const double bs = BoundBs(*cert, sc.graph.B0, sc.methods, dyn);
  const std::vector<Matrix> gains = cert->Gains();
  const int d = static_cast<int>(sc.methods.size());
  return MonteCarlo(
      {"run", "bound", "max_norm", "violations", "switched_max_norm",
       "max_trace_excess"},
      sc.sim.runs, sc.sim.jobs, [&](int run) {
        const std::uint64_t seed = StreamSeed(sc.sim.seed, run);
        Matrix p = SampleRegion(sc.model.nx(), sc.graph.B0, 1, seed)[0];
        Matrix ps = p;
        std::mt19937_64 rng(StreamSeed(seed, 0x736368ull));
        std::uniform_int_distribution<int> pick(1, d);
        double max_norm = p.norm();
        double switched = ps.norm();
        double excess = -std::numeric_limits<double>::infinity();
        int violations = max_norm > bs ? 1 : 0;
        for (int k = 0; k < sc.sim.schedule_steps; ++k) {
          const MethodId id = pick(rng);
          p = RiccatiStep(p, MethodById(sc.methods, id), dyn);
          ps = SwitchedStep(ps, id, gains, sc.methods, dyn);
          max_norm = std::max(max_norm, p.norm());
          switched = std::max(switched, ps.norm());
          excess = std::max(excess, p.trace() - ps.trace());
          if (p.norm() > bs) ++violations;
        }
        return std::vector<double>{double(run), bs, max_norm,
                                   double(violations), switched, excess};
      });
}

// |J_min - J_p| for qdp schedules on graphs of several sizes and for the
// static schedules, from random P0 in B0.
inline Table CostHistogram(const Scenario& sc) {
  const DiscretizedDynamics dyn = sc.Dynamics();
  const Ticks window = ToTicks(sc.cost.Tf, sc.model.dt_s);
  std::vector<int> sizes = sc.graph.sizes;
  if (sizes.empty()) sizes.push_back(sc.graph.samples);
  std::vector<CovarianceGraph> graphs;
  for (int n : sizes) graphs.push_back(BuildGraph(sc, dyn, n));
  const bool exhaustive = window / MinSteps(sc.methods) <= sc.sim.depth_cap;

  std::vector<std::string> cols{"run", "j_min"};
  for (const auto& m : sc.methods) {
    cols.push_back("j_static_" + std::to_string(m.id));
    cols.push_back("diff_static_" + std::to_string(m.id));
  }
  for (int n : sizes) {
    cols.push_back("j_qdp_" + std::to_string(n));
    cols.push_back("diff_qdp_" + std::to_string(n));
    cols.push_back("cpu_qdp_" + std::to_string(n));
  }
  return MonteCarlo(cols, sc.sim.runs, sc.sim.jobs, [&](int run) {
    const std::uint64_t seed = StreamSeed(sc.sim.seed, run, 0x7030ull);
    const Matrix p0 = SampleRegion(sc.model.nx(), sc.graph.B0, 1, seed)[0];
    double j_min;
    if (exhaustive) {
      ExactOptions opt;
      opt.depth_cap = sc.sim.depth_cap;
      j_min = DynProgExact(p0, sc.cost, sc.methods, dyn, opt).cost;
    } else {
      std::mt19937_64 rng(StreamSeed(seed, 0x726e64ull));
      j_min = std::numeric_limits<double>::infinity();
      for (int i = 0; i < sc.sim.random_schedules; ++i) {
        const Schedule s = RandomSchedule(
            rng, static_cast<int>(sc.methods.size()), sc.methods, window);
        j_min = std::min(j_min, EvaluateSchedule(p0, s, sc.cost, sc.methods, dyn));
      }
    }
    std::vector<double> row{double(run), j_min};
    for (const auto& m : sc.methods) {
      const double j = EvaluateSchedule(
          p0, Schedule::Static(m.id, sc.methods, window), sc.cost, sc.methods, dyn);
      row.push_back(j);
      row.push_back(std::abs(j_min - j));
    }
    for (const CovarianceGraph& g : graphs) {
      const QdpResult r = Qdp(Quantize(p0, g), sc.cost, g, sc.methods, dyn);
      const double j = EvaluateSchedule(p0, r.schedule, sc.cost, sc.methods, dyn);
      row.push_back(j);
      row.push_back(std::abs(j_min - j));
      row.push_back(r.schedule.CpuLoad(sc.methods, window));
    }
    return row;
  });
}

// Moving-horizon PLATE against the static schedules on simulated tracks.
inline Table MovingHorizon(const Scenario& sc) {
  const DiscretizedDynamics dyn = sc.Dynamics();
  const FineGrid fine(sc.model, AlignedStep(sc.model.dt_s, sc.sim.dt),
                      MaxSteps(sc.methods));
  CovarianceGraph graph;
  Policy policy;
  if (sc.sim.static_method) {
    std::tie(graph, policy) =
        StaticPolicy(*sc.sim.static_method, sc.methods, sc.model.nx(), sc.cost);
  } else {
    graph = BuildGraph(sc, dyn, sc.graph.samples);
    policy = PrecomputePolicy(graph, sc.cost, sc.methods, dyn);
  }
  std::vector<std::pair<CovarianceGraph, Policy>> statics;
  for (const auto& m : sc.methods)
    statics.push_back(StaticPolicy(m.id, sc.methods, sc.model.nx(), sc.cost));

  std::vector<std::string> cols{"run",       "cpu_load", "attention",
                                "avg_trace", "mse",      "J_empirical",
                                "occlusion_monotone"};
  for (const auto& m : sc.methods) {
    cols.push_back("avg_trace_static_" + std::to_string(m.id));
    cols.push_back("cpu_static_" + std::to_string(m.id));
  }
  return MonteCarlo(cols, sc.sim.runs, sc.sim.jobs, [&](int run) {
    const std::uint64_t seed = StreamSeed(sc.sim.seed, run);
    const SimTrace tr =
        RunScenario(sc, dyn, graph, policy, seed, sc.sim.adaptive_R, fine);
    bool monotone = true;
    for (const auto& [t1, t2] : sc.sim.occlusions) {
      const GridRecord* prev = nullptr;
      for (const GridRecord& g : tr.plate.grid) {
        if (g.t < t1 || g.t > t2) continue;
        if (prev && !(g.trace > prev->trace)) monotone = false;
        prev = &g;
      }
    }
    std::vector<double> row{double(run),
                            tr.metrics.cpu_load,
                            double(tr.metrics.attention),
                            tr.metrics.avg_trace,
                            tr.metrics.mse,
                            tr.metrics.J_empirical,
                            monotone ? 1.0 : 0.0};
    for (const auto& [g, p] : statics) {
      const SimTrace st = RunScenario(sc, dyn, g, p, seed, sc.sim.adaptive_R, fine);
      row.push_back(st.metrics.avg_trace);
      row.push_back(st.metrics.cpu_load);
    }
    return row;
  });
}

// Nominal-R versus adaptive-R corrections on identical measurement streams.
inline Table AdaptiveRComparison(const Scenario& sc) {
  const DiscretizedDynamics dyn = sc.Dynamics();
  const FineGrid fine(sc.model, AlignedStep(sc.model.dt_s, sc.sim.dt),
                      MaxSteps(sc.methods));
  CovarianceGraph graph;
  Policy policy;
  if (sc.sim.static_method) {
    std::tie(graph, policy) =
        StaticPolicy(*sc.sim.static_method, sc.methods, sc.model.nx(), sc.cost);
  } else {
    graph = BuildGraph(sc, dyn, sc.graph.samples);
    policy = PrecomputePolicy(graph, sc.cost, sc.methods, dyn);
  }
  return MonteCarlo(
      {"run", "mse_nominal", "mse_adaptive", "cpu_nominal", "cpu_adaptive"},
      sc.sim.runs, sc.sim.jobs, [&](int run) {
        const std::uint64_t seed = StreamSeed(sc.sim.seed, run);
        const SimTrace nominal = RunScenario(sc, dyn, graph, policy, seed, false, fine);
        const SimTrace adaptive = RunScenario(sc, dyn, graph, policy, seed, true, fine);
        return std::vector<double>{double(run), nominal.metrics.mse,
                                   adaptive.metrics.mse, nominal.metrics.cpu_load,
                                   adaptive.metrics.cpu_load};
      });
}

inline Table RunExperiment(const Scenario& sc) {
  if (sc.experiment == "bound-validation") return BoundValidation(sc);
  if (sc.experiment == "cost-histogram") return CostHistogram(sc);
  if (sc.experiment == "moving-horizon") return MovingHorizon(sc);
  if (sc.experiment == "adaptive-R") return AdaptiveRComparison(sc);
  throw Error(ErrorCode::kSchema, "unknown experiment '" + sc.experiment +
                                      "' (expected bound-validation, "
                                      "cost-histogram, moving-horizon or "
                                      "adaptive-R)");
}

}  // namespace plate

#endif  // PLATE_SIMKIT_H_
