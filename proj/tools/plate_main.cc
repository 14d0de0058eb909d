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

// plate: command-line front end.
//
//   plate build-graph    --config s.json --out graph.json
//   plate schedule-exact --config s.json --out schedule.json
//   plate schedule-qdp   --config s.json --out schedule.json [--graph graph.json]
//   plate bound-check    --config s.json --out bound.json
//   plate simulate       --config s.json --out trace.csv
//   plate mc-eval        --config s.json --out table.csv
//
// Exit status: 0 success, 1 validation error, 2 runtime error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plate/plate.h"

namespace {

using plate::ErrorCode;

struct Options {
  std::string config;
  std::string out;
  std::string graph;
  std::optional<double> tf;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> jobs;
};

plate::Scenario LoadScenario(const Options& o) {
  plate::Scenario sc = plate::ParseScenario(plate::LoadJson(o.config));
  if (o.tf) sc.cost.Tf = *o.tf;
  if (o.seed) sc.sim.seed = *o.seed;
  if (o.runs) sc.sim.runs = *o.runs;
  if (o.jobs) sc.sim.jobs = *o.jobs;
  if (!(sc.cost.Tf > 0.0))
    throw plate::Error(ErrorCode::kInvalidArgument, "Tf must be > 0");
  if (sc.sim.runs < 1 || sc.sim.jobs < 1)
    throw plate::Error(ErrorCode::kInvalidArgument, "runs and jobs must be >= 1");
  plate::ToTicks(sc.cost.Tf, sc.model.dt_s);
  return sc;
}

// Graph for the scheduling commands: --graph file when given, else built
// from the config.
plate::CovarianceGraph GraphFor(const Options& o, const plate::Scenario& sc,
                                const plate::DiscretizedDynamics& dyn) {
  if (o.graph.empty()) return plate::BuildGraph(sc, dyn, sc.graph.samples);
  plate::GraphFile f = plate::GraphFromJson(plate::LoadJson(o.graph));
  if (!f.graph.reps.empty() && f.graph.reps[0].rows() != sc.model.nx())
    throw plate::Error(ErrorCode::kInvalidModel,
                       "graph dimension does not match the model");
  return std::move(f.graph);
}

void Dump(const std::string& path, const plate::Json& j) {
  plate::WriteText(path, j.dump(2) + "\n");
}

int BuildGraphCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::DiscretizedDynamics dyn = sc.Dynamics();
  const plate::CovarianceGraph g = plate::BuildGraph(sc, dyn, sc.graph.samples);
  const plate::Policy policy = plate::PrecomputePolicy(g, sc.cost, sc.methods, dyn);
  Dump(o.out, plate::GraphToJson(g, &policy));
  std::cerr << "graph: " << g.size() << " nodes (" << g.initial_count
            << " sampled), delta=" << g.delta << "\n";
  return 0;
}

int ScheduleExactCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::DiscretizedDynamics dyn = sc.Dynamics();
  plate::ExactOptions opt;
  opt.depth_cap = sc.sim.depth_cap;
  const plate::ExactResult r =
      plate::DynProgExact(sc.model.P0, sc.cost, sc.methods, dyn, opt);
  const plate::CostBreakdown cost = plate::EvaluateScheduleBreakdown(
      sc.model.P0, r.schedule, sc.cost, sc.methods, dyn);
  plate::Json j =
      plate::ScheduleToJson(r.schedule, cost, sc.methods, sc.cost, sc.model.dt_s);
  j["solver"] = "exact";
  j["calls"] = r.calls;
  Dump(o.out, j);
  return 0;
}

int ScheduleQdpCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::DiscretizedDynamics dyn = sc.Dynamics();
  const plate::CovarianceGraph g = GraphFor(o, sc, dyn);
  const plate::NodeId q0 = plate::Quantize(sc.model.P0, g);
  const plate::QdpResult r = plate::Qdp(q0, sc.cost, g, sc.methods, dyn);
  const plate::CostBreakdown cost = plate::EvaluateScheduleBreakdown(
      sc.model.P0, r.schedule, sc.cost, sc.methods, dyn);
  plate::Json j =
      plate::ScheduleToJson(r.schedule, cost, sc.methods, sc.cost, sc.model.dt_s);
  j["solver"] = "qdp";
  j["start_node"] = q0;
  j["quantized_cost"] = r.cost;
  j["relaxations"] = r.relaxations;
  j["graph_nodes"] = g.size();
  Dump(o.out, j);
  return 0;
}

int BoundCheckCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::DiscretizedDynamics dyn = sc.Dynamics();
  std::optional<plate::LyapunovCertificate> cert = sc.certificate;
  const bool synthesized = !cert;
  if (!cert) cert = plate::SynthesizeCertificate(sc.methods, dyn, sc.sim.gamma);
  if (!cert)
    throw plate::Error(ErrorCode::kInfeasibleCertificate,
                       "no certificate in config and synthesis failed");
  const plate::LmiCheck check = plate::LmiFeasible(*cert, sc.methods, dyn);
  plate::Json j{{"feasible", check.feasible},
                {"margin", check.margin},
                {"per_method", check.per_method},
                {"synthesized", synthesized},
                {"B0", sc.graph.B0},
                {"certificate", plate::CertificateToJson(*cert)}};
  if (check.feasible) {
    j["Gbar"] = plate::GainNoiseBound(*cert, sc.methods, dyn);
    j["B_s"] = plate::BoundBs(*cert, sc.graph.B0, sc.methods, dyn);
  } else {
    j["B_s"] = nullptr;
  }
  Dump(o.out, j);
  return 0;
}

int SimulateCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::DiscretizedDynamics dyn = sc.Dynamics();
  plate::CovarianceGraph g;
  plate::Policy policy;
  if (sc.sim.static_method) {
    std::tie(g, policy) = plate::StaticPolicy(*sc.sim.static_method, sc.methods,
                                              sc.model.nx(), sc.cost);
  } else if (!o.graph.empty()) {
    plate::GraphFile f = plate::GraphFromJson(plate::LoadJson(o.graph));
    g = GraphFor(o, sc, dyn);
    // A stored policy is reused only when it was built for the same cost.
    if (f.policy && f.policy->cost.Tf == sc.cost.Tf &&
        f.policy->cost.lambda_alpha == sc.cost.lambda_alpha) {
      policy = std::move(*f.policy);
    } else {
      policy = plate::PrecomputePolicy(g, sc.cost, sc.methods, dyn);
    }
  } else {
    g = GraphFor(o, sc, dyn);
    policy = plate::PrecomputePolicy(g, sc.cost, sc.methods, dyn);
  }
  const plate::FineGrid fine(sc.model, plate::AlignedStep(sc.model.dt_s, sc.sim.dt),
                             plate::MaxSteps(sc.methods));
  const plate::SimTrace tr =
      plate::RunScenario(sc, dyn, g, policy, sc.sim.seed, sc.sim.adaptive_R, fine);
  plate::WriteText(o.out, plate::TraceToCsv(tr));
  std::cerr << "cpu_load=" << tr.metrics.cpu_load
            << " attention=" << tr.metrics.attention
            << " avg_trace=" << tr.metrics.avg_trace << " mse=" << tr.metrics.mse
            << "\n";
  return 0;
}

int McEvalCmd(const Options& o) {
  const plate::Scenario sc = LoadScenario(o);
  const plate::Table t = plate::RunExperiment(sc);
  plate::WriteText(o.out, plate::TableToCsv(t));
  int failed = 0;
  for (const std::string& e : t.errors) failed += e.empty() ? 0 : 1;
  if (failed) std::cerr << failed << " of " << t.rows.size() << " runs failed\n";
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidModel:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kSchema:
    case ErrorCode::kIncompleteSchedule:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLATE perception-latency scheduling tools"};
  app.require_subcommand(1);
  Options o;
  int (*handler)(const Options&) = nullptr;

  const auto add = [&](const std::string& name, const std::string& help,
                       int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config, "scenario JSON")->required();
    sub->add_option("-o,--out", o.out, "output path")->required();
    sub->add_option("--Tf", o.tf, "scheduling window in seconds");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--runs", o.runs, "Monte-Carlo runs");
    sub->add_option("--jobs", o.jobs, "worker threads");
    sub->callback([&handler, fn] { handler = fn; });
    return sub;
  };
  add("build-graph", "sample, expand and save the covariance graph + policy",
      BuildGraphCmd);
  add("schedule-exact", "exhaustive optimal schedule from P0", ScheduleExactCmd);
  add("schedule-qdp", "quantized DP schedule from P0", ScheduleQdpCmd)
      ->add_option("-g,--graph", o.graph, "graph file from build-graph");
  add("bound-check", "LMI feasibility margin and covariance bound", BoundCheckCmd);
  add("simulate", "one simulated moving-horizon run, trace CSV", SimulateCmd)
      ->add_option("-g,--graph", o.graph, "graph file from build-graph");
  add("mc-eval", "Monte-Carlo experiment, aggregate CSV", McEvalCmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    return handler(o);
  } catch (const plate::Error& e) {
    std::cerr << "plate: " << e.what()
              << "\n";
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "plate: schema: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "plate: " << e.what() << "\n";
    return 2;
  }
}
