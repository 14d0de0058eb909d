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

#ifndef PLATE_IO_H_
#define PLATE_IO_H_

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "plate/bounds.h"
#include "plate/covgraph.h"
#include "plate/qdp.h"
#include "plate/schedule.h"
#include "plate/simkit.h"
#include "plate/types.h"

namespace plate {

using Json = nlohmann::json;

namespace internal {

[[noreturn]] inline void SchemaError(const std::string& path,
                                     const std::string& msg) {
  throw Error(ErrorCode::kSchema, path + ": " + msg);
}

inline const Json& Require(const Json& obj, const std::string& key,
                           const std::string& path) {
  if (!obj.is_object()) SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(path + "." + key, "missing required field");
  return *it;
}

inline double ReadNumber(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    // "a/b" fractions, e.g. "1/30" for a 30 Hz sensor.
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
    }
  }
  SchemaError(path, "expected a number");
}

inline double NumberOr(const Json& obj, const std::string& key, double dflt,
                       const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return dflt;
  return ReadNumber(*it, path + "." + key);
}

inline std::int64_t IntOr(const Json& obj, const std::string& key,
                          std::int64_t dflt, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return dflt;
  if (!it->is_number_integer()) SchemaError(path + "." + key, "expected an integer");
  return it->get<std::int64_t>();
}

inline Vector ReadVector(const Json& j, const std::string& path) {
  if (!j.is_array()) SchemaError(path, "expected an array of numbers");
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<int>(i)) = ReadNumber(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// Row-major nested arrays; a bare number is a 1x1 matrix.
inline Matrix ReadMatrix(const Json& j, const std::string& path) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) SchemaError(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) SchemaError(path + "[0]", "expected a non-empty row array");
  Matrix m(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols)
      SchemaError(rp, "row length differs from row 0");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<int>(r), static_cast<int>(c)) =
          ReadNumber(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline void ExpectShape(const Matrix& m, int rows, int cols,
                        const std::string& path) {
  if (m.rows() != rows || m.cols() != cols)
    throw Error(ErrorCode::kInvalidModel,
                path + ": expected " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()));
}

}  // namespace internal

inline Json MatrixToJson(const Matrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ContinuousModel ParseModel(const Json& j, const std::string& path = "model") {
  using namespace internal;
  ContinuousModel m;
  m.A = ReadMatrix(Require(j, "A", path), path + ".A");
  const int nx = static_cast<int>(m.A.rows());
  m.B = j.contains("B") ? ReadMatrix(j["B"], path + ".B") : Matrix::Identity(nx, nx);
  m.W = ReadMatrix(Require(j, "W", path), path + ".W");
  m.C = ReadMatrix(Require(j, "C", path), path + ".C");
  m.x0 = j.contains("x0") ? ReadVector(j["x0"], path + ".x0") : Vector::Zero(nx);
  m.P0 = j.contains("P0") ? ReadMatrix(j["P0"], path + ".P0") : Matrix::Identity(nx, nx);
  m.dt_s = ReadNumber(Require(j, "dt_s", path), path + ".dt_s");
  ExpectShape(m.A, nx, nx, path + ".A");
  ExpectShape(m.B, nx, static_cast<int>(m.B.cols()), path + ".B");
  ExpectShape(m.W, static_cast<int>(m.B.cols()), static_cast<int>(m.B.cols()), path + ".W");
  ExpectShape(m.C, static_cast<int>(m.C.rows()), nx, path + ".C");
  ExpectShape(m.P0, nx, nx, path + ".P0");
  if (m.x0.size() != nx)
    throw Error(ErrorCode::kInvalidModel, path + ".x0: expected n_x entries");
  Validate(m);
  return m;
}

inline std::vector<PerceptionMethod> ParseMethods(const Json& j,
                                                  const ContinuousModel& model,
                                                  const std::string& path = "methods") {
  using namespace internal;
  if (!j.is_array() || j.empty()) SchemaError(path, "expected a non-empty array");
  std::vector<PerceptionMethod> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& mj = j[i];
    if (!mj.is_object()) SchemaError(p, "expected an object");
    PerceptionMethod m;
    m.id = static_cast<MethodId>(i + 1);
    m.steps = static_cast<int>(IntOr(mj, "steps", 0, p));
    if (m.steps < 1) SchemaError(p + ".steps", "expected an integer >= 1");
    m.R = ReadMatrix(Require(mj, "R", p), p + ".R");
    ExpectShape(m.R, model.nz(), model.nz(), p + ".R");
    m.cpu = NumberOr(mj, "cpu", 1.0, p);
    if (mj.contains("penalty")) {
      m.penalty = ReadNumber(mj["penalty"], p + ".penalty");
    } else if (mj.contains("lambda_load") || mj.contains("lambda_att")) {
      m.penalty = LoadAttentionPenalty(NumberOr(mj, "lambda_load", 0.0, p),
                                       NumberOr(mj, "lambda_att", 0.0, p),
                                       m.cpu, m.steps * model.dt_s);
    } else {
      m.penalty = m.cpu * m.steps * model.dt_s;
    }
    out.push_back(std::move(m));
  }
  Validate(std::span<const PerceptionMethod>(out), model.nz());
  return out;
}

inline LyapunovCertificate ParseCertificate(const Json& j,
                                            const std::string& path = "certificate") {
  using namespace internal;
  LyapunovCertificate c;
  c.Omega = ReadMatrix(Require(j, "Omega", path), path + ".Omega");
  const Json& ys = Require(j, "Y", path);
  if (!ys.is_array()) SchemaError(path + ".Y", "expected an array of matrices");
  for (std::size_t i = 0; i < ys.size(); ++i)
    c.Y.push_back(ReadMatrix(ys[i], path + ".Y[" + std::to_string(i) + "]"));
  c.gamma = ReadNumber(Require(j, "gamma", path), path + ".gamma");
  return c;
}

inline Json CertificateToJson(const LyapunovCertificate& c) {
  Json ys = Json::array();
  for (const Matrix& y : c.Y) ys.push_back(MatrixToJson(y));
  return Json{{"Omega", MatrixToJson(c.Omega)}, {"Y", ys}, {"gamma", c.gamma}};
}

inline Scenario ParseScenario(const Json& j) {
  using namespace internal;
  if (!j.is_object()) SchemaError("$", "expected a JSON object");
  Scenario sc;
  sc.model = ParseModel(Require(j, "model", "$"));
  sc.methods = ParseMethods(Require(j, "methods", "$"), sc.model);
  if (j.contains("cost")) {
    const Json& c = j["cost"];
    sc.cost.Tf = NumberOr(c, "Tf", sc.cost.Tf, "cost");
    sc.cost.lambda_alpha = NumberOr(c, "lambda_alpha", sc.cost.lambda_alpha, "cost");
  }
  if (j.contains("graph")) {
    const Json& g = j["graph"];
    sc.graph.B0 = NumberOr(g, "B0", sc.graph.B0, "graph");
    sc.graph.samples = static_cast<int>(IntOr(g, "samples", sc.graph.samples, "graph"));
    sc.graph.seed = static_cast<std::uint64_t>(IntOr(g, "seed", 1, "graph"));
    if (g.contains("admit_tol") && !g["admit_tol"].is_null())
      sc.graph.admit_tol = ReadNumber(g["admit_tol"], "graph.admit_tol");
    if (g.contains("expand")) sc.graph.expand = g["expand"].get<bool>();
    if (g.contains("sizes")) {
      for (std::size_t i = 0; i < g["sizes"].size(); ++i) {
        if (!g["sizes"][i].is_number_integer())
          SchemaError("graph.sizes[" + std::to_string(i) + "]", "expected an integer");
        sc.graph.sizes.push_back(g["sizes"][i].get<int>());
      }
    }
  }
  if (j.contains("sim")) {
    const Json& s = j["sim"];
    SimSpec& sim = sc.sim;
    sim.dt = NumberOr(s, "dt", sim.dt, "sim");
    sim.horizon = NumberOr(s, "horizon", sim.horizon, "sim");
    sim.seed = static_cast<std::uint64_t>(IntOr(s, "seed", 1, "sim"));
    sim.runs = static_cast<int>(IntOr(s, "runs", sim.runs, "sim"));
    sim.jobs = static_cast<int>(IntOr(s, "jobs", sim.jobs, "sim"));
    sim.window = static_cast<int>(IntOr(s, "window", sim.window, "sim"));
    sim.schedule_steps = static_cast<int>(IntOr(s, "schedule_steps", sim.schedule_steps, "sim"));
    sim.random_schedules =
        static_cast<int>(IntOr(s, "random_schedules", sim.random_schedules, "sim"));
    sim.depth_cap = static_cast<int>(IntOr(s, "depth_cap", sim.depth_cap, "sim"));
    sim.gamma = NumberOr(s, "gamma", sim.gamma, "sim");
    if (s.contains("adaptive_R")) sim.adaptive_R = s["adaptive_R"].get<bool>();
    if (s.contains("static_method") && !s["static_method"].is_null())
      sim.static_method = static_cast<MethodId>(IntOr(s, "static_method", 1, "sim"));
    if (s.contains("occlusions")) {
      const Json& occ = s["occlusions"];
      for (std::size_t i = 0; i < occ.size(); ++i) {
        const std::string p = "sim.occlusions[" + std::to_string(i) + "]";
        if (!occ[i].is_array() || occ[i].size() != 2) SchemaError(p, "expected [t1, t2]");
        sim.occlusions.emplace_back(ReadNumber(occ[i][0], p + "[0]"),
                                    ReadNumber(occ[i][1], p + "[1]"));
      }
    }
    if (s.contains("true_R")) {
      const Json& tr = s["true_R"];
      if (!tr.is_array() || tr.size() != sc.methods.size())
        SchemaError("sim.true_R", "expected one entry (matrix or null) per method");
      for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr[i].is_null()) {
          sim.true_R.emplace_back();
        } else {
          const std::string p = "sim.true_R[" + std::to_string(i) + "]";
          Matrix r = ReadMatrix(tr[i], p);
          ExpectShape(r, sc.model.nz(), sc.model.nz(), p);
          sim.true_R.emplace_back(std::move(r));
        }
      }
    }
    if (sim.runs < 1) SchemaError("sim.runs", "expected >= 1");
  }
  if (j.contains("certificate") && !j["certificate"].is_null()) {
    sc.certificate = ParseCertificate(j["certificate"]);
    Validate(*sc.certificate, sc.methods, sc.model.nx(), sc.model.nz());
  }
  if (j.contains("experiment")) sc.experiment = j["experiment"].get<std::string>();
  return sc;
}

inline Json LoadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
}

inline void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Graph + policy container. Representatives are row-major arrays, edges are
// (q, method id, q') triples with 0-based node ids.

inline constexpr int kGraphFormatVersion = 1;

inline Json GraphToJson(const CovarianceGraph& g, const Policy* policy = nullptr) {
  Json reps = Json::array();
  for (const Matrix& r : g.reps) {
    Json flat = Json::array();
    for (int i = 0; i < r.rows(); ++i)
      for (int k = 0; k < r.cols(); ++k) flat.push_back(r(i, k));
    reps.push_back(std::move(flat));
  }
  Json edges = Json::array();
  for (NodeId q = 0; q < g.size(); ++q)
    for (MethodId id = 1; id <= g.num_methods; ++id)
      edges.push_back(Json::array({q, id, g.Successor(q, id)}));
  Json out{{"format", "plate-graph"},
           {"version", kGraphFormatVersion},
           {"n_x", g.reps.empty() ? 0 : g.reps[0].rows()},
           {"num_methods", g.num_methods},
           {"delta", g.delta},
           {"B0", g.B0},
           {"B", g.B},
           {"initial_count", g.initial_count},
           {"reps", std::move(reps)},
           {"edges", std::move(edges)}};
  if (policy) {
    out["policy"] = Json{{"Tf", policy->cost.Tf},
                         {"lambda_alpha", policy->cost.lambda_alpha},
                         {"table", policy->table},
                         {"cost_to_go", policy->cost_to_go}};
  }
  return out;
}

struct GraphFile {
  CovarianceGraph graph;
  std::optional<Policy> policy;
};

inline GraphFile GraphFromJson(const Json& j) {
  using namespace internal;
  if (!j.is_object() || j.value("format", "") != "plate-graph")
    SchemaError("$.format", "not a plate-graph file");
  if (j.value("version", 0) != kGraphFormatVersion)
    SchemaError("$.version", "unsupported version");
  GraphFile f;
  CovarianceGraph& g = f.graph;
  const int nx = static_cast<int>(IntOr(j, "n_x", 0, "$"));
  g.num_methods = static_cast<int>(IntOr(j, "num_methods", 0, "$"));
  g.delta = NumberOr(j, "delta", 0.0, "$");
  g.B0 = NumberOr(j, "B0", 0.0, "$");
  g.B = NumberOr(j, "B", 0.0, "$");
  g.initial_count = static_cast<int>(IntOr(j, "initial_count", 0, "$"));
  const Json& reps = Require(j, "reps", "$");
  for (std::size_t q = 0; q < reps.size(); ++q) {
    const std::string p = "$.reps[" + std::to_string(q) + "]";
    if (!reps[q].is_array() || reps[q].size() != static_cast<std::size_t>(nx) * nx)
      SchemaError(p, "expected n_x*n_x numbers");
    Matrix r(nx, nx);
    for (int i = 0; i < nx; ++i)
      for (int k = 0; k < nx; ++k) r(i, k) = reps[q][static_cast<std::size_t>(i * nx + k)].get<double>();
    g.reps.push_back(std::move(r));
  }
  g.succ.assign(g.reps.size() * static_cast<std::size_t>(g.num_methods), -1);
  const Json& edges = Require(j, "edges", "$");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string p = "$.edges[" + std::to_string(e) + "]";
    if (!edges[e].is_array() || edges[e].size() != 3) SchemaError(p, "expected [q, method, q']");
    const int q = edges[e][0].get<int>();
    const int id = edges[e][1].get<int>();
    const int to = edges[e][2].get<int>();
    if (q < 0 || q >= g.size() || id < 1 || id > g.num_methods || to < 0 || to >= g.size())
      SchemaError(p, "edge out of range");
    g.succ[static_cast<std::size_t>(q) * g.num_methods + (id - 1)] = to;
  }
  if (!g.Closed()) SchemaError("$.edges", "graph is not closed");
  if (j.contains("policy")) {
    const Json& pj = j["policy"];
    Policy p;
    p.cost.Tf = NumberOr(pj, "Tf", 1.0, "$.policy");
    p.cost.lambda_alpha = NumberOr(pj, "lambda_alpha", 1.0, "$.policy");
    p.table = pj.at("table").get<std::vector<MethodId>>();
    if (pj.contains("cost_to_go")) p.cost_to_go = pj["cost_to_go"].get<std::vector<double>>();
    if (p.size() != g.size()) SchemaError("$.policy.table", "expected one entry per node");
    f.policy = std::move(p);
  }
  return f;
}

inline Json ScheduleToJson(const Schedule& s, const CostBreakdown& cost,
                           std::span<const PerceptionMethod> methods,
                           const CostSpec& spec, double dt_s) {
  const Ticks window = ToTicks(spec.Tf, dt_s);
  Json epochs = Json::array();
  for (Ticks tau : s.Epochs(methods)) epochs.push_back(tau * dt_s);
  epochs.erase(epochs.end() - 1);
  return Json{{"methods", s.methods},
              {"epochs_s", epochs},
              {"Tf", spec.Tf},
              {"lambda_alpha", spec.lambda_alpha},
              {"cost", {{"total", cost.total},
                        {"covariance", cost.covariance},
                        {"penalty", cost.penalty}}},
              {"attention", s.Attention(methods, window)},
              {"cpu_load", s.CpuLoad(methods, window)}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string TableToCsv(const Table& t) {
  std::ostringstream out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << ",status\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.rows[r].size(); ++c)
      out << (c ? "," : "") << FormatNumber(t.rows[r][c]);
    std::string status = t.errors[r].empty() ? "ok" : t.errors[r];
    for (char& ch : status) {
      if (ch == '"' || ch == ',' || ch == '\n') ch = ' ';
    }
    out << "," << status << "\n";
  }
  return out.str();
}

// Per sampling-grid point: t, true state, estimate, tr(P), method, flag.
inline std::string TraceToCsv(const SimTrace& trace) {
  std::ostringstream out;
  const int nx = trace.plate.grid.empty() ? 0 : static_cast<int>(trace.plate.grid[0].xhat.size());
  out << "t";
  for (int i = 0; i < nx; ++i) out << ",x" << i;
  for (int i = 0; i < nx; ++i) out << ",xhat" << i;
  out << ",trace_P,method,measured,sq_err\n";
  for (const GridRecord& g : trace.plate.grid) {
    const Vector& x = trace.truth.AtTick(g.tick);
    out << FormatNumber(g.t);
    for (int i = 0; i < nx; ++i) out << "," << FormatNumber(x(i));
    for (int i = 0; i < nx; ++i) out << "," << FormatNumber(g.xhat(i));
    out << "," << FormatNumber(g.trace) << "," << g.method << ","
        << (g.measured ? 1 : 0) << "," << FormatNumber((g.xhat - x).squaredNorm())
        << "\n";
  }
  return out.str();
}

}  // namespace plate

#endif  // PLATE_IO_H_
