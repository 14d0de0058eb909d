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

#ifndef PLATE_TYPES_H_
#define PLATE_TYPES_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace plate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// 1-based perception method identifier, as used in schedules and files.
using MethodId = int;
// 0-based index of a covariance representative in a CovarianceGraph.
using NodeId = int;
// Integer count of sampling periods.
using Ticks = std::int64_t;

enum class ErrorCode {
  kInvalidModel,
  kInvalidArgument,
  kSingularUpdate,
  kNotPsd,
  kIncompleteSchedule,
  kExplosionGuard,
  kEmptyGraph,
  kNonTermination,
  kInfeasibleCertificate,
  kUnreachable,
  kSchema,
  kIo,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidModel: return "invalid-model";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kSingularUpdate: return "singular-update";
    case ErrorCode::kNotPsd: return "not-psd";
    case ErrorCode::kIncompleteSchedule: return "incomplete-schedule";
    case ErrorCode::kExplosionGuard: return "explosion-guard";
    case ErrorCode::kEmptyGraph: return "empty-graph";
    case ErrorCode::kNonTermination: return "non-termination";
    case ErrorCode::kInfeasibleCertificate: return "infeasible-certificate";
    case ErrorCode::kUnreachable: return "unreachable";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline bool AllFinite(const Matrix& m) { return m.allFinite(); }

inline Matrix Symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline bool IsSymmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.transpose()).norm() <= rel_tol * scale;
}

inline double MinEigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline bool IsPsd(const Matrix& sym, double rel_tol = 1e-10) {
  return MinEigenvalue(Symmetrize(sym)) >= -rel_tol * sym.norm();
}

// Symmetrizes `p` and removes eigenvalues in [-rel_tol*|p|_F, 0). Anything
// more negative is a hard error: it means the model is being misused.
inline Matrix ProjectCovariance(const Matrix& p, double rel_tol = 1e-10) {
  Matrix s = Symmetrize(p);
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double min_eig = es.eigenvalues()(0);
  if (min_eig >= 0.0) return s;
  if (min_eig < -rel_tol * s.norm()) {
    throw Error(ErrorCode::kNotPsd,
                "covariance has eigenvalue " + std::to_string(min_eig));
  }
  const Vector clamped = es.eigenvalues().cwiseMax(0.0);
  return Symmetrize(es.eigenvectors() * clamped.asDiagonal() *
                    es.eigenvectors().transpose());
}

// Square-root factor F with F*F^T = m for a PSD m (possibly singular).
inline Matrix PsdFactor(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(m));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

// The target SDE dx = A x dt + B dw with cov{w(s), w(r)} = W min(s, r),
// measured through C, with x(0) ~ N(x0, P0) and raw sensor period dt_s.
struct ContinuousModel {
  Matrix A;
  Matrix B;
  Matrix W;
  Matrix C;
  Vector x0;
  Matrix P0;
  double dt_s = 0.0;

  int nx() const { return static_cast<int>(A.rows()); }
  int nz() const { return static_cast<int>(C.rows()); }
  int nw() const { return static_cast<int>(B.cols()); }

  // BWB^T, the diffusion rate of the state.
  Matrix Diffusion() const { return B * W * B.transpose(); }
};

inline int ObservabilityRank(const Matrix& a, const Matrix& c) {
  const int n = static_cast<int>(a.rows());
  Matrix obs(c.rows() * n, n);
  Matrix block = c;
  for (int i = 0; i < n; ++i) {
    obs.middleRows(i * c.rows(), c.rows()) = block;
    block = block * a;
  }
  Eigen::JacobiSVD<Matrix> svd(obs);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double threshold = 1e-9 * sv(0);
  return static_cast<int>((sv.array() > threshold).count());
}

inline void ValidatePsd(const Matrix& m, const std::string& name,
                        ErrorCode code) {
  if (!IsSymmetric(m)) throw Error(code, name + " is not symmetric");
  if (MinEigenvalue(Symmetrize(m)) < -1e-10 * m.norm()) {
    throw Error(code, name + " is not positive semi-definite");
  }
}

inline void Validate(const ContinuousModel& m) {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidModel, msg);
  };
  const int nx = m.nx();
  if (nx == 0 || m.A.cols() != nx) fail("A must be square and non-empty");
  if (m.B.rows() != nx) fail("B must have n_x rows");
  if (m.W.rows() != m.B.cols() || m.W.cols() != m.B.cols())
    fail("W must be n_w x n_w");
  if (m.C.cols() != nx || m.C.rows() == 0) fail("C must be n_z x n_x");
  if (m.x0.size() != nx) fail("x0 must have n_x entries");
  if (m.P0.rows() != nx || m.P0.cols() != nx) fail("P0 must be n_x x n_x");
  if (!AllFinite(m.A) || !AllFinite(m.B) || !AllFinite(m.W) ||
      !AllFinite(m.C) || !m.x0.allFinite() || !AllFinite(m.P0))
    fail("model has non-finite entries");
  if (!(m.dt_s > 0.0) || !std::isfinite(m.dt_s)) fail("dt_s must be > 0");
  ValidatePsd(m.W, "W", ErrorCode::kInvalidModel);
  ValidatePsd(m.P0, "P0", ErrorCode::kInvalidModel);
  if (ObservabilityRank(m.A, m.C) != nx) fail("(A, C) is not observable");
}

// One perception configuration: latency steps * dt_s, nominal noise R,
// CPU fraction and cost penalty.
struct PerceptionMethod {
  MethodId id = 1;
  int steps = 1;
  Matrix R;
  double cpu = 1.0;
  double penalty = 0.0;
};

// r = lambda_load * f * latency + lambda_att.
inline double LoadAttentionPenalty(double lambda_load, double lambda_att,
                                   double cpu, double latency_s) {
  return lambda_load * cpu * latency_s + lambda_att;
}

inline void Validate(std::span<const PerceptionMethod> methods, int nz) {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto& m = methods[i];
    const std::string tag = "method " + std::to_string(i + 1);
    if (m.id != static_cast<int>(i) + 1)
      throw Error(ErrorCode::kInvalidArgument,
                  tag + ": ids must be 1..D in order");
    if (m.steps < 1)
      throw Error(ErrorCode::kInvalidArgument, tag + ": steps must be >= 1");
    if (m.R.rows() != nz || m.R.cols() != nz)
      throw Error(ErrorCode::kInvalidArgument, tag + ": R must be n_z x n_z");
    ValidatePsd(m.R, tag + " R", ErrorCode::kInvalidArgument);
    if (!(m.cpu > 0.0 && m.cpu <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, tag + ": cpu must be in (0,1]");
    if (!(m.penalty >= 0.0))
      throw Error(ErrorCode::kInvalidArgument, tag + ": penalty must be >= 0");
  }
}

inline const PerceptionMethod& MethodById(
    std::span<const PerceptionMethod> methods, MethodId id) {
  if (id < 1 || id > static_cast<int>(methods.size()))
    throw Error(ErrorCode::kInvalidArgument,
                "unknown method id " + std::to_string(id));
  return methods[static_cast<std::size_t>(id - 1)];
}

inline int MaxSteps(std::span<const PerceptionMethod> methods) {
  int s = 0;
  for (const auto& m : methods) s = std::max(s, m.steps);
  return s;
}

inline int MinSteps(std::span<const PerceptionMethod> methods) {
  int s = 0;
  for (const auto& m : methods) s = (s == 0) ? m.steps : std::min(s, m.steps);
  return s;
}

// Converts a duration in seconds to whole sampling periods. Durations at
// public boundaries must sit on the dt_s grid.
inline Ticks ToTicks(double seconds, double dt_s) {
  const double ratio = seconds / dt_s;
  const double rounded = std::round(ratio);
  if (!std::isfinite(ratio) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw Error(ErrorCode::kInvalidArgument,
                "duration " + std::to_string(seconds) +
                    " s is not a multiple of the sampling period");
  }
  return static_cast<Ticks>(rounded);
}

}  // namespace plate

#endif  // PLATE_TYPES_H_
