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

#ifndef PLATE_ESTIMATOR_H_
#define PLATE_ESTIMATOR_H_

#include <optional>
#include <span>

#include "plate/dynamics.h"
#include "plate/types.h"

namespace plate {

struct BeliefState {
  double t = 0.0;
  Vector xhat;
  Matrix Phat;
};

struct Measurement {
  std::int64_t k = 0;
  Vector z;
  double produced_at = 0.0;  // capture time + latency
  MethodId method_id = 1;
  std::optional<Matrix> R_actual;
};

// Open-loop prediction with a precomputed transition.
inline BeliefState Predict(const BeliefState& belief, const Transition& tr,
                           double elapsed) {
  BeliefState out;
  out.t = belief.t + elapsed;
  out.xhat = tr.Ad * belief.xhat;
  out.Phat = Symmetrize(tr.Ad * belief.Phat * tr.Ad.transpose() + tr.Wd);
  return out;
}

inline BeliefState Predict(const BeliefState& belief, Ticks elapsed,
                           const DiscretizedDynamics& dyn) {
  return Predict(belief, dyn.transition(elapsed), elapsed * dyn.dt_s());
}

// Off-grid prediction (e.g. at simulation sub-steps).
inline BeliefState PredictSeconds(const BeliefState& belief, double elapsed,
                                  const ContinuousModel& model) {
  return Predict(belief, Discretize(model, elapsed), elapsed);
}

// Cholesky factor of the innovation covariance; rejects (near) singular S.
inline Eigen::LLT<Matrix> FactorInnovation(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(s),
                                           Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw Error(ErrorCode::kSingularUpdate,
                "innovation covariance is singular (eigenvalues " +
                    std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
  Eigen::LLT<Matrix> llt(Symmetrize(s));
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::kSingularUpdate, "innovation Cholesky failed");
  return llt;
}

// Predictor gain L = Ad P C^T (C P C^T + R)^-1.
inline Matrix KalmanGain(const Matrix& p, const Matrix& ad, const Matrix& c,
                         const Matrix& r) {
  const auto llt = FactorInnovation(c * p * c.transpose() + r);
  // L^T = S^-1 (C P Ad^T), S symmetric.
  return llt.solve(c * p * ad.transpose()).transpose();
}

// Joseph-form covariance recursion with gain L:
// (Ad - L C) P (Ad - L C)^T + L R L^T + Wd.
inline Matrix JosephUpdate(const Matrix& p, const Matrix& gain,
                           const Transition& tr, const Matrix& c,
                           const Matrix& r) {
  const Matrix lambda = tr.Ad - gain * c;
  return lambda * p * lambda.transpose() + gain * r * gain.transpose() + tr.Wd;
}

// Covariance half of the combined predict-correct step.
inline Matrix RiccatiStep(const Matrix& p, const PerceptionMethod& method,
                          const DiscretizedDynamics& dyn,
                          const Matrix* r_override = nullptr) {
  const Transition& tr = dyn.transition(method.steps);
  const Matrix& c = dyn.model().C;
  const Matrix& r = r_override ? *r_override : method.R;
  const Matrix gain = KalmanGain(p, tr.Ad, c, r);
  return ProjectCovariance(JosephUpdate(p, gain, tr, c, r));
}

// One combined predict-correct step from the epoch start tau_k to
// tau_k + latency, using z[k] captured at tau_k.
inline BeliefState Correct(const BeliefState& belief, const Measurement& meas,
                           const PerceptionMethod& method,
                           const DiscretizedDynamics& dyn) {
  const Transition& tr = dyn.transition(method.steps);
  const Matrix& c = dyn.model().C;
  const Matrix& r = meas.R_actual ? *meas.R_actual : method.R;
  const Matrix gain = KalmanGain(belief.Phat, tr.Ad, c, r);
  BeliefState out;
  out.t = belief.t + method.steps * dyn.dt_s();
  out.xhat = tr.Ad * belief.xhat + gain * (meas.z - c * belief.xhat);
  out.Phat = ProjectCovariance(JosephUpdate(belief.Phat, gain, tr, c, r));
  return out;
}

// Fixed-gain switched filter covariance recursion
// P+ = Lam P Lam^T + L R L^T + Wd with Lam = Ad - L C.
// `gains` is indexed by method id - 1.
inline Matrix SwitchedStep(const Matrix& p, MethodId method_id,
                           std::span<const Matrix> gains,
                           std::span<const PerceptionMethod> methods,
                           const DiscretizedDynamics& dyn) {
  const PerceptionMethod& m = MethodById(methods, method_id);
  const Matrix& gain = gains[static_cast<std::size_t>(method_id - 1)];
  return Symmetrize(
      JosephUpdate(p, gain, dyn.transition(m.steps), dyn.model().C, m.R));
}

// Fixed point of the Riccati recursion for a single method, by iteration.
inline Matrix SteadyStateCovariance(const PerceptionMethod& method,
                                    const DiscretizedDynamics& dyn,
                                    int max_iterations = 100000,
                                    double tol = 1e-14) {
  const int n = dyn.model().nx();
  Matrix p = Matrix::Identity(n, n);
  for (int i = 0; i < max_iterations; ++i) {
    Matrix next = RiccatiStep(p, method, dyn);
    const double change = (next - p).norm();
    p = std::move(next);
    if (change <= tol * std::max(1.0, p.norm())) break;
  }
  return p;
}

}  // namespace plate

#endif  // PLATE_ESTIMATOR_H_
