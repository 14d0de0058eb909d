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

#ifndef PLATE_DYNAMICS_H_
#define PLATE_DYNAMICS_H_

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "plate/types.h"

namespace plate {

struct Transition {
  Matrix Ad;  // exp(A d)
  Matrix Wd;  // int_0^d exp(A s) BWB^T exp(A s)^T ds
};

struct StageGram {
  Matrix M;        // int_0^d Ad(t)^T Ad(t) dt
  double c = 0.0;  // int_0^d tr(Wd(t)) dt
};

// Joint (Ad, Wd) over `duration` seconds via the Van Loan block exponential
// exp([[-A, BWB^T], [0, A^T]] d) = [[F11, F12], [0, F22]]:
// Ad = F22^T, Wd = F22^T F12.
inline Transition Discretize(const ContinuousModel& model, double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw Error(ErrorCode::kInvalidArgument, "duration must be finite, >= 0");
  if (!AllFinite(model.A) || !AllFinite(model.B) || !AllFinite(model.W))
    throw Error(ErrorCode::kInvalidModel, "model has non-finite entries");
  const int n = model.nx();
  if (duration == 0.0) {
    return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
  }
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -model.A;
  block.topRightCorner(n, n) = model.Diffusion();
  block.bottomRightCorner(n, n) = model.A.transpose();
  const Matrix f = (block * duration).exp();
  Transition out;
  out.Ad = f.bottomRightCorner(n, n).transpose();
  out.Wd = Symmetrize(out.Ad * f.topRightCorner(n, n));
  return out;
}

namespace internal {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// Adds the Gram integrand over [a, b] to `acc`.
inline void AccumulateGram(const ContinuousModel& model, double a, double b,
                           StageGram& acc) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    const double t = mid + half * kGaussNodes[i];
    const Transition tr = Discretize(model, t);
    acc.M.noalias() += (half * kGaussWeights[i]) * (tr.Ad.transpose() * tr.Ad);
    acc.c += half * kGaussWeights[i] * tr.Wd.trace();
  }
}

}  // namespace internal

// Stage-cost Gram integrals so that int_0^d tr(P(t)) dt = tr(P M) + c for a
// belief propagated open loop from P. Fixed 8-point Gauss-Legendre on
// sub-intervals no longer than the model's sampling period.
inline StageGram CostGram(const ContinuousModel& model, double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw Error(ErrorCode::kInvalidArgument, "duration must be finite, >= 0");
  const int n = model.nx();
  StageGram out{Matrix::Zero(n, n), 0.0};
  if (duration == 0.0) return out;
  const int pieces =
      std::max(1, static_cast<int>(std::ceil(duration / model.dt_s - 1e-9)));
  const double h = duration / pieces;
  for (int i = 0; i < pieces; ++i) {
    internal::AccumulateGram(model, i * h, (i + 1) * h, out);
  }
  out.M = Symmetrize(out.M);
  return out;
}

// Transition and Gram tables on the sampling grid, j = 0..max_steps.
// Read-only after construction.
class DiscretizedDynamics {
 public:
  DiscretizedDynamics() = default;

  DiscretizedDynamics(const ContinuousModel& model, int max_steps)
      : model_(model) {
    if (max_steps < 0)
      throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 0");
    const int n = model.nx();
    transitions_.reserve(static_cast<std::size_t>(max_steps) + 1);
    grams_.reserve(static_cast<std::size_t>(max_steps) + 1);
    transitions_.push_back({Matrix::Identity(n, n), Matrix::Zero(n, n)});
    grams_.push_back({Matrix::Zero(n, n), 0.0});
    for (int j = 1; j <= max_steps; ++j) {
      transitions_.push_back(Discretize(model, j * model.dt_s));
      StageGram g = grams_.back();
      internal::AccumulateGram(model, (j - 1) * model.dt_s, j * model.dt_s, g);
      g.M = Symmetrize(g.M);
      grams_.push_back(std::move(g));
    }
  }

  const ContinuousModel& model() const { return model_; }
  int max_steps() const { return static_cast<int>(transitions_.size()) - 1; }
  double dt_s() const { return model_.dt_s; }

  const Transition& transition(Ticks steps) const { return transitions_.at(Index(steps)); }
  const Matrix& Ad(Ticks steps) const { return transition(steps).Ad; }
  const Matrix& Wd(Ticks steps) const { return transition(steps).Wd; }
  const StageGram& gram(Ticks steps) const { return grams_.at(Index(steps)); }

  // Open-loop integral of tr(P(t)) over `steps` periods starting from P.
  double IntegratedTrace(const Matrix& p, Ticks steps) const {
    const StageGram& g = gram(steps);
    return p.cwiseProduct(g.M).sum() + g.c;
  }

 private:
  std::size_t Index(Ticks steps) const {
    if (steps < 0 || steps > max_steps())
      throw Error(ErrorCode::kInvalidArgument,
                  "duration of " + std::to_string(steps) +
                      " steps outside the precomputed table");
    return static_cast<std::size_t>(steps);
  }

  ContinuousModel model_;
  std::vector<Transition> transitions_;
  std::vector<StageGram> grams_;
};

}  // namespace plate

#endif  // PLATE_DYNAMICS_H_
