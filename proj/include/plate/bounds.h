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

#ifndef PLATE_BOUNDS_H_
#define PLATE_BOUNDS_H_

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "plate/dynamics.h"
#include "plate/estimator.h"
#include "plate/types.h"

namespace plate {

// Common quadratic Lyapunov certificate (Omega, Y_i, gamma) for the
// switched fixed-gain filter with gains L_i = Omega^-1 Y_i.
struct LyapunovCertificate {
  Matrix Omega;
  std::vector<Matrix> Y;  // indexed by method id - 1
  double gamma = 0.5;

  std::vector<Matrix> Gains() const {
    const Eigen::LLT<Matrix> llt(Omega);
    std::vector<Matrix> out;
    out.reserve(Y.size());
    for (const Matrix& y : Y) out.push_back(llt.solve(y));
    return out;
  }
};

inline void Validate(const LyapunovCertificate& cert,
                     std::span<const PerceptionMethod> methods, int nx,
                     int nz) {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "certificate: " + msg);
  };
  if (cert.Omega.rows() != nx || cert.Omega.cols() != nx)
    fail("Omega must be n_x x n_x");
  if (!IsSymmetric(cert.Omega)) fail("Omega must be symmetric");
  if (!(MinEigenvalue(Symmetrize(cert.Omega)) > 0.0))
    fail("Omega must be positive definite");
  if (!(cert.gamma > 0.0 && cert.gamma < 1.0)) fail("gamma must be in (0,1)");
  if (cert.Y.size() != methods.size()) fail("need one Y per method");
  for (const Matrix& y : cert.Y) {
    if (y.rows() != nx || y.cols() != nz) fail("Y must be n_x x n_z");
  }
}

struct LmiCheck {
  bool feasible = false;
  double margin = 0.0;  // min over methods of lambda_min(gamma Omega - Lam^T Omega Lam)
  std::vector<double> per_method;
};

// gamma Omega - Lam_i^T Omega Lam_i >= 0 for every method, with
// Lam_i = Ad(latency_i) - L_i C. Equivalent to the 2n x 2n block LMI by a
// Schur complement on the Omega block.
inline LmiCheck LmiFeasible(const LyapunovCertificate& cert,
                            std::span<const PerceptionMethod> methods,
                            const DiscretizedDynamics& dyn) {
  Validate(cert, methods, dyn.model().nx(), dyn.model().nz());
  const std::vector<Matrix> gains = cert.Gains();
  LmiCheck out;
  out.feasible = true;
  out.margin = std::numeric_limits<double>::infinity();
  for (const PerceptionMethod& m : methods) {
    const Matrix lambda =
        dyn.Ad(m.steps) - gains[static_cast<std::size_t>(m.id - 1)] * dyn.model().C;
    const Matrix slack = Symmetrize(cert.gamma * cert.Omega -
                                    lambda.transpose() * cert.Omega * lambda);
    const double eig = MinEigenvalue(slack);
    out.per_method.push_back(eig);
    out.margin = std::min(out.margin, eig);
    if (eig < -1e-9 * slack.norm()) out.feasible = false;
  }
  if (methods.empty()) out.margin = 0.0;
  return out;
}

// max_i |L_i R_i L_i^T + Wd(latency_i)|_F
inline double GainNoiseBound(const LyapunovCertificate& cert,
                             std::span<const PerceptionMethod> methods,
                             const DiscretizedDynamics& dyn) {
  const std::vector<Matrix> gains = cert.Gains();
  double g = 0.0;
  for (const PerceptionMethod& m : methods) {
    const Matrix& l = gains[static_cast<std::size_t>(m.id - 1)];
    g = std::max(g, (l * m.R * l.transpose() + dyn.Wd(m.steps)).norm());
  }
  return g;
}

// B_s = sqrt(n_x) * cond(Omega) * (B0 + Gbar / (1 - gamma)).
inline double BoundBs(const LyapunovCertificate& cert, double B0,
                      std::span<const PerceptionMethod> methods,
                      const DiscretizedDynamics& dyn) {
  if (!LmiFeasible(cert, methods, dyn).feasible)
    throw Error(ErrorCode::kInfeasibleCertificate,
                "certificate does not satisfy the LMI");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(cert.Omega),
                                           Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  const double gbar = GainNoiseBound(cert, methods, dyn);
  return std::sqrt(static_cast<double>(dyn.model().nx())) * (hi / lo) *
         (B0 + gbar / (1.0 - cert.gamma));
}

struct SynthesisOptions {
  int max_iterations = 500;     // Newton steps over the whole barrier path
  double omega_trace_cap = 100.0;  // tr(Omega) <= cap * n_x, with Omega >= I
};

namespace internal {

// Affine matrix function F(x) = F0 + sum_j x_j Fj.
struct AffineBlock {
  Matrix f0;
  std::vector<Matrix> fj;

  Matrix At(const Vector& x) const {
    Matrix f = f0;
    for (std::size_t j = 0; j < fj.size(); ++j) f += x(static_cast<int>(j)) * fj[j];
    return f;
  }
};

// Builds the basis of an affine map by evaluating it at 0 and at unit vectors.
template <typename Map>
AffineBlock Linearize(const Map& map, int m) {
  AffineBlock b;
  b.f0 = map(Vector::Zero(m));
  for (int j = 0; j < m; ++j) b.fj.push_back(map(Vector::Unit(m, j)) - b.f0);
  return b;
}

// Barrier objective -s x_last - sum log det F_b(x); nullopt outside the domain.
inline std::optional<double> BarrierValue(std::span<const AffineBlock> blocks,
                                          const Vector& x, double s) {
  double v = -s * x(x.size() - 1);
  for (const AffineBlock& b : blocks) {
    Eigen::LLT<Matrix> llt(Symmetrize(b.At(x)));
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector d = llt.matrixLLT().diagonal();
    if ((d.array() <= 0.0).any()) return std::nullopt;
    v -= 2.0 * d.array().log().sum();
  }
  return v;
}

// Maximizes the last coordinate of x subject to F_b(x) > 0 by a primal
// log-barrier path with damped Newton steps. x must start strictly inside.
inline Vector MaximizeLastCoordinate(std::span<const AffineBlock> blocks,
                                     Vector x, int max_newton) {
  const int m = static_cast<int>(x.size());
  int dims = 0;
  for (const AffineBlock& b : blocks) dims += static_cast<int>(b.f0.rows());
  int budget = max_newton;
  for (double s = 1.0; budget > 0 && dims / s > 1e-10; s *= 8.0) {
    for (int inner = 0; inner < 50 && budget > 0; ++inner, --budget) {
      Vector g = Vector::Zero(m);
      Matrix h = Matrix::Zero(m, m);
      g(m - 1) = -s;
      for (const AffineBlock& b : blocks) {
        const Matrix inv = Symmetrize(b.At(x)).inverse();
        std::vector<Matrix> w;
        w.reserve(b.fj.size());
        for (int j = 0; j < m; ++j) {
          w.push_back(inv * b.fj[static_cast<std::size_t>(j)]);
          g(j) -= w.back().trace();
        }
        for (int j = 0; j < m; ++j)
          for (int k = j; k < m; ++k) {
            const double v = (w[static_cast<std::size_t>(j)].transpose()
                                  .cwiseProduct(w[static_cast<std::size_t>(k)]))
                                 .sum();
            h(j, k) += v;
            if (k != j) h(k, j) += v;
          }
      }
      const Vector dx = -h.ldlt().solve(g);
      const double decrement = -g.dot(dx);
      if (!(decrement > 1e-10)) break;
      const double f0 = *BarrierValue(blocks, x, s);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        const std::optional<double> f = BarrierValue(blocks, x + step * dx, s);
        if (f && *f <= f0 - 0.25 * step * decrement) {
          x += step * dx;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }
  return x;
}

}  // namespace internal

// Best-effort certificate search. Solves the LMI jointly in (Omega, Y_i) in
// its Schur form
//   [gamma Omega, (Omega Ad_i - Y_i C)^T; Omega Ad_i - Y_i C, Omega] >= t I,
// with I <= Omega and tr(Omega) capped: first maximize t by a barrier method,
// then, from that strictly feasible point, minimize lambda_max(Omega).
// Returns nullopt when the best t is not positive or the result fails
// LmiFeasible.
inline std::optional<LyapunovCertificate> SynthesizeCertificate(
    std::span<const PerceptionMethod> methods, const DiscretizedDynamics& dyn,
    double gamma, const SynthesisOptions& options = {}) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "gamma must be in (0,1)");
  const ContinuousModel& model = dyn.model();
  const int n = model.nx();
  const int nz = model.nz();
  const int d = static_cast<int>(methods.size());
  const int n_omega = n * (n + 1) / 2;
  const int m = n_omega + d * n * nz + 1;

  const auto omega_of = [&](const Vector& x) {
    Matrix o = Matrix::Zero(n, n);
    int k = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b, ++k) {
        o(a, b) += x(k);
        if (a != b) o(b, a) += x(k);
      }
    return o;
  };
  const auto y_of = [&](const Vector& x, int i) {
    return Eigen::Map<const Matrix>(x.data() + n_omega + i * n * nz, n, nz);
  };

  std::vector<internal::AffineBlock> blocks;
  for (int i = 0; i < d; ++i) {
    const Matrix ad = dyn.Ad(methods[static_cast<std::size_t>(i)].steps);
    blocks.push_back(internal::Linearize(
        [&, ad, i](const Vector& x) {
          const Matrix o = omega_of(x);
          const Matrix off = o * ad - y_of(x, i) * model.C;
          Matrix g(2 * n, 2 * n);
          g << gamma * o, off.transpose(), off, o;
          return Matrix(g - x(m - 1) * Matrix::Identity(2 * n, 2 * n));
        },
        m));
  }
  blocks.push_back(internal::Linearize(
      [&](const Vector& x) { return Matrix(omega_of(x) - Matrix::Identity(n, n)); }, m));
  blocks.push_back(internal::Linearize(
      [&](const Vector& x) {
        return Matrix::Constant(1, 1, options.omega_trace_cap * n - omega_of(x).trace());
      },
      m));

  // Strictly feasible start: Omega = 2I, Y = 0, t below every eigenvalue.
  Vector x = Vector::Zero(m);
  for (int a = 0, k = 0; a < n; ++a)
    for (int b = a; b < n; ++b, ++k)
      if (a == b) x(k) = 2.0;
  double t0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i)
    t0 = std::min(t0, MinEigenvalue(Symmetrize(blocks[static_cast<std::size_t>(i)].At(x))));
  x(m - 1) = t0 - 1.0;

  x = internal::MaximizeLastCoordinate(blocks, x, options.max_iterations);
  if (!(x(m - 1) > 0.0)) return std::nullopt;

  // Second pass: with the LMI held at a small slack, minimize kappa >= lambda_max(Omega)
  // (last coordinate is -kappa) so the certificate is well conditioned.
  const double slack = 1e-3 * x(m - 1);
  std::vector<internal::AffineBlock> tight;
  for (int i = 0; i < d; ++i) {
    internal::AffineBlock b = blocks[static_cast<std::size_t>(i)];
    b.fj.back().setZero();
    b.f0 -= slack * Matrix::Identity(b.f0.rows(), b.f0.cols());
    tight.push_back(std::move(b));
  }
  tight.push_back(blocks[static_cast<std::size_t>(d)]);
  tight.push_back(internal::Linearize(
      [&](const Vector& v) {
        return Matrix(-v(m - 1) * Matrix::Identity(n, n) - omega_of(v));
      },
      m));
  x(m - 1) = -(Eigen::SelfAdjointEigenSolver<Matrix>(omega_of(x), Eigen::EigenvaluesOnly)
                   .eigenvalues()
                   .maxCoeff() +
               1.0);
  x = internal::MaximizeLastCoordinate(tight, x, options.max_iterations);
  LyapunovCertificate cert;
  cert.gamma = gamma;
  cert.Omega = Symmetrize(omega_of(x));
  for (int i = 0; i < d; ++i) cert.Y.push_back(y_of(x, i));
  if (!LmiFeasible(cert, methods, dyn).feasible) return std::nullopt;
  return cert;
}

}  // namespace plate

#endif  // PLATE_BOUNDS_H_
