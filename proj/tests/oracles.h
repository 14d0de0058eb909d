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

// Reference implementations that share no code with the library kernels:
// long-double Taylor exponential with scaling and squaring, and adaptive
// Simpson quadrature on matrix-valued integrands.

#ifndef PLATE_TESTS_ORACLES_H_
#define PLATE_TESTS_ORACLES_H_

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "plate/types.h"

namespace plate::testing {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

inline Matrix TaylorExp(const Matrix& a, double t) {
  LMatrix x = a.cast<long double>() * static_cast<long double>(t);
  const long double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0L, squarings) > 0.25L) ++squarings;
  x /= std::ldexp(1.0L, squarings);
  const int n = static_cast<int>(a.rows());
  LMatrix sum = LMatrix::Identity(n, n);
  LMatrix term = LMatrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = (term * x) / static_cast<long double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum.cast<double>();
}

using MatrixFn = std::function<Matrix(double)>;

namespace internal_oracle {

inline Matrix Simpson(const MatrixFn& f, double a, double b, const Matrix& fa,
                      const Matrix& fm, const Matrix& fb, const Matrix& whole,
                      double tol, int depth) {
  const double m = 0.5 * (a + b);
  const Matrix flm = f(0.5 * (a + m));
  const Matrix frm = f(0.5 * (m + b));
  const Matrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Matrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Matrix diff = left + right - whole;
  if (depth <= 0 || diff.cwiseAbs().maxCoeff() <= 15.0 * tol)
    return left + right + diff / 15.0;
  return Simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         Simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace internal_oracle

// Adaptive Simpson with Richardson correction; `tol` is absolute per entry.
inline Matrix AdaptiveSimpson(const MatrixFn& f, double a, double b,
                              double tol = 1e-13) {
  const Matrix fa = f(a);
  const Matrix fb = f(b);
  const Matrix fm = f(0.5 * (a + b));
  const Matrix whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return internal_oracle::Simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline Matrix OracleWd(const ContinuousModel& m, double d) {
  const Matrix q = m.B * m.W * m.B.transpose();
  return AdaptiveSimpson(
      [&](double s) {
        const Matrix e = TaylorExp(m.A, s);
        return Matrix(e * q * e.transpose());
      },
      0.0, d);
}

inline Matrix OracleM(const ContinuousModel& m, double d) {
  return AdaptiveSimpson(
      [&](double s) {
        const Matrix e = TaylorExp(m.A, s);
        return Matrix(e.transpose() * e);
      },
      0.0, d);
}

// c = int_0^d tr(Wd(t)) dt = int_0^d (d - s) tr(e^{As} Q e^{As}^T) ds.
inline double OracleC(const ContinuousModel& m, double d) {
  const Matrix q = m.B * m.W * m.B.transpose();
  return AdaptiveSimpson(
             [&](double s) {
               const Matrix e = TaylorExp(m.A, s);
               return Matrix::Constant(1, 1, (d - s) * (e * q * e.transpose()).trace());
             },
             0.0, d)(0, 0);
}

inline double RelErr(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace plate::testing

#endif  // PLATE_TESTS_ORACLES_H_
