#pragma once

#include "convroof/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

namespace convroof::quantum {

template <int N>
using CMatrix = Eigen::Matrix<std::complex<double>, N, N>;

template <int N>
struct HermitianEigen {
  Eigen::Matrix<double, N, 1> values;  // descending
  CMatrix<N> vectors;                  // columns, matching `values`
  int sweeps = 0;
};

/// Cyclic Jacobi for small complex Hermitian matrices. Only the Hermitian
/// part of `a` is used. Throws EigenSolverError without convergence.
template <int N>
HermitianEigen<N> jacobi_eigen(const CMatrix<N>& a, double tol = 1e-12, int max_sweeps = 100) {
  using C = std::complex<double>;
  CMatrix<N> A = 0.5 * (a + a.adjoint());
  CMatrix<N> V = CMatrix<N>::Identity();
  const double scale = A.norm();
  HermitianEigen<N> out;

  auto off = [&] {
    double s = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) s += std::norm(A(p, q));
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  while (scale > 0.0 && off() > tol * scale) {
    if (sweep == max_sweeps) throw EigenSolverError("Jacobi sweeps exhausted");
    ++sweep;
    for (int p = 0; p < N; ++p) {
      for (int q = p + 1; q < N; ++q) {
        const double mag = std::abs(A(p, q));
        if (mag == 0.0) continue;
        const C phase = std::conj(A(p, q)) / mag;  // e^{-i phi}
        const double tau = (A(q, q).real() - A(p, p).real()) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on coordinates (p, q).
        const C j00 = c;
        const C j01 = s;
        const C j10 = -s * phase;
        const C j11 = c * phase;
        for (int k = 0; k < N; ++k) {
          const C akp = A(k, p);
          const C akq = A(k, q);
          A(k, p) = akp * j00 + akq * j10;
          A(k, q) = akp * j01 + akq * j11;
          const C vkp = V(k, p);
          const C vkq = V(k, q);
          V(k, p) = vkp * j00 + vkq * j10;
          V(k, q) = vkp * j01 + vkq * j11;
        }
        for (int k = 0; k < N; ++k) {
          const C apk = A(p, k);
          const C aqk = A(q, k);
          A(p, k) = std::conj(j00) * apk + std::conj(j10) * aqk;
          A(q, k) = std::conj(j01) * apk + std::conj(j11) * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
      }
    }
  }

  std::array<int, N> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return A(i, i).real() > A(j, j).real(); });
  for (int k = 0; k < N; ++k) {
    out.values(k) = A(order[k], order[k]).real();
    out.vectors.col(k) = V.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

}  // namespace convroof::quantum
