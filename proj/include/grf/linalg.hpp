#pragma once

#include <array>
#include <cmath>

#include "grf/common.hpp"

// Small dense symmetric-matrix kernels for D <= 3. Symmetric matrices are
// packed by increasing (i,j), i <= j:
//   D=1: [00]
//   D=2: [00, 01, 11]
//   D=3: [00, 01, 02, 11, 12, 22]

namespace grf {

template <int D>
inline constexpr int sym_size = D * (D + 1) / 2;

template <int D>
constexpr int sym_at(int i, int j) {
  if (i > j) { int t = i; i = j; j = t; }
  if constexpr (D == 1) return 0;
  if constexpr (D == 2) return i == 0 ? j : 2;
  // D == 3
  return i == 0 ? j : (i == 1 ? 2 + j : 5);
}

template <int D>
using SymMat = std::array<double, sym_size<D>>;
template <int D>
using Vec = std::array<double, D>;

template <int D>
inline double sym_det(const SymMat<D>& m) {
  if constexpr (D == 1) return m[0];
  if constexpr (D == 2) return m[0] * m[2] - m[1] * m[1];
  return m[0] * (m[3] * m[5] - m[4] * m[4]) - m[1] * (m[1] * m[5] - m[4] * m[2]) +
         m[2] * (m[1] * m[4] - m[3] * m[2]);
}

template <int D>
inline SymMat<D> sym_inverse(const SymMat<D>& m, double det) {
  SymMat<D> inv{};
  if constexpr (D == 1) {
    inv[0] = 1.0 / m[0];
  } else if constexpr (D == 2) {
    const double id = 1.0 / det;
    inv[0] = m[2] * id;
    inv[1] = -m[1] * id;
    inv[2] = m[0] * id;
  } else {
    const double id = 1.0 / det;
    inv[0] = (m[3] * m[5] - m[4] * m[4]) * id;
    inv[1] = (m[2] * m[4] - m[1] * m[5]) * id;
    inv[2] = (m[1] * m[4] - m[2] * m[3]) * id;
    inv[3] = (m[0] * m[5] - m[2] * m[2]) * id;
    inv[4] = (m[1] * m[2] - m[0] * m[4]) * id;
    inv[5] = (m[0] * m[3] - m[1] * m[1]) * id;
  }
  return inv;
}

// Smallest eigenvalue of a symmetric matrix, exact formulas for D<=2 and a
// safeguarded trigonometric solve for D=3.
template <int D>
inline double sym_min_eig(const SymMat<D>& m) {
  if constexpr (D == 1) return m[0];
  if constexpr (D == 2) {
    const double tr = m[0] + m[2];
    const double disc = std::sqrt(std::max(0.0, 0.25 * (m[0] - m[2]) * (m[0] - m[2]) + m[1] * m[1]));
    return 0.5 * tr - disc;
  } else {
    // characteristic-polynomial roots via the standard trigonometric method
    const double q = (m[0] + m[3] + m[5]) / 3.0;
    const double a00 = m[0] - q, a11 = m[3] - q, a22 = m[5] - q;
    const double p2 = a00 * a00 + a11 * a11 + a22 * a22 + 2.0 * (m[1] * m[1] + m[2] * m[2] + m[4] * m[4]);
    const double p = std::sqrt(std::max(0.0, p2 / 6.0));
    if (p == 0.0) return q;
    const double ip = 1.0 / p;
    // B = (A - q I)/p, detB in [-2, 2] up to roundoff
    const double b00 = a00 * ip, b01 = m[1] * ip, b02 = m[2] * ip;
    const double b11 = a11 * ip, b12 = m[4] * ip, b22 = a22 * ip;
    double detB = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                  b02 * (b01 * b12 - b11 * b02);
    double r = detB / 2.0;
    r = std::fmin(1.0, std::fmax(-1.0, r));
    const double phi = std::acos(r) / 3.0;
    // smallest root
    return q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  }
}

template <int D>
inline Vec<D> sym_apply(const SymMat<D>& m, const Vec<D>& v) {
  Vec<D> out{};
  for (int i = 0; i < D; ++i) {
    double s = 0.0;
    for (int j = 0; j < D; ++j) s += m[sym_at<D>(i, j)] * v[j];
    out[i] = s;
  }
  return out;
}

template <int D>
inline double sym_quad(const SymMat<D>& m, const Vec<D>& v, const Vec<D>& w) {
  double s = 0.0;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) s += m[sym_at<D>(i, j)] * v[i] * w[j];
  return s;
}

// <A, B>_g = g^{ik} g^{jl} A_{ij} B_{kl} for covariant symmetric 2-tensors
template <int D>
inline double sym_inner_g(const SymMat<D>& a, const SymMat<D>& b, const SymMat<D>& ginv) {
  double s = 0.0;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k)
        for (int l = 0; l < D; ++l)
          s += ginv[sym_at<D>(i, k)] * ginv[sym_at<D>(j, l)] * a[sym_at<D>(i, j)] * b[sym_at<D>(k, l)];
  return s;
}

template <int D>
inline double sym_trace_g(const SymMat<D>& a, const SymMat<D>& ginv) {
  double s = 0.0;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) s += ginv[sym_at<D>(i, j)] * a[sym_at<D>(i, j)];
  return s;
}

// n x n dense solve for n <= 3, partial pivoting; A and b are clobbered.
inline void solve3(double A[3][3], double b[3], double x[3], int n) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(A[perm[r]][col]) > std::fabs(A[perm[piv]][col])) piv = r;
    std::swap(perm[col], perm[piv]);
    const double d = A[perm[col]][col];
    for (int r = col + 1; r < n; ++r) {
      const double f = A[perm[r]][col] / d;
      for (int c = col; c < n; ++c) A[perm[r]][c] -= f * A[perm[col]][c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double s = b[perm[col]];
    for (int c = col + 1; c < n; ++c) s -= A[perm[col]][c] * x[c];
    x[col] = s / A[perm[col]][col];
  }
}

}  // namespace grf
