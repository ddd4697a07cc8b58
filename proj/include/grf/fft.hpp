#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "grf/common.hpp"
#include "grf/mesh.hpp"

// Radix-2 complex FFT, iterative and sequential within one transform. Grid
// sizes are powers of two by mesh invariant. Used only by the spectral
// preconditioner, so no scaling cleverness is needed.

namespace grf {

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;
  if (n & (n - 1)) throw shape_error("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= s;
  }
}

// D-dimensional transform over the n^D grid (x fastest). Sequential; callers
// that need determinism across thread counts get it for free.
template <int D>
void fftn(std::vector<std::complex<double>>& a, const Mesh<D>& m, bool inverse) {
  const std::size_t n = static_cast<std::size_t>(m.n);
  std::vector<std::complex<double>> line(n);
  std::size_t stride = 1;
  for (int axis = 0; axis < D; ++axis) {
    const std::size_t count = a.size() / n;
    // iterate all lines along `axis`
    for (std::size_t base = 0; base < count; ++base) {
      // decompose base into (pre, post) around the axis
      const std::size_t pre = base % stride;
      const std::size_t post = base / stride;
      const std::size_t start = pre + post * stride * n;
      for (std::size_t k = 0; k < n; ++k) line[k] = a[start + k * stride];
      fft_inplace(line, inverse);
      for (std::size_t k = 0; k < n; ++k) a[start + k * stride] = line[k];
    }
    stride *= n;
  }
}

}  // namespace grf
