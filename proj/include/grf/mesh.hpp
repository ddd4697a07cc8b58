#pragma once

#include <array>
#include <cstddef>

#include "grf/common.hpp"

namespace grf {

inline bool is_pow2(index_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Uniform periodic grid on a flat torus, D in {1,2,3}. Same point count n on
// every axis (power of two, >= 8), axis lengths may differ.
template <int D>
struct Mesh {
  static_assert(D >= 1 && D <= 3);
  index_t n = 0;
  std::array<double, D> length{};
  std::array<double, D> h{};

  Mesh() = default;
  Mesh(index_t points_per_axis, std::array<double, D> axis_lengths)
      : n(points_per_axis), length(axis_lengths) {
    if (!is_pow2(n) || n < 8) throw config_error("mesh: points per axis must be a power of two >= 8");
    for (int a = 0; a < D; ++a) {
      if (!(length[a] > 0.0)) throw config_error("mesh: axis lengths must be positive");
      h[a] = length[a] / static_cast<double>(n);
    }
  }

  index_t size() const {
    index_t s = 1;
    for (int a = 0; a < D; ++a) s *= n;
    return s;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < D; ++a) v *= h[a];
    return v;
  }

  // flat index <-> coordinates, x fastest
  index_t flat(const std::array<index_t, D>& c) const {
    index_t i = 0;
    for (int a = D - 1; a >= 0; --a) i = i * n + c[a];
    return i;
  }
  std::array<index_t, D> coords(index_t i) const {
    std::array<index_t, D> c{};
    for (int a = 0; a < D; ++a) {
      c[a] = i % n;
      i /= n;
    }
    return c;
  }
  // periodic neighbor along axis `a`
  index_t shift(index_t i, int a, int dir) const {
    std::array<index_t, D> c = coords(i);
    c[a] = (c[a] + dir + n) % n;
    return flat(c);
  }
  std::array<double, D> point(index_t i) const {
    auto c = coords(i);
    std::array<double, D> x{};
    for (int a = 0; a < D; ++a) x[a] = h[a] * static_cast<double>(c[a]);
    return x;
  }

  bool operator==(const Mesh& o) const { return n == o.n && length == o.length; }
};

template <int D>
void require_same_mesh(const Mesh<D>& a, const Mesh<D>& b) {
  if (!(a == b)) throw shape_error("fields live on different meshes");
}

}  // namespace grf
