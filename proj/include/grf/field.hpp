#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "grf/linalg.hpp"
#include "grf/mesh.hpp"
#include "grf/reduce.hpp"

namespace grf {

// One value block of `Comps` doubles per grid node, stored node-major.
// Tag keeps vector fields, covector fields etc. distinct at the type level.
template <int D, int Comps, typename Tag>
struct Field {
  Mesh<D> mesh;
  std::vector<double> data;  // size() * Comps

  Field() = default;
  explicit Field(const Mesh<D>& m, double fill = 0.0)
      : mesh(m), data(static_cast<std::size_t>(m.size()) * Comps, fill) {}

  static constexpr int comps = Comps;
  index_t size() const { return mesh.size(); }

  double& at(index_t node, int c = 0) { return data[static_cast<std::size_t>(node) * Comps + c]; }
  double at(index_t node, int c = 0) const { return data[static_cast<std::size_t>(node) * Comps + c]; }

  std::array<double, Comps> block(index_t node) const {
    std::array<double, Comps> b;
    for (int c = 0; c < Comps; ++c) b[c] = at(node, c);
    return b;
  }
  void set_block(index_t node, const std::array<double, Comps>& b) {
    for (int c = 0; c < Comps; ++c) at(node, c) = b[c];
  }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct ScalarTag {};
struct VectorTag {};
struct CovectorTag {};
struct SymTag {};
struct MetricTag {};

template <int D>
using ScalarField = Field<D, 1, ScalarTag>;
template <int D>
using VectorField = Field<D, D, VectorTag>;  // contravariant components X^i
template <int D>
using CovectorField = Field<D, D, CovectorTag>;  // covariant components a_i
template <int D>
using SymField = Field<D, sym_size<D>, SymTag>;  // symmetric 2-tensor, packed

// Symmetric positive definite metric field. SPD is checked on demand, not on
// every mutation; flow and state constructors call validate().
template <int D>
struct MetricField : Field<D, sym_size<D>, MetricTag> {
  using Base = Field<D, sym_size<D>, MetricTag>;
  MetricField() = default;
  explicit MetricField(const Mesh<D>& m) : Base(m) {}

  SymMat<D> matrix(index_t node) const { return this->block(node); }

  // throws spd_error naming the first offending node
  void validate(double eps = kSpdFloor) const {
    const index_t N = this->size();
    for (index_t i = 0; i < N; ++i) {
      const double lmin = sym_min_eig<D>(matrix(i));
      if (!(lmin >= eps))
        throw spd_error("metric not positive definite: min eigenvalue " + std::to_string(lmin) +
                            " at node " + std::to_string(i),
                        i);
    }
  }
  double min_eigenvalue() const {
    const index_t N = this->size();
    double m = std::numeric_limits<double>::infinity();
    for (index_t i = 0; i < N; ++i) m = std::fmin(m, sym_min_eig<D>(matrix(i)));
    return m;
  }
};

template <int D>
MetricField<D> identity_metric(const Mesh<D>& m) {
  MetricField<D> g(m);
  for (index_t i = 0; i < m.size(); ++i)
    for (int a = 0; a < D; ++a) g.at(i, sym_at<D>(a, a)) = 1.0;
  return g;
}

// sqrt(det g) per node
template <int D>
ScalarField<D> volume_density(const MetricField<D>& g) {
  ScalarField<D> s(g.mesh);
  const index_t N = g.size();
  for (index_t i = 0; i < N; ++i) s.at(i) = std::sqrt(sym_det<D>(g.matrix(i)));
  return s;
}

// integral of a scalar field against sqrt(det g) e^{-f} dx (the weighted
// volume), deterministic reduction
template <int D>
double integrate(const ScalarField<D>& u, const ScalarField<D>& weight, double cell_volume) {
  return cell_volume *
         parallel_sum(static_cast<std::size_t>(u.size()),
                      [&](std::size_t i) { return u.data[i] * weight.data[i]; });
}

template <int D>
double max_abs(const Field<D, 1, ScalarTag>& u) {
  double m = 0.0;
  for (double v : u.data) m = std::fmax(m, std::fabs(v));
  return m;
}

}  // namespace grf
