#pragma once

#include "grf/curvature_hf.hpp"
#include "grf/field.hpp"
#include "grf/forms.hpp"

namespace grf {

// One time slice of the coupled flow: metric, closed polyform, dilaton.
template <int D>
struct GeomState {
  double t = 0.0;
  MetricField<D> g;
  Polyform<D> H;
  ScalarField<D> f;

  GeomState() = default;
  GeomState(double time, MetricField<D> metric, Polyform<D> poly, ScalarField<D> dilaton)
      : t(time), g(std::move(metric)), H(std::move(poly)), f(std::move(dilaton)) {}

  const Mesh<D>& mesh() const { return g.mesh; }

  // g SPD above the floor, dH within the closedness tolerance
  void require_admissible() const {
    g.validate();
    const double r = closedness_residual(H);
    if (r > kClosedTol)
      throw shape_error("state not admissible: ||dH||_inf = " + std::to_string(r));
  }

  // e^{-f} sqrt(det g) per node
  ScalarField<D> weight() const {
    ScalarField<D> w = volume_density(g);
    for (index_t i = 0; i < w.size(); ++i) w.data[i] *= std::exp(-f.data[i]);
    return w;
  }
};

template <int D>
GeomState<D> flat_state(const Mesh<D>& m) {
  return GeomState<D>(0.0, identity_metric(m), Polyform<D>(m), ScalarField<D>(m));
}

}  // namespace grf
