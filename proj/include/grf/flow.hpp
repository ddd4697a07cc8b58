#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "grf/state.hpp"

// Time integration of the coupled flow
//   dg/dt = -2 Rc + H^2/2 - 2 hess f
//   dH/dt = -d( d* H + i_{grad f} H )        (Hodge heat flow on closed H)
//   df/dt = lap f + wtilde/4 - |grad f|^2
// by classical RK4 at fixed step. The H right-hand side is exact, so
// closedness is preserved to machine precision along trajectories.

namespace grf {

template <int D>
struct FlowTangent {
  SymField<D> dg;
  Polyform<D> dH;
  ScalarField<D> df;
  double d_closedness = 0.0;  // ||d(dH/dt)||_inf, diagnostic
};

template <int D>
FlowTangent<D> flow_rhs(const GeomState<D>& s, FormNorm c) {
  const Mesh<D>& m = s.mesh();
  FlowTangent<D> out{SymField<D>(m), Polyform<D>(m), ScalarField<D>(m)};

  Curvature<D> cur = curvature(s.g);
  SymField<D> h2 = h_squared(s.g, s.H, c);
  SymField<D> hf = hessian(s.g, s.f);
  for (std::size_t i = 0; i < out.dg.data.size(); ++i)
    out.dg.data[i] = -2.0 * cur.ricci.data[i] + 0.5 * h2.data[i] - 2.0 * hf.data[i];

  VectorField<D> gf = gradient(s.g, s.f);
  for (int k = 1; k <= D; ++k) {
    if (!s.H.present(k)) continue;
    DegreeField<D> ds = codifferential(s.H.part[k], s.g);
    DegreeField<D> iw = interior_product(s.H.part[k], gf);
    for (std::size_t i = 0; i < ds.data.size(); ++i) ds.data[i] += iw.data[i];
    DegreeField<D> dHk = exterior_derivative(ds);
    DegreeField<D>& slot = out.dH.ensure(k);
    for (std::size_t i = 0; i < slot.data.size(); ++i) slot.data[i] = -dHk.data[i];
  }
  out.d_closedness = closedness_residual(out.dH);

  ScalarField<D> lf = laplace_beltrami(s.g, s.f);
  ScalarField<D> wt = weighted_norm_sum(s.g, s.H, &conv::dilaton_weight, c);
  ScalarField<D> gf2 = grad_inner(s.g, s.f, s.f);
  for (index_t i = 0; i < out.df.size(); ++i)
    out.df.data[i] = lf.data[i] + 0.25 * wt.data[i] - gf2.data[i];
  return out;
}

// parabolic step bound: cfl * min_a(h_a^2) * min lambda(g) / 4
template <int D>
double max_stable_dt(const GeomState<D>& s, double cfl = kCflDefault) {
  double h2min = s.mesh().h[0] * s.mesh().h[0];
  for (int a = 1; a < D; ++a) h2min = std::fmin(h2min, s.mesh().h[a] * s.mesh().h[a]);
  return cfl * h2min * s.g.min_eigenvalue() / 4.0;
}

namespace detail {
template <int D>
void axpy_state(GeomState<D>& y, double a, const FlowTangent<D>& t) {
  for (std::size_t i = 0; i < y.g.data.size(); ++i) y.g.data[i] += a * t.dg.data[i];
  for (int k = 1; k <= D; ++k) {
    if (!t.dH.present(k)) continue;
    DegreeField<D>& slot = y.H.ensure(k);
    for (std::size_t i = 0; i < slot.data.size(); ++i) slot.data[i] += a * t.dH.part[k].data[i];
  }
  for (std::size_t i = 0; i < y.f.data.size(); ++i) y.f.data[i] += a * t.df.data[i];
}
}  // namespace detail

// one classical RK4 step; re-validates admissibility of the result
template <int D>
GeomState<D> flow_step(const GeomState<D>& s, double dt, FormNorm c, double cfl = kCflDefault) {
  s.g.validate();
  if (dt < 0.0) throw cfl_error("flow step: negative dt");
  if (dt > max_stable_dt(s, cfl) * (1.0 + 1e-12))
    throw cfl_error("flow step: dt " + std::to_string(dt) + " exceeds stability bound " +
                    std::to_string(max_stable_dt(s, cfl)));
  if (dt == 0.0) return s;

  FlowTangent<D> k1 = flow_rhs(s, c);
  GeomState<D> s2 = s;
  detail::axpy_state(s2, 0.5 * dt, k1);
  FlowTangent<D> k2 = flow_rhs(s2, c);
  GeomState<D> s3 = s;
  detail::axpy_state(s3, 0.5 * dt, k2);
  FlowTangent<D> k3 = flow_rhs(s3, c);
  GeomState<D> s4 = s;
  detail::axpy_state(s4, dt, k3);
  FlowTangent<D> k4 = flow_rhs(s4, c);

  GeomState<D> out = s;
  out.t = s.t + dt;
  detail::axpy_state(out, dt / 6.0, k1);
  detail::axpy_state(out, dt / 3.0, k2);
  detail::axpy_state(out, dt / 3.0, k3);
  detail::axpy_state(out, dt / 6.0, k4);
  out.require_admissible();
  return out;
}

// Recorded trajectory: snapshots at uniform dt over [t0, t0+T], immutable
// after evolve() returns it. Intermediate-time access interpolates linearly
// per node and re-checks SPD.
template <int D>
class Trajectory {
 public:
  Trajectory(std::vector<GeomState<D>> snaps, double dt, FormNorm c)
      : snaps_(std::move(snaps)), dt_(dt), convention_(c) {}

  const std::vector<GeomState<D>>& snapshots() const { return snaps_; }
  const GeomState<D>& operator[](std::size_t i) const { return snaps_[i]; }
  std::size_t size() const { return snaps_.size(); }
  double dt() const { return dt_; }
  FormNorm convention() const { return convention_; }
  double t_begin() const { return snaps_.front().t; }
  double t_end() const { return snaps_.back().t; }
  const Mesh<D>& mesh() const { return snaps_.front().mesh(); }

  GeomState<D> at(double t) const {
    const double t0 = t_begin(), t1 = t_end();
    if (t < t0 - 1e-12 || t > t1 + 1e-12) throw shape_error("trajectory: time out of range");
    t = std::fmin(std::fmax(t, t0), t1);
    const double pos = (t - t0) / dt_;
    std::size_t k = static_cast<std::size_t>(std::floor(pos));
    if (k >= snaps_.size() - 1) k = snaps_.size() - 2;
    const double a = pos - static_cast<double>(k);
    if (a <= 1e-14) return snaps_[k];
    if (a >= 1.0 - 1e-14) return snaps_[k + 1];
    const GeomState<D>&x = snaps_[k], &y = snaps_[k + 1];
    GeomState<D> out = x;
    out.t = t;
    for (std::size_t i = 0; i < out.g.data.size(); ++i)
      out.g.data[i] = (1.0 - a) * x.g.data[i] + a * y.g.data[i];
    for (int kk = 1; kk <= D; ++kk)
      if (x.H.present(kk))
        for (std::size_t i = 0; i < out.H.part[kk].data.size(); ++i)
          out.H.part[kk].data[i] = (1.0 - a) * x.H.part[kk].data[i] + a * y.H.part[kk].data[i];
    for (std::size_t i = 0; i < out.f.data.size(); ++i)
      out.f.data[i] = (1.0 - a) * x.f.data[i] + a * y.f.data[i];
    out.g.validate();
    return out;
  }

 private:
  std::vector<GeomState<D>> snaps_;
  double dt_;
  FormNorm convention_;
};

// Evolve to horizon T at fixed dt (T/dt integral within roundoff). A CFL or
// SPD failure mid-run aborts with the diagnostic; no partial result leaks
// into the return value.
template <int D>
Trajectory<D> evolve(const GeomState<D>& s0, double T, double dt, FormNorm c,
                     double cfl = kCflDefault) {
  if (!(dt > 0.0) && T > 0.0) throw cfl_error("evolve: dt must be positive");
  std::size_t nsteps = 0;
  if (T > 0.0) {
    const double ratio = T / dt;
    nsteps = static_cast<std::size_t>(std::llround(ratio));
    if (nsteps == 0 || std::fabs(ratio - static_cast<double>(nsteps)) > 1e-9)
      throw config_error("evolve: horizon T must be an integer multiple of dt");
  }
  s0.require_admissible();
  std::vector<GeomState<D>> snaps;
  snaps.reserve(nsteps + 1);
  snaps.push_back(s0);
  snaps.back().t = s0.t;
  for (std::size_t k = 0; k < nsteps; ++k) {
    try {
      snaps.push_back(flow_step(snaps.back(), dt, c, cfl));
    } catch (const error& err) {
      throw solver_error("evolve aborted at step " + std::to_string(k + 1) + " (t = " +
                         std::to_string(snaps.back().t) + "): " + err.what());
    }
  }
  return Trajectory<D>(std::move(snaps), dt, c);
}

}  // namespace grf
