#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "grf/convention.hpp"
#include "grf/state.hpp"

// Spatially homogeneous reduction on the 3-torus: g = a(t) I, H = c(t)
// dx^dy^dz, f = f(t). All spatial derivatives vanish and the coupled flow
// collapses to
//   a' = A c^2 / (2 a^2),   c' = 0,   f' = B c^2 / (4 a^3)
// with A the H^2 weight and B the dilaton weight for degree 3. Used as an
// exact oracle for the full-grid integrator.

namespace grf {

struct HomogeneousState {
  double a = 1.0;  // metric scale, must stay positive
  double c = 0.0;  // top-form coefficient
  double f = 0.0;

  void validate() const {
    if (!(a > 0.0)) throw spd_error("homogeneous state: scale not positive", 0);
  }
};

struct HomogeneousRhs {
  double da, dc, df;
};

inline HomogeneousRhs homogeneous_rhs(const HomogeneousState& s, FormNorm conv) {
  const double A = conv::h2_weight(conv, 3);
  const double B = conv::dilaton_weight(conv, 3);
  const double c2 = s.c * s.c;
  return {0.5 * A * c2 / (s.a * s.a), 0.0, 0.25 * B * c2 / (s.a * s.a * s.a)};
}

// increasing-index norm |H_3|^2 = c^2 / a^3 and derived quantities
inline double homogeneous_form_norm2(const HomogeneousState& s) { return s.c * s.c / (s.a * s.a * s.a); }

inline double homogeneous_scalar_curvature(const HomogeneousState& s, FormNorm conv) {
  return -0.25 * conv::scalar_weight(conv, 3) * homogeneous_form_norm2(s);
}

// |Rc^{H,f}|^2 = |H^2/4|^2 = 3 A^2 c^4 / (16 a^6) for the homogeneous state
inline double homogeneous_ricci_norm2(const HomogeneousState& s, FormNorm conv) {
  const double A = conv::h2_weight(conv, 3);
  const double c2 = s.c * s.c;
  const double a2 = s.a * s.a;
  return 3.0 * A * A * c2 * c2 / (16.0 * a2 * a2 * a2);
}

// weighted volume density e^{-f} a^{3/2}
inline double homogeneous_weight(const HomogeneousState& s) {
  return std::exp(-s.f) * std::pow(s.a, 1.5);
}

// Closed-form solution: a^3(t) = a0^3 + (3A/2) c^2 t, c constant,
// f(t) = f0 + (B / 6A) log(a^3(t) / a0^3) for c != 0.
inline HomogeneousState homogeneous_exact(const HomogeneousState& s0, double t, FormNorm conv) {
  const double A = conv::h2_weight(conv, 3);
  const double B = conv::dilaton_weight(conv, 3);
  HomogeneousState out = s0;
  if (s0.c == 0.0) return out;
  const double a03 = s0.a * s0.a * s0.a;
  const double a3 = a03 + 1.5 * A * s0.c * s0.c * t;
  if (!(a3 > 0.0)) throw solver_error("homogeneous exact solution left the positive cone");
  out.a = std::cbrt(a3);
  out.f = s0.f + (B / (6.0 * A)) * std::log(a3 / a03);
  return out;
}

// Dormand-Prince 5(4) with PI step control; tol is both absolute and
// relative. Dense output at the requested sample times by re-integration to
// each time (the system is cheap).
struct HomogeneousPath {
  std::vector<double> t;
  std::vector<HomogeneousState> y;
};

inline HomogeneousState homogeneous_integrate(const HomogeneousState& s0, double t_end,
                                              FormNorm conv, double tol = 1e-12) {
  // Butcher tableau, classic DOPRI5
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto add = [](const HomogeneousState& s, double h, const HomogeneousRhs& k) {
    HomogeneousState r = s;
    r.a += h * k.da;
    r.c += h * k.dc;
    r.f += h * k.df;
    return r;
  };

  HomogeneousState y = s0;
  double t = 0.0;
  double h = t_end > 0 ? std::fmin(t_end, 1e-3) : 0.0;
  int guard = 0;
  while (t < t_end && ++guard < 1000000) {
    if (t + h > t_end) h = t_end - t;
    const HomogeneousRhs k1 = homogeneous_rhs(y, conv);
    const HomogeneousRhs k2 = homogeneous_rhs(add(y, h * a21, k1), conv);
    HomogeneousState s3 = y;
    s3.a += h * (a31 * k1.da + a32 * k2.da);
    s3.f += h * (a31 * k1.df + a32 * k2.df);
    const HomogeneousRhs k3 = homogeneous_rhs(s3, conv);
    HomogeneousState s4 = y;
    s4.a += h * (a41 * k1.da + a42 * k2.da + a43 * k3.da);
    s4.f += h * (a41 * k1.df + a42 * k2.df + a43 * k3.df);
    const HomogeneousRhs k4 = homogeneous_rhs(s4, conv);
    HomogeneousState s5 = y;
    s5.a += h * (a51 * k1.da + a52 * k2.da + a53 * k3.da + a54 * k4.da);
    s5.f += h * (a51 * k1.df + a52 * k2.df + a53 * k3.df + a54 * k4.df);
    const HomogeneousRhs k5 = homogeneous_rhs(s5, conv);
    HomogeneousState s6 = y;
    s6.a += h * (a61 * k1.da + a62 * k2.da + a63 * k3.da + a64 * k4.da + a65 * k5.da);
    s6.f += h * (a61 * k1.df + a62 * k2.df + a63 * k3.df + a64 * k4.df + a65 * k5.df);
    const HomogeneousRhs k6 = homogeneous_rhs(s6, conv);
    HomogeneousState y5 = y;
    y5.a += h * (b1 * k1.da + b3 * k3.da + b4 * k4.da + b5 * k5.da + b6 * k6.da);
    y5.f += h * (b1 * k1.df + b3 * k3.df + b4 * k4.df + b5 * k5.df + b6 * k6.df);
    const HomogeneousRhs k7 = homogeneous_rhs(y5, conv);

    const double err_a = h * (e1 * k1.da + e3 * k3.da + e4 * k4.da + e5 * k5.da + e6 * k6.da + e7 * k7.da);
    const double err_f = h * (e1 * k1.df + e3 * k3.df + e4 * k4.df + e5 * k5.df + e6 * k6.df + e7 * k7.df);
    const double sc_a = tol + tol * std::fabs(y.a);
    const double sc_f = tol + tol * std::fmax(1.0, std::fabs(y.f));
    const double err = std::sqrt(0.5 * ((err_a / sc_a) * (err_a / sc_a) + (err_f / sc_f) * (err_f / sc_f)));

    if (err <= 1.0) {
      t += h;
      y = y5;
      y.validate();
    }
    const double fac = std::fmin(5.0, std::fmax(0.2, 0.9 * std::pow(err > 0 ? err : 1e-10, -0.2)));
    h *= fac;
    if (h < 1e-15) throw solver_error("homogeneous integrator step underflow");
  }
  if (t < t_end) throw solver_error("homogeneous integrator did not reach the horizon");
  return y;
}

inline HomogeneousPath homogeneous_sample(const HomogeneousState& s0, double T, std::size_t count,
                                          FormNorm conv, double tol = 1e-12) {
  HomogeneousPath p;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(count - 1);
    p.t.push_back(t);
    p.y.push_back(homogeneous_integrate(s0, t, conv, tol));
  }
  return p;
}

// materialize the homogeneous state on a grid (n = 8 keeps mesh invariants)
inline GeomState<3> homogeneous_to_grid(const HomogeneousState& s, const Mesh<3>& m) {
  GeomState<3> out = flat_state(m);
  for (index_t i = 0; i < m.size(); ++i) {
    for (int a = 0; a < 3; ++a) out.g.at(i, sym_at<3>(a, a)) = s.a;
    out.f.data[i] = s.f;
  }
  DegreeField<3>& top = out.H.ensure(3);
  for (auto& v : top.data) v = s.c;
  return out;
}

}  // namespace grf
