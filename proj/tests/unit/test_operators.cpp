#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "grf/operators.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {
constexpr double kTau = 6.283185307179586476925287;

Mesh<1> circle(index_t n, double L = kTau) { return Mesh<1>(n, {L}); }
Mesh<2> torus(index_t n, double L = kTau) { return Mesh<2>(n, {L, L}); }

// smooth periodic test functions built from a few low modes
double fun1(double x) { return std::sin(x) + 0.3 * std::cos(2.0 * x); }
double fun2(double x, double y) { return std::sin(x) * std::cos(y) + 0.2 * std::cos(2.0 * x + y); }
}  // namespace

TEST_CASE("derivatives of constants vanish identically") {
  Mesh<2> m = torus(16);
  MetricField<2> g = identity_metric(m);
  for (index_t i = 0; i < m.size(); ++i) {
    g.at(i, 0) = 1.4;
    g.at(i, 2) = 0.9;
  }
  ScalarField<2> f(m, 0.7), u(m, 3.2);
  VectorField<2> gr = gradient(g, u);
  for (double v : gr.data) REQUIRE(v == 0.0);
  ScalarField<2> lap = weighted_laplacian(g, f, u);
  for (double v : lap.data) REQUIRE(v == 0.0);
  SymField<2> hess_u = hessian(g, u);
  for (double v : hess_u.data) REQUIRE(v == 0.0);
}

TEST_CASE("flat circle eigenfunction: lap sin = -sin within O(h^2)") {
  Mesh<1> m = circle(64);
  MetricField<1> g = identity_metric(m);
  ScalarField<1> f(m), u(m);
  for (index_t i = 0; i < m.size(); ++i) u.data[i] = std::sin(m.point(i)[0]);
  ScalarField<1> lap = weighted_laplacian(g, f, u);
  double err = 0.0;
  for (index_t i = 0; i < m.size(); ++i)
    err = std::fmax(err, std::fabs(lap.data[i] + std::sin(m.point(i)[0])));
  const double h = m.h[0];
  REQUIRE(err < 0.5 * h * h);
}

TEST_CASE("weighted laplacian matches an independently assembled dense stencil (16-cell circle)") {
  // oracle: dense stencils built from the textbook formulas with explicit
  // index arithmetic, no shared code with the operator implementation
  const index_t n = 16;
  Mesh<1> m = circle(n);
  const double h = m.h[0];
  Rng rng(21);
  MetricField<1> g = identity_metric(m);
  ScalarField<1> f(m), u(m);
  for (index_t i = 0; i < n; ++i) {
    const double x = m.point(i)[0];
    g.at(i, 0) = 1.0 + 0.3 * std::sin(x) + 0.1 * std::cos(2 * x);
    f.data[i] = 0.4 * std::cos(x);
    u.data[i] = rng.uniform(-1.0, 1.0);
  }

  std::vector<double> dense(n, 0.0);
  {
    auto wrap = [&](index_t i) { return ((i % n) + n) % n; };
    std::vector<double> Du(n), flux(n);
    for (index_t i = 0; i < n; ++i) Du[i] = (u.data[wrap(i + 1)] - u.data[wrap(i - 1)]) / (2 * h);
    for (index_t i = 0; i < n; ++i) {
      const double sqg = std::sqrt(g.at(i, 0));
      flux[i] = sqg * (1.0 / g.at(i, 0)) * Du[i];
    }
    for (index_t i = 0; i < n; ++i) {
      const double sqg = std::sqrt(g.at(i, 0));
      const double div = (flux[wrap(i + 1)] - flux[wrap(i - 1)]) / (2 * h);
      const double Df = (f.data[wrap(i + 1)] - f.data[wrap(i - 1)]) / (2 * h);
      dense[i] = div / sqg - (1.0 / g.at(i, 0)) * Df * Du[i];
    }
  }

  ScalarField<1> lap = weighted_laplacian(g, f, u);
  for (index_t i = 0; i < n; ++i)
    REQUIRE(lap.data[i] == Catch::Approx(dense[i]).margin(1e-13));
}

TEST_CASE("discrete duality of the weighted divergence holds to 1e-12") {
  Rng rng(22);
  Mesh<2> m = torus(16);
  MetricField<2> g = identity_metric(m);
  ScalarField<2> f(m), psi(m);
  VectorField<2> X(m);
  for (index_t i = 0; i < m.size(); ++i) {
    auto p = m.point(i);
    g.at(i, 0) = 1.0 + 0.2 * std::sin(p[0]);
    g.at(i, 1) = 0.1 * std::sin(p[0] + p[1]);
    g.at(i, 2) = 1.0 + 0.2 * std::cos(p[1]);
    f.data[i] = 0.3 * std::cos(p[0]) * std::sin(p[1]);
    psi.data[i] = rng.uniform(-1.0, 1.0);
    X.at(i, 0) = rng.uniform(-1.0, 1.0);
    X.at(i, 1) = rng.uniform(-1.0, 1.0);
  }
  g.validate();

  ScalarField<2> w = volume_density(g);
  for (index_t i = 0; i < m.size(); ++i) w.data[i] *= std::exp(-f.data[i]);
  ScalarField<2> div = weighted_divergence(X, w);

  // lhs = int (div_f X) psi e^-f dV, rhs = -int <X, grad psi> e^-f dV
  CovectorField<2> dpsi = partials(psi);
  const double vol = m.cell_volume();
  double lhs = 0.0, rhs = 0.0, scale = 0.0;
  for (index_t i = 0; i < m.size(); ++i) {
    lhs += div.data[i] * psi.data[i] * w.data[i] * vol;
    double xdp = 0.0;
    for (int a = 0; a < 2; ++a) xdp += X.at(i, a) * dpsi.at(i, a);
    rhs -= xdp * w.data[i] * vol;
    scale += std::fabs(xdp) * w.data[i] * vol;
  }
  REQUIRE(std::fabs(lhs - rhs) <= 1e-12 * std::fmax(1.0, scale));
}

TEST_CASE("weighted divergence with f = 0 equals the plain divergence bitwise") {
  Rng rng(23);
  Mesh<2> m = torus(8);
  MetricField<2> g = identity_metric(m);
  VectorField<2> X(m);
  for (index_t i = 0; i < m.size(); ++i) {
    g.at(i, 0) = 1.0 + 0.2 * std::sin(m.point(i)[0]);
    g.at(i, 2) = 1.0 + 0.1 * std::cos(m.point(i)[1]);
    X.at(i, 0) = rng.uniform(-1, 1);
    X.at(i, 1) = rng.uniform(-1, 1);
  }
  ScalarField<2> f(m);  // zero
  ScalarField<2> w = volume_density(g);
  ScalarField<2> wf = w;
  for (index_t i = 0; i < m.size(); ++i) wf.data[i] *= std::exp(-f.data[i]);
  ScalarField<2> plain = weighted_divergence(X, w);
  ScalarField<2> weighted = weighted_divergence(X, wf);
  for (index_t i = 0; i < m.size(); ++i) REQUIRE(plain.data[i] == weighted.data[i]);
}

TEST_CASE("curvature: flat metric and any 1D metric are flat") {
  Mesh<2> m2 = torus(16);
  Curvature<2> c2 = curvature(identity_metric(m2));
  for (double v : c2.scalar.data) REQUIRE(v == 0.0);
  for (double v : c2.ricci.data) REQUIRE(v == 0.0);

  Mesh<1> m1 = circle(16);
  MetricField<1> g1 = identity_metric(m1);
  for (index_t i = 0; i < m1.size(); ++i) g1.at(i, 0) = 1.0 + 0.4 * std::sin(m1.point(i)[0]);
  Curvature<1> c1 = curvature(g1);
  for (double v : c1.scalar.data) REQUIRE(v == 0.0);
  for (double v : c1.ricci.data) REQUIRE(v == 0.0);
}

TEST_CASE("conformal torus curvature matches the spectral oracle at O(h^2)") {
  // g = e^{2u} delta => R = -2 e^{-2u} lap0 u; u is a trig monomial so the
  // spectral laplacian is the analytic one
  auto run = [&](index_t n) {
    Mesh<2> m = torus(n);
    MetricField<2> g(m);
    for (index_t i = 0; i < m.size(); ++i) {
      auto p = m.point(i);
      const double u = 0.1 * std::sin(p[0]) * std::sin(p[1]);
      const double e2u = std::exp(2.0 * u);
      g.at(i, 0) = e2u;
      g.at(i, 1) = 0.0;
      g.at(i, 2) = e2u;
    }
    Curvature<2> c = curvature(g);
    double err = 0.0;
    for (index_t i = 0; i < m.size(); ++i) {
      auto p = m.point(i);
      const double u = 0.1 * std::sin(p[0]) * std::sin(p[1]);
      const double lap0u = -2.0 * u;  // analytic laplacian of the mode
      const double want = -2.0 * std::exp(-2.0 * u) * lap0u;
      err = std::fmax(err, std::fabs(c.scalar.data[i] - want));
    }
    return err;
  };
  const double e32 = run(32), e64 = run(64), e128 = run(128);
  REQUIRE(std::log2(e32 / e64) >= 1.9);
  REQUIRE(std::log2(e64 / e128) >= 1.9);
}

TEST_CASE("hessian on a curved circle converges at second order") {
  auto run = [&](index_t n) {
    Mesh<1> m = circle(n);
    MetricField<1> g = identity_metric(m);
    for (index_t i = 0; i < m.size(); ++i) g.at(i, 0) = 1.0 + 0.3 * std::sin(m.point(i)[0]);
    ScalarField<1> u(m);
    for (index_t i = 0; i < m.size(); ++i) u.data[i] = fun1(m.point(i)[0]);
    SymField<1> hs = hessian(g, u);
    // oracle: u'' - Gamma u', Gamma = g'/(2g)
    double err = 0.0;
    for (index_t i = 0; i < m.size(); ++i) {
      const double x = m.point(i)[0];
      const double up = std::cos(x) - 0.6 * std::sin(2 * x);
      const double upp = -std::sin(x) - 1.2 * std::cos(2 * x);
      const double gp = 0.3 * std::cos(x);
      const double gamma = gp / (2.0 * (1.0 + 0.3 * std::sin(x)));
      err = std::fmax(err, std::fabs(hs.at(i, 0) - (upp - gamma * up)));
    }
    return err;
  };
  const double e32 = run(32), e64 = run(64), e128 = run(128);
  REQUIRE(std::log2(e32 / e64) >= 1.9);
  REQUIRE(std::log2(e64 / e128) >= 1.9);
}

TEST_CASE("2D weighted laplacian converges at second order on analytic data") {
  auto run = [&](index_t n) {
    Mesh<2> m = torus(n);
    MetricField<2> g = identity_metric(m);
    ScalarField<2> f(m), u(m);
    for (index_t i = 0; i < m.size(); ++i) {
      auto p = m.point(i);
      f.data[i] = 0.2 * std::sin(p[0] + p[1]);
      u.data[i] = fun2(p[0], p[1]);
    }
    ScalarField<2> lap = weighted_laplacian(g, f, u);
    double err = 0.0;
    for (index_t i = 0; i < m.size(); ++i) {
      auto p = m.point(i);
      const double x = p[0], y = p[1];
      const double ux = std::cos(x) * std::cos(y) - 0.4 * std::sin(2 * x + y);
      const double uy = -std::sin(x) * std::sin(y) - 0.2 * std::sin(2 * x + y);
      const double lap0 = -2.0 * std::sin(x) * std::cos(y) - 5.0 * 0.2 * std::cos(2 * x + y);
      err = std::fmax(err, std::fabs(lap.data[i] - (lap0 - ux * 0.2 * std::cos(x + y) -
                                                    uy * 0.2 * std::cos(x + y))));
    }
    return err;
  };
  const double e32 = run(32), e64 = run(64);
  REQUIRE(std::log2(e32 / e64) >= 1.9);
}
