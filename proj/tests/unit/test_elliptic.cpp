#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "grf/elliptic.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {
constexpr double kTau = 6.283185307179586476925287;

// dense SPD solve of (A + sum kappa kappa^T / N) x = b by Cholesky; the rank
// augmentation pins the kernel components to zero, matching the deflated CG
template <int D>
std::vector<double> dense_oracle_solve(const EllipticOperator<D>& A, const KernelProjector<D>& proj,
                                       std::vector<double> b) {
  const std::size_t N = static_cast<std::size_t>(A.mesh.size());
  std::vector<std::vector<double>> M(N, std::vector<double>(N, 0.0));
  std::vector<double> unit(N, 0.0), col(N);
  for (std::size_t j = 0; j < N; ++j) {
    unit.assign(N, 0.0);
    unit[j] = 1.0;
    A.apply(unit, col);
    for (std::size_t i = 0; i < N; ++i) M[i][j] = col[i];
  }
  for (int s = 0; s < (1 << D); ++s)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        M[i][j] += proj.parity(static_cast<index_t>(i), s) * proj.parity(static_cast<index_t>(j), s) /
                   static_cast<double>(N);
  // Cholesky
  std::vector<std::vector<double>> L(N, std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = M[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j)
        L[i][i] = std::sqrt(s);
      else
        L[i][j] = s / L[j][j];
    }
  std::vector<double> y(N), x(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  for (std::size_t ii = N; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < N; ++k) s -= L[k][ii] * x[k];
    x[ii] = s / L[ii][ii];
  }
  return x;
}
}  // namespace

TEST_CASE("zero source yields the zero potential") {
  Mesh<1> m(16, {kTau});
  GeomState<1> s = flat_state(m);
  ScalarField<1> rho(m, 1.0 / kTau), sigma(m, 0.0);
  EllipticSolution<1> sol = continuity_solve(rho, sigma, s);
  for (double v : sol.phi.data) REQUIRE(v == 0.0);
}

TEST_CASE("uniform density on the flat circle: eigenfunction solve") {
  // -rho lap phi = sigma with rho = 1/2pi, sigma = eps cos x:
  // continuum solution phi = 2 pi eps cos x. The discrete solve reproduces
  // the discrete system to tol and the continuum field to O(h^2).
  Mesh<1> m(64, {kTau});
  GeomState<1> s = flat_state(m);
  const double eps = 1e-3;
  ScalarField<1> rho(m, 1.0 / kTau), sigma(m);
  for (index_t i = 0; i < m.size(); ++i) sigma.data[i] = eps * std::cos(m.point(i)[0]);
  EllipticSolution<1> sol = continuity_solve(rho, sigma, s);
  REQUIRE(sol.residual <= kEllipticTol);

  double err = 0.0;
  for (index_t i = 0; i < m.size(); ++i)
    err = std::fmax(err, std::fabs(sol.phi.data[i] - kTau * eps * std::cos(m.point(i)[0])));
  const double h = m.h[0];
  REQUIRE(err <= kTau * eps * h * h);  // O(h^2) from the discrete eigenvalue

  // round trip through the discrete operator: residual at solver tolerance
  ScalarField<1> w = s.weight();
  VectorField<1> gp = gradient(s.g, sol.phi);
  for (index_t i = 0; i < m.size(); ++i) gp.at(i, 0) *= rho.data[i];
  ScalarField<1> div = weighted_divergence(gp, w);
  double resid = 0.0, scale = 0.0;
  for (index_t i = 0; i < m.size(); ++i) {
    resid += (div.data[i] + sigma.data[i]) * (div.data[i] + sigma.data[i]);
    scale += sigma.data[i] * sigma.data[i];
  }
  REQUIRE(std::sqrt(resid / scale) <= 10 * kEllipticTol);
}

TEST_CASE("CG solution matches the dense oracle to 1e-10 on a random instance") {
  Rng rng(41);
  Mesh<1> m(8, {kTau});
  GeomState<1> s = flat_state(m);
  for (index_t i = 0; i < m.size(); ++i) {
    const double x = m.point(i)[0];
    s.g.at(i, 0) = 1.0 + 0.3 * std::sin(x);
    s.f.data[i] = 0.2 * std::cos(x);
  }
  ScalarField<1> rho(m);
  for (index_t i = 0; i < m.size(); ++i) rho.data[i] = 0.1 + rng.uniform(0.0, 1.0);
  ScalarField<1> sigma(m);
  for (index_t i = 0; i < m.size(); ++i) sigma.data[i] = rng.uniform(-1.0, 1.0);

  ScalarField<1> w = s.weight();
  // project sigma the way the solver does
  const double wm = std::accumulate(w.data.begin(), w.data.end(), 0.0);
  double sm = 0.0;
  for (index_t i = 0; i < m.size(); ++i) sm += sigma.data[i] * w.data[i];
  const double gamma = sm / wm;

  EllipticOperator<1> A = EllipticOperator<1>::build(w, rho, s.g);
  KernelProjector<1> proj(m);
  std::vector<double> b(m.size());
  for (index_t i = 0; i < m.size(); ++i) b[i] = w.data[i] * (sigma.data[i] - gamma);
  proj.project(b);
  std::vector<double> dense = dense_oracle_solve(A, proj, b);
  // same gauge as the solver: zero weighted mean
  double dm = 0.0;
  for (index_t i = 0; i < m.size(); ++i) dm += dense[i] * w.data[i];
  for (index_t i = 0; i < m.size(); ++i) dense[i] -= dm / wm;

  EllipticSolution<1> sol = continuity_solve(rho, sigma, s, 1e-13);
  for (index_t i = 0; i < m.size(); ++i)
    REQUIRE(std::fabs(sol.phi.data[i] - dense[i]) <= 1e-10);
}

TEST_CASE("2D variable-coefficient solve is self-adjoint and converges") {
  Rng rng(42);
  Mesh<2> m(16, {kTau, kTau});
  GeomState<2> s = flat_state(m);
  for (index_t i = 0; i < m.size(); ++i) {
    auto p = m.point(i);
    s.g.at(i, 0) = 1.0 + 0.2 * std::sin(p[0]);
    s.g.at(i, 1) = 0.05 * std::cos(p[0] + p[1]);
    s.g.at(i, 2) = 1.0 + 0.2 * std::cos(p[1]);
    s.f.data[i] = 0.3 * std::sin(p[1]);
  }
  s.g.validate();
  ScalarField<2> rho(m);
  for (index_t i = 0; i < m.size(); ++i)
    rho.data[i] = 0.5 + 0.2 * std::sin(m.point(i)[0] + 2 * m.point(i)[1]);

  ScalarField<2> w = s.weight();
  EllipticOperator<2> A = EllipticOperator<2>::build(w, rho, s.g);
  std::vector<double> u(m.size()), v(m.size()), Au, Av;
  for (auto& x : u) x = rng.uniform(-1, 1);
  for (auto& x : v) x = rng.uniform(-1, 1);
  A.apply(u, Au);
  A.apply(v, Av);
  double uAv = 0.0, vAu = 0.0, mag = 0.0;
  for (index_t i = 0; i < m.size(); ++i) {
    uAv += u[i] * Av[i];
    vAu += v[i] * Au[i];
    mag += std::fabs(u[i] * Av[i]);
  }
  REQUIRE(std::fabs(uAv - vAu) <= 1e-12 * mag);

  ScalarField<2> sigma(m);
  for (index_t i = 0; i < m.size(); ++i) {
    auto p = m.point(i);
    sigma.data[i] = std::sin(p[0]) * std::cos(p[1]) + 0.3 * std::sin(2 * p[1]);
  }
  EllipticSolution<2> sol = continuity_solve(rho, sigma, s);
  REQUIRE(sol.residual <= kEllipticTol);
  REQUIRE(sol.iterations < 200);

  // mean-zero gauge in the weighted measure
  double mean = 0.0;
  for (index_t i = 0; i < m.size(); ++i) mean += sol.phi.data[i] * w.data[i];
  REQUIRE(std::fabs(mean) <= 1e-10);
}

TEST_CASE("density below the floor is rejected") {
  Mesh<1> m(16, {kTau});
  GeomState<1> s = flat_state(m);
  ScalarField<1> rho(m, 1.0), sigma(m, 0.0);
  rho.data[5] = 0.0;
  REQUIRE_THROWS_AS(continuity_solve(rho, sigma, s), solver_error);
}
