#include <catch2/catch_amalgamated.hpp>

#include "grf/curvature_hf.hpp"
#include "grf/forms.hpp"
#include "grf/rng.hpp"

using namespace grf;

namespace {

template <int D>
MetricField<D> random_spd_metric(const Mesh<D>& m, Rng& rng, double amp = 0.3) {
  MetricField<D> g = identity_metric(m);
  for (index_t i = 0; i < m.size(); ++i) {
    for (int a = 0; a < D; ++a) g.at(i, sym_at<D>(a, a)) += rng.uniform(-amp, amp);
    for (int a = 0; a < D; ++a)
      for (int b = a + 1; b < D; ++b) g.at(i, sym_at<D>(a, b)) = rng.uniform(-amp / 2, amp / 2);
  }
  g.validate();
  return g;
}

template <int D>
Polyform<D> random_polyform(const Mesh<D>& m, Rng& rng) {
  Polyform<D> H(m);
  for (int k = 1; k <= D; ++k) {
    DegreeField<D>& p = H.ensure(k);
    for (auto& v : p.data) v = rng.uniform(-1.0, 1.0);
  }
  return H;
}

}  // namespace

TEST_CASE("trace identity tr_g H^2_k = k |H_k|^2 holds pointwise to 1e-12") {
  Rng rng(11);
  auto check = [&]<int D>() {
    Mesh<D> m(8, [] { std::array<double, D> L{}; L.fill(1.0); return L; }());
    MetricField<D> g = random_spd_metric<D>(m, rng);
    for (int k = 1; k <= D; ++k) {
      Polyform<D> H(m);
      DegreeField<D>& p = H.ensure(k);
      for (auto& v : p.data) v = rng.uniform(-1.0, 1.0);
      SymField<D> h2 = h_squared(g, H, FormNorm::normalized);
      ScalarField<D> n2 = form_norm2(p, g);
      for (index_t i = 0; i < m.size(); ++i) {
        const SymMat<D> gm = g.matrix(i);
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        SymMat<D> t{};
        for (int c = 0; c < sym_size<D>; ++c) t[c] = h2.at(i, c);
        const double tr = sym_trace_g<D>(t, gi);
        const double want = k * n2.data[i];
        REQUIRE(std::fabs(tr - want) <= 1e-12 * std::fmax(1.0, std::fabs(want)));
      }
    }
  };
  check.operator()<1>();
  check.operator()<2>();
  check.operator()<3>();
}

TEST_CASE("h_squared is positive semidefinite and vanishes for H=0") {
  Rng rng(12);
  Mesh<2> m(16, {6.2831853071795865, 6.2831853071795865});
  MetricField<2> g = random_spd_metric<2>(m, rng);
  Polyform<2> zero(m);
  SymField<2> h2z = h_squared(g, zero);
  for (double v : h2z.data) REQUIRE(v == 0.0);

  Polyform<2> H = random_polyform<2>(m, rng);
  SymField<2> h2 = h_squared(g, H);
  for (index_t i = 0; i < m.size(); ++i) {
    SymMat<2> t{};
    for (int c = 0; c < sym_size<2>; ++c) t[c] = h2.at(i, c);
    REQUIRE(sym_min_eig<2>(t) >= -1e-12);
  }
}

TEST_CASE("constant 2-form on the flat unit-length torus: hand values") {
  // H = c dx^dy with unit axes: |H|^2 = c^2, hat = tilde = c^2/2, H^2 = c^2 I
  Mesh<2> m(8, {1.0, 1.0});
  MetricField<2> g = identity_metric(m);
  const double c = 1.7;
  Polyform<2> H(m);
  DegreeField<2>& p = H.ensure(2);
  for (auto& v : p.data) v = c;

  ScalarField<2> n2 = form_norm2(p, g);
  ScalarField<2> hat = wnorm_hat(g, H);
  ScalarField<2> tilde = wnorm_tilde(g, H);
  SymField<2> h2 = h_squared(g, H);
  for (index_t i = 0; i < m.size(); ++i) {
    REQUIRE(n2.data[i] == Catch::Approx(c * c).margin(1e-14));
    REQUIRE(hat.data[i] == Catch::Approx(c * c / 2).margin(1e-14));
    REQUIRE(tilde.data[i] == Catch::Approx(c * c / 2).margin(1e-14));
    REQUIRE(h2.at(i, sym_at<2>(0, 0)) == Catch::Approx(c * c).margin(1e-14));
    REQUIRE(h2.at(i, sym_at<2>(0, 1)) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(h2.at(i, sym_at<2>(1, 1)) == Catch::Approx(c * c).margin(1e-14));
  }
}

TEST_CASE("pure degree-1 polyform has zero tilde norm") {
  Rng rng(13);
  Mesh<1> m(16, {2.0});
  MetricField<1> g = identity_metric(m);
  Polyform<1> H(m);
  DegreeField<1>& p = H.ensure(1);
  for (auto& v : p.data) v = rng.uniform(-2.0, 2.0);
  ScalarField<1> tilde = wnorm_tilde(g, H);
  for (double v : tilde.data) REQUIRE(v == 0.0);
}

TEST_CASE("rank-one case: H1 = a(x) dx on the circle gives H^2 = a^2 dx^2") {
  Rng rng(14);
  Mesh<1> m(8, {1.0});
  MetricField<1> g = identity_metric(m);
  for (index_t i = 0; i < m.size(); ++i) g.at(i, 0) = 1.0 + rng.uniform(-0.2, 0.2);
  Polyform<1> H(m);
  DegreeField<1>& p = H.ensure(1);
  for (auto& v : p.data) v = rng.uniform(-1.0, 1.0);
  SymField<1> h2 = h_squared(g, H);
  for (index_t i = 0; i < m.size(); ++i) {
    // H^2(e_0, e_0) = (i_{e_0} H)^2, a 0-form product: the pointwise square
    const double want = p.data[i] * p.data[i];
    REQUIRE(h2.at(i, 0) == Catch::Approx(want).margin(1e-14));
  }
}

TEST_CASE("discrete exterior derivative squares to zero at roundoff") {
  // centered difference operators commute analytically; floating point leaves
  // only operation-order noise, far below the closedness tolerance
  Rng rng(15);
  Mesh<3> m(8, {1.0, 2.0, 3.0});
  for (int k = 0; k <= 1; ++k) {
    DegreeField<3> a(m, k);
    for (auto& v : a.data) v = rng.uniform(-1.0, 1.0);
    DegreeField<3> dda = exterior_derivative(exterior_derivative(a));
    for (double v : dda.data) REQUIRE(std::fabs(v) < 1e-13);
  }
}

TEST_CASE("codifferential is the exact adjoint of d") {
  Rng rng(16);
  auto check = [&]<int D>() {
    Mesh<D> m(8, [] { std::array<double, D> L{}; L.fill(2.0); return L; }());
    MetricField<D> g = random_spd_metric<D>(m, rng, 0.25);
    ScalarField<D> sq = volume_density(g);
    const double vol = m.cell_volume();
    for (int k = 1; k <= D; ++k) {
      DegreeField<D> beta(m, k);
      DegreeField<D> alpha(m, k - 1);
      for (auto& v : beta.data) v = rng.uniform(-1.0, 1.0);
      for (auto& v : alpha.data) v = rng.uniform(-1.0, 1.0);
      DegreeField<D> da = exterior_derivative(alpha);
      DegreeField<D> sb = codifferential(beta, g);
      // (beta, d alpha) = (d* beta, alpha) under sqrt(g) dx
      double lhs = 0.0, rhs = 0.0;
      const int nck = binom(D, k), ncj = binom(D, k - 1);
      for (index_t i = 0; i < m.size(); ++i) {
        const SymMat<D> gm = g.matrix(i);
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        const auto Gk = FormGram<D>::build(k, gi);
        const auto Gj = FormGram<D>::build(k - 1, gi);
        lhs += sq.data[i] * Gk.inner(&beta.data[static_cast<std::size_t>(i) * nck],
                                     &da.data[static_cast<std::size_t>(i) * nck], nck) * vol;
        rhs += sq.data[i] * Gj.inner(&sb.data[static_cast<std::size_t>(i) * ncj],
                                     &alpha.data[static_cast<std::size_t>(i) * ncj], ncj) * vol;
      }
      REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12 * (1.0 + std::fabs(lhs))));
    }
  };
  check.operator()<1>();
  check.operator()<2>();
  check.operator()<3>();
}

TEST_CASE("codifferential of a 2-form on the flat torus matches the hand formula") {
  // H = c(x,y) dx^dy  =>  d*H = c_y dx - c_x dy
  Mesh<2> m(64, {6.283185307179586, 6.283185307179586});
  MetricField<2> g = identity_metric(m);
  DegreeField<2> H(m, 2);
  for (index_t i = 0; i < m.size(); ++i) {
    auto x = m.point(i);
    H.at(i, 0) = std::sin(x[0]) * std::cos(2.0 * x[1]);
  }
  DegreeField<2> ds = codifferential(H, g);
  double err = 0.0;
  for (index_t i = 0; i < m.size(); ++i) {
    auto x = m.point(i);
    const double cy = -2.0 * std::sin(x[0]) * std::sin(2.0 * x[1]);
    const double cx = std::cos(x[0]) * std::cos(2.0 * x[1]);
    err = std::fmax(err, std::fabs(ds.at(i, 0) - cy));
    err = std::fmax(err, std::fabs(ds.at(i, 1) + cx));
  }
  // centered differences of modes 1 and 2, h = 2pi/64
  REQUIRE(err < 2e-2);
  REQUIRE(err > 0.0);
}
