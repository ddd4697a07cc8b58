#include <catch2/catch_amalgamated.hpp>

#include "grf/field.hpp"
#include "grf/mesh.hpp"
#include "grf/reduce.hpp"
#include "grf/rng.hpp"

using namespace grf;

TEST_CASE("mesh indexing round-trips and wraps periodically") {
  Mesh<2> m(8, {2.0, 4.0});
  REQUIRE(m.size() == 64);
  REQUIRE(m.h[0] == Catch::Approx(0.25));
  REQUIRE(m.h[1] == Catch::Approx(0.5));
  for (index_t i = 0; i < m.size(); ++i) REQUIRE(m.flat(m.coords(i)) == i);
  const index_t corner = m.flat({7, 7});
  REQUIRE(m.shift(corner, 0, +1) == m.flat({0, 7}));
  REQUIRE(m.shift(corner, 1, +1) == m.flat({7, 0}));
  REQUIRE(m.shift(m.flat({0, 0}), 0, -1) == m.flat({7, 0}));
}

TEST_CASE("mesh rejects bad sizes") {
  REQUIRE_THROWS_AS((Mesh<1>(12, {1.0})), config_error);
  REQUIRE_THROWS_AS((Mesh<1>(4, {1.0})), config_error);
  REQUIRE_THROWS_AS((Mesh<2>(16, {1.0, -2.0})), config_error);
}

TEST_CASE("pairwise reductions are identical across thread counts") {
  Rng rng(7);
  const std::size_t n = 100000;
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);

  set_thread_count(1);
  const double s1 = parallel_sum(n, [&](std::size_t i) { return v[i] * v[i]; });
  set_thread_count(4);
  const double s4 = parallel_sum(n, [&](std::size_t i) { return v[i] * v[i]; });
  set_thread_count(3);
  const double s3 = parallel_sum(n, [&](std::size_t i) { return v[i] * v[i]; });
  set_thread_count(1);

  REQUIRE(s1 == s4);
  REQUIRE(s1 == s3);
  REQUIRE(s1 == Catch::Approx(n / 3.0).epsilon(0.05));
}

TEST_CASE("metric validation flags the offending node") {
  Mesh<2> m(8, {1.0, 1.0});
  MetricField<2> g = identity_metric(m);
  g.at(13, sym_at<2>(0, 0)) = -1.0;
  try {
    g.validate();
    FAIL("expected spd_error");
  } catch (const spd_error& e) {
    REQUIRE(e.node == 13);
  }
}

TEST_CASE("min eigenvalue formulas agree with hand values") {
  SymMat<2> a{2.0, 1.0, 2.0};  // eigs 1, 3
  REQUIRE(sym_min_eig<2>(a) == Catch::Approx(1.0));
  SymMat<3> b{2.0, 0.0, 0.0, 3.0, 0.0, 5.0};
  REQUIRE(sym_min_eig<3>(b) == Catch::Approx(2.0));
  SymMat<3> c{2.0, 1.0, 0.0, 2.0, 1.0, 2.0};  // tridiag [2,1;1,2,1;0,1,2]: eigs 2, 2±sqrt2
  REQUIRE(sym_min_eig<3>(c) == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("sym inverse and determinant") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    SymMat<3> g{};
    for (int i = 0; i < 3; ++i) g[sym_at<3>(i, i)] = 1.0 + rng.uniform(0.0, 1.0);
    g[sym_at<3>(0, 1)] = rng.uniform(-0.3, 0.3);
    g[sym_at<3>(0, 2)] = rng.uniform(-0.3, 0.3);
    g[sym_at<3>(1, 2)] = rng.uniform(-0.3, 0.3);
    const double det = sym_det<3>(g);
    const SymMat<3> gi = sym_inverse<3>(g, det);
    // g * gi = identity
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += g[sym_at<3>(i, k)] * gi[sym_at<3>(k, j)];
        REQUIRE(s == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
      }
  }
}
