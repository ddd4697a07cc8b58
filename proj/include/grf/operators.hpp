#pragma once

#include <array>
#include <cmath>

#include "grf/field.hpp"
#include "grf/forms.hpp"

// Metric-dependent differential operators, all second-order centered
// differences. The Laplace-Beltrami operator and the weighted divergence are
// written in divergence form so that summation by parts against the centered
// gradient holds to machine precision (discrete duality).

namespace grf {

// centered first difference of component c along axis a
template <int D, int C, typename Tag>
ScalarField<D> diff(const Field<D, C, Tag>& u, int c, int a) {
  const Mesh<D>& m = u.mesh;
  ScalarField<D> out(m);
  const double s = 1.0 / (2.0 * m.h[a]);
  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const index_t ip = m.shift(static_cast<index_t>(i), a, +1);
      const index_t im = m.shift(static_cast<index_t>(i), a, -1);
      out.data[i] = s * (u.at(ip, c) - u.at(im, c));
    }
  });
  return out;
}

// compact 3-point second difference along one axis
template <int D>
ScalarField<D> diff2_axis(const ScalarField<D>& u, int a) {
  const Mesh<D>& m = u.mesh;
  ScalarField<D> out(m);
  const double s = 1.0 / (m.h[a] * m.h[a]);
  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const index_t ip = m.shift(static_cast<index_t>(i), a, +1);
      const index_t im = m.shift(static_cast<index_t>(i), a, -1);
      out.data[i] = s * (u.at(ip, 0) - 2.0 * u.data[i] + u.at(im, 0));
    }
  });
  return out;
}

// coordinate partials of a scalar: du[a] = D_a u
template <int D>
CovectorField<D> partials(const ScalarField<D>& u) {
  CovectorField<D> out(u.mesh);
  for (int a = 0; a < D; ++a) {
    ScalarField<D> d = diff(u, 0, a);
    for (index_t i = 0; i < u.size(); ++i) out.at(i, a) = d.data[i];
  }
  return out;
}

// contravariant gradient: (grad u)^i = g^{ij} D_j u
template <int D>
VectorField<D> gradient(const MetricField<D>& g, const ScalarField<D>& u) {
  require_same_mesh(g.mesh, u.mesh);
  CovectorField<D> du = partials(u);
  VectorField<D> out(u.mesh);
  parallel_for(static_cast<std::size_t>(u.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      Vec<D> v{};
      for (int a = 0; a < D; ++a) v[a] = du.at(static_cast<index_t>(i), a);
      const Vec<D> gv = sym_apply<D>(gi, v);
      for (int a = 0; a < D; ++a) out.at(static_cast<index_t>(i), a) = gv[a];
    }
  });
  return out;
}

// <grad u, grad v>_g = g^{ij} D_i u D_j v
template <int D>
ScalarField<D> grad_inner(const MetricField<D>& g, const ScalarField<D>& u, const ScalarField<D>& v) {
  CovectorField<D> du = partials(u);
  CovectorField<D> dv = partials(v);
  ScalarField<D> out(u.mesh);
  parallel_for(static_cast<std::size_t>(u.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      Vec<D> a{}, bb{};
      for (int c = 0; c < D; ++c) { a[c] = du.at(static_cast<index_t>(i), c); bb[c] = dv.at(static_cast<index_t>(i), c); }
      out.data[i] = sym_quad<D>(gi, a, bb);
    }
  });
  return out;
}

// weighted divergence of a vector field against weight w > 0:
// div_w X = (1/w) sum_a D_a (w X^a). With w = e^{-f} sqrt(det g) this is
// e^{f} div(e^{-f} X); with w = sqrt(det g) it is the plain divergence.
template <int D>
ScalarField<D> weighted_divergence(const VectorField<D>& X, const ScalarField<D>& w) {
  require_same_mesh(X.mesh, w.mesh);
  const Mesh<D>& m = X.mesh;
  ScalarField<D> out(m);
  for (int a = 0; a < D; ++a) {
    const double s = 1.0 / (2.0 * m.h[a]);
    parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const index_t ip = m.shift(static_cast<index_t>(i), a, +1);
        const index_t im = m.shift(static_cast<index_t>(i), a, -1);
        out.data[i] += s * (w.at(ip, 0) * X.at(ip, a) - w.at(im, 0) * X.at(im, a));
      }
    });
  }
  for (index_t i = 0; i < m.size(); ++i) out.data[i] /= w.data[i];
  return out;
}

// Laplace-Beltrami in divergence form: (1/sqrt g) D_a( sqrt g g^{ab} D_b u )
template <int D>
ScalarField<D> laplace_beltrami(const MetricField<D>& g, const ScalarField<D>& u) {
  require_same_mesh(g.mesh, u.mesh);
  VectorField<D> gu = gradient(g, u);
  ScalarField<D> sq = volume_density(g);
  return weighted_divergence(gu, sq);
}

// weighted heat operator spatial part: Delta_f u = Delta u - <grad f, grad u>
template <int D>
ScalarField<D> weighted_laplacian(const MetricField<D>& g, const ScalarField<D>& f,
                                  const ScalarField<D>& u) {
  ScalarField<D> lap = laplace_beltrami(g, u);
  ScalarField<D> adv = grad_inner(g, f, u);
  for (index_t i = 0; i < u.size(); ++i) lap.data[i] -= adv.data[i];
  return lap;
}

// Christoffel symbols of the differenced metric. Packing: chris[c] for
// c = k * sym_size + sym_at(i,j) holds Gamma^k_{ij}.
template <int D>
struct ChristoffelField {
  Mesh<D> mesh;
  std::vector<double> data;  // size() * D * sym_size<D>
  double& at(index_t node, int k, int ij) {
    return data[(static_cast<std::size_t>(node) * D + k) * sym_size<D> + ij];
  }
  double at(index_t node, int k, int ij) const {
    return data[(static_cast<std::size_t>(node) * D + k) * sym_size<D> + ij];
  }
};

template <int D>
ChristoffelField<D> christoffels(const MetricField<D>& g) {
  const Mesh<D>& m = g.mesh;
  ChristoffelField<D> out{m, std::vector<double>(static_cast<std::size_t>(m.size()) * D * sym_size<D>, 0.0)};
  // dg[a][ij] = D_a g_{ij}
  std::array<std::array<ScalarField<D>, sym_size<D>>, D> dg;
  for (int a = 0; a < D; ++a)
    for (int ij = 0; ij < sym_size<D>; ++ij) dg[a][ij] = diff(g, ij, a);
  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      for (int k = 0; k < D; ++k)
        for (int p = 0; p < D; ++p)
          for (int q = p; q < D; ++q) {
            double s = 0.0;
            for (int l = 0; l < D; ++l) {
              const double t = dg[p][sym_at<D>(q, l)].data[i] + dg[q][sym_at<D>(p, l)].data[i] -
                               dg[l][sym_at<D>(p, q)].data[i];
              s += gi[sym_at<D>(k, l)] * t;
            }
            out.at(static_cast<index_t>(i), k, sym_at<D>(p, q)) = 0.5 * s;
          }
    }
  });
  return out;
}

// covariant Hessian: (hess u)_{ij} = D_i D_j u - Gamma^k_{ij} D_k u
template <int D>
SymField<D> hessian(const MetricField<D>& g, const ScalarField<D>& u,
                    const ChristoffelField<D>* chris = nullptr) {
  const Mesh<D>& m = u.mesh;
  ChristoffelField<D> local;
  if (!chris) {
    local = christoffels(g);
    chris = &local;
  }
  CovectorField<D> du = partials(u);
  SymField<D> out(m);
  for (int p = 0; p < D; ++p)
    for (int q = p; q < D; ++q) {
      ScalarField<D> dd = (p == q) ? diff2_axis(u, p) : diff(diff(u, 0, p), 0, q);
      const int ij = sym_at<D>(p, q);
      for (index_t i = 0; i < m.size(); ++i) {
        double s = dd.data[i];
        for (int k = 0; k < D; ++k) s -= chris->at(i, k, ij) * du.at(i, k);
        out.at(i, ij) = s;
      }
    }
  return out;
}

// Ricci tensor and scalar curvature.
// D=1: identically zero. D=2: R from the coordinate Riemann formula, then
// Rc = R g / 2. D=3: Ricci by contraction of the Riemann tensor.
template <int D>
struct Curvature {
  SymField<D> ricci;
  ScalarField<D> scalar;
};

template <int D>
Curvature<D> curvature(const MetricField<D>& g) {
  const Mesh<D>& m = g.mesh;
  Curvature<D> out{SymField<D>(m), ScalarField<D>(m)};
  if constexpr (D == 1) return out;

  ChristoffelField<D> ch = christoffels(g);
  // dch[a] = D_a Gamma, same packing as ChristoffelField
  std::array<std::vector<double>, D> dch;
  for (int a = 0; a < D; ++a) dch[a].assign(ch.data.size(), 0.0);
  {
    const double inv2h[3] = {1.0 / (2.0 * m.h[0]), D > 1 ? 1.0 / (2.0 * m.h[1]) : 0.0,
                             D > 2 ? 1.0 / (2.0 * m.h[2]) : 0.0};
    const std::size_t stride = static_cast<std::size_t>(D) * sym_size<D>;
    for (int a = 0; a < D; ++a) {
      parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const index_t ip = m.shift(static_cast<index_t>(i), a, +1);
          const index_t im = m.shift(static_cast<index_t>(i), a, -1);
          for (std::size_t c = 0; c < stride; ++c)
            dch[a][i * stride + c] =
                inv2h[a] * (ch.data[static_cast<std::size_t>(ip) * stride + c] -
                            ch.data[static_cast<std::size_t>(im) * stride + c]);
        }
      });
    }
  }

  auto dgam = [&](int a, index_t node, int k, int ij) {
    return dch[a][(static_cast<std::size_t>(node) * D + k) * sym_size<D> + ij];
  };

  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t ii = b; ii < e; ++ii) {
      const index_t i = static_cast<index_t>(ii);
      const SymMat<D> gm = g.matrix(i);
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      SymMat<D> ric{};
      // R_{jk} = d_i Gamma^i_{jk} - d_j Gamma^i_{ik} + Gamma^i_{ip} Gamma^p_{jk}
      //          - Gamma^i_{jp} Gamma^p_{ik}
      for (int j = 0; j < D; ++j)
        for (int k = j; k < D; ++k) {
          double s = 0.0;
          for (int a = 0; a < D; ++a) s += dgam(a, i, a, sym_at<D>(j, k));
          for (int a = 0; a < D; ++a) s -= dgam(j, i, a, sym_at<D>(a, k));
          for (int a = 0; a < D; ++a)
            for (int p = 0; p < D; ++p) {
              s += ch.at(i, a, sym_at<D>(a, p)) * ch.at(i, p, sym_at<D>(j, k));
              s -= ch.at(i, a, sym_at<D>(j, p)) * ch.at(i, p, sym_at<D>(a, k));
            }
          ric[sym_at<D>(j, k)] = s;
        }
      const double R = sym_trace_g<D>(ric, gi);
      out.scalar.data[ii] = R;
      if constexpr (D == 2) {
        // two-dimensional Ricci is pure trace
        for (int c = 0; c < sym_size<D>; ++c) out.ricci.data[ii * sym_size<D> + c] = 0.5 * R * gm[c];
      } else {
        for (int c = 0; c < sym_size<D>; ++c) out.ricci.data[ii * sym_size<D> + c] = ric[c];
      }
    }
  });
  return out;
}

// divergence of a covariant symmetric 2-tensor: (div T)_j = g^{ik} nabla_i T_{kj}
template <int D>
CovectorField<D> divergence_sym(const MetricField<D>& g, const SymField<D>& T,
                                const ChristoffelField<D>& ch) {
  const Mesh<D>& m = g.mesh;
  CovectorField<D> out(m);
  std::array<std::array<ScalarField<D>, sym_size<D>>, D> dT;
  for (int a = 0; a < D; ++a)
    for (int c = 0; c < sym_size<D>; ++c) dT[a][c] = diff(T, c, a);
  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t ii = b; ii < e; ++ii) {
      const index_t i = static_cast<index_t>(ii);
      const SymMat<D> gm = g.matrix(i);
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      for (int j = 0; j < D; ++j) {
        double s = 0.0;
        for (int a = 0; a < D; ++a)
          for (int k = 0; k < D; ++k) {
            double cov = dT[a][sym_at<D>(k, j)].data[ii];
            for (int mm = 0; mm < D; ++mm) {
              cov -= ch.at(i, mm, sym_at<D>(a, k)) * T.at(i, sym_at<D>(mm, j));
              cov -= ch.at(i, mm, sym_at<D>(a, j)) * T.at(i, sym_at<D>(k, mm));
            }
            s += gi[sym_at<D>(a, k)] * cov;
          }
        out.at(i, j) = s;
      }
    }
  });
  return out;
}

// divergence of a 1-form: g^{ij} nabla_i w_j
template <int D>
ScalarField<D> divergence_covector(const MetricField<D>& g, const CovectorField<D>& w,
                                   const ChristoffelField<D>& ch) {
  const Mesh<D>& m = g.mesh;
  ScalarField<D> out(m);
  std::array<std::array<ScalarField<D>, D>, D> dw;
  for (int a = 0; a < D; ++a)
    for (int c = 0; c < D; ++c) dw[a][c] = diff(w, c, a);
  parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t b, std::size_t e) {
    for (std::size_t ii = b; ii < e; ++ii) {
      const index_t i = static_cast<index_t>(ii);
      const SymMat<D> gm = g.matrix(i);
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      double s = 0.0;
      for (int a = 0; a < D; ++a)
        for (int j = 0; j < D; ++j) {
          double cov = dw[a][j].data[ii];
          for (int k = 0; k < D; ++k) cov -= ch.at(i, k, sym_at<D>(a, j)) * w.at(i, k);
          s += gi[sym_at<D>(a, j)] * cov;
        }
      out.data[ii] = s;
    }
  });
  return out;
}

}  // namespace grf
