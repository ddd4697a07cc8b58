#pragma once

#include <array>
#include <cmath>

#include "grf/convention.hpp"
#include "grf/forms.hpp"
#include "grf/operators.hpp"

// Weighted (dilaton + polyform) curvature quantities:
//   mixed Ricci  = (Rc - H^2/4 + hess w)  (+)  -(d* H + i_{grad w} H)/2
//   scalar       = R - wsum/4 + 2 lap(w) - |grad w|^2
// where w is the weight function (the dilaton f, or f - phi), and wsum / H^2
// carry the convention weights from convention.hpp.

namespace grf {

// H^2(X,Y) = sum_k alpha_k <i_X H_k, i_Y H_k>, positive semidefinite
template <int D>
SymField<D> h_squared(const MetricField<D>& g, const Polyform<D>& H,
                      FormNorm c = FormNorm::normalized) {
  using FT = FormTables<D>;
  SymField<D> out(g.mesh);
  const index_t N = g.mesh.size();
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k)) continue;
    const double wk = conv::h2_weight(c, k);
    const DegreeField<D>& Hk = H.part[k];
    const int ncj = binom(D, k - 1);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t bb, std::size_t ee) {
      for (std::size_t i = bb; i < ee; ++i) {
        const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        const auto G = FormGram<D>::build(k - 1, gi);
        // rows of the coordinate interior products i_{e_a} H_k
        std::array<std::array<double, FT::max_comps>, D> rows{};
        for (int a = 0; a < D; ++a)
          for (int j = 0; j < ncj; ++j) {
            const auto ins = FT::insert(k - 1, j, a);
            rows[a][j] = ins.comp >= 0 ? ins.sign * Hk.at(static_cast<index_t>(i), ins.comp) : 0.0;
          }
        for (int a = 0; a < D; ++a)
          for (int b2 = a; b2 < D; ++b2)
            out.at(static_cast<index_t>(i), sym_at<D>(a, b2)) +=
                wk * G.inner(rows[a].data(), rows[b2].data(), ncj);
      }
    });
  }
  return out;
}

// per-degree squared norms |H_k|^2 in the normalized (increasing-index)
// convention; weighted sums are assembled from these
template <int D>
std::array<ScalarField<D>, D + 1> degree_norms2(const MetricField<D>& g, const Polyform<D>& H) {
  std::array<ScalarField<D>, D + 1> out;
  for (int k = 1; k <= D; ++k)
    if (H.present(k)) out[k] = form_norm2(H.part[k], g);
  return out;
}

template <int D>
ScalarField<D> weighted_norm_sum(const MetricField<D>& g, const Polyform<D>& H,
                                 double (*weight)(FormNorm, int), FormNorm c) {
  ScalarField<D> out(g.mesh);
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k)) continue;
    ScalarField<D> nk = form_norm2(H.part[k], g);
    const double wk = weight(c, k);
    for (index_t i = 0; i < out.size(); ++i) out.data[i] += wk * nk.data[i];
  }
  return out;
}

// hat norm: sum (1/k) |H_k|^2  (normalized weights; fixed operation contract)
template <int D>
ScalarField<D> wnorm_hat(const MetricField<D>& g, const Polyform<D>& H) {
  return weighted_norm_sum(g, H, &conv::scalar_weight, FormNorm::normalized);
}
// tilde norm: sum (k-1)/k |H_k|^2
template <int D>
ScalarField<D> wnorm_tilde(const MetricField<D>& g, const Polyform<D>& H) {
  return weighted_norm_sum(g, H, &conv::dilaton_weight, FormNorm::normalized);
}

// max-norm closedness residual ||dH||_inf (top degree is closed by type)
template <int D>
double closedness_residual(const Polyform<D>& H) {
  double r = 0.0;
  for (int k = 1; k < D; ++k) {
    if (!H.present(k)) continue;
    DegreeField<D> dH = exterior_derivative(H.part[k]);
    for (double v : dH.data) r = std::fmax(r, std::fabs(v));
  }
  return r;
}

// mixed Ricci tensor: symmetric 2-tensor plus a polyform of degrees 0..D-1
template <int D>
struct MixedRicci {
  SymField<D> sym;
  Polyform<D> form;     // part of degree k-1 originates from H_k
  FormNorm convention = FormNorm::normalized;

  // pointwise |.|^2, symmetric part in the tensor norm, form parts with the
  // convention weight of their originating degree
  ScalarField<D> norm2(const MetricField<D>& g) const {
    ScalarField<D> out(g.mesh);
    const index_t N = g.mesh.size();
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        SymMat<D> s{};
        for (int cix = 0; cix < sym_size<D>; ++cix) s[cix] = sym.at(static_cast<index_t>(i), cix);
        out.data[i] = sym_inner_g<D>(s, s, gi);
      }
    });
    for (int j = 0; j <= D - 1; ++j) {
      if (!form.present(j)) continue;
      ScalarField<D> n2 = form_norm2(form.part[j], g);
      const double q = conv::form_part_weight(convention, j + 1);
      for (index_t i = 0; i < out.size(); ++i) out.data[i] += q * n2.data[i];
    }
    return out;
  }
};

// mixed Ricci with weight function w (pass f for Rc^{H,f}, f - phi for the
// entropy convexity integrand)
template <int D>
MixedRicci<D> mixed_ricci(const MetricField<D>& g, const Polyform<D>& H, const ScalarField<D>& w,
                          FormNorm c = FormNorm::normalized) {
  MixedRicci<D> out{SymField<D>(g.mesh), Polyform<D>(g.mesh), c};
  Curvature<D> cur = curvature(g);
  SymField<D> h2 = h_squared(g, H, c);
  SymField<D> hw = hessian(g, w);
  for (std::size_t i = 0; i < out.sym.data.size(); ++i)
    out.sym.data[i] = cur.ricci.data[i] - 0.25 * h2.data[i] + hw.data[i];

  VectorField<D> gw = gradient(g, w);
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k)) continue;
    DegreeField<D> ds = codifferential(H.part[k], g);
    DegreeField<D> iw = interior_product(H.part[k], gw);
    DegreeField<D>& p = out.form.ensure(k - 1);
    for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] = -0.5 * (ds.data[i] + iw.data[i]);
  }
  return out;
}

// weighted scalar curvature R - wsum/4 + 2 lap w - |grad w|^2
template <int D>
ScalarField<D> weighted_scalar(const MetricField<D>& g, const Polyform<D>& H,
                               const ScalarField<D>& w, FormNorm c = FormNorm::normalized) {
  Curvature<D> cur = curvature(g);
  ScalarField<D> ws = weighted_norm_sum(g, H, &conv::scalar_weight, c);
  ScalarField<D> lw = laplace_beltrami(g, w);
  ScalarField<D> gw2 = grad_inner(g, w, w);
  ScalarField<D> out(g.mesh);
  for (index_t i = 0; i < out.size(); ++i)
    out.data[i] = cur.scalar.data[i] - 0.25 * ws.data[i] + 2.0 * lw.data[i] - gw2.data[i];
  return out;
}

// 1-form pairing <alpha_{k-1}, H_k>(X) := <alpha, i_X H_k> summed over degrees
template <int D>
CovectorField<D> form_vector_pairing(const MetricField<D>& g, const Polyform<D>& alpha,
                                     const Polyform<D>& H) {
  using FT = FormTables<D>;
  CovectorField<D> out(g.mesh);
  const index_t N = g.mesh.size();
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k) || !alpha.present(k - 1)) continue;
    const DegreeField<D>& Hk = H.part[k];
    const DegreeField<D>& al = alpha.part[k - 1];
    const int ncj = binom(D, k - 1);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t bb, std::size_t ee) {
      for (std::size_t i = bb; i < ee; ++i) {
        const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        const auto G = FormGram<D>::build(k - 1, gi);
        for (int a = 0; a < D; ++a) {
          std::array<double, FT::max_comps> row{};
          for (int j = 0; j < ncj; ++j) {
            const auto ins = FT::insert(k - 1, j, a);
            row[j] = ins.comp >= 0 ? ins.sign * Hk.at(static_cast<index_t>(i), ins.comp) : 0.0;
          }
          double s = 0.0;
          for (int I = 0; I < ncj; ++I)
            for (int J = 0; J < ncj; ++J) s += al.at(static_cast<index_t>(i), I) * G.m[I][J] * row[J];
          out.at(static_cast<index_t>(i), a) += s;
        }
      }
    });
  }
  return out;
}

// Residuals of the two divergence identities for closed polyforms, stated in
// the normalized convention:
//   r1 = div H^2 + <d*H, H> - d( sum_k |H_k|^2 ) / 2
//   r2 = div div H^2 - lap( sum_k |H_k|^2 )/2 - sum_k <hodge_lap H_k, H_k>
//        - sum_k |d* H_k|^2
template <int D>
struct BianchiResiduals {
  CovectorField<D> r1;
  ScalarField<D> r2;
};

template <int D>
BianchiResiduals<D> bianchi_residuals(const MetricField<D>& g, const Polyform<D>& H) {
  if (closedness_residual(H) > kClosedTol)
    throw shape_error("bianchi residuals: polyform is not closed");
  const Mesh<D>& m = g.mesh;
  ChristoffelField<D> ch = christoffels(g);
  SymField<D> h2 = h_squared(g, H, FormNorm::normalized);
  CovectorField<D> div_h2 = divergence_sym(g, h2, ch);

  // sum_k |H_k|^2 (unit weights)
  ScalarField<D> nsum(m);
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k)) continue;
    ScalarField<D> nk = form_norm2(H.part[k], g);
    for (index_t i = 0; i < nsum.size(); ++i) nsum.data[i] += nk.data[i];
  }

  Polyform<D> dstar(m);
  for (int k = 1; k <= D; ++k)
    if (H.present(k)) dstar.ensure(k - 1) = codifferential(H.part[k], g);

  CovectorField<D> pair = form_vector_pairing(g, dstar, H);
  CovectorField<D> dns(m);
  {
    CovectorField<D> pn = partials(nsum);
    dns = pn;
  }

  BianchiResiduals<D> out{CovectorField<D>(m), ScalarField<D>(m)};
  for (index_t i = 0; i < m.size(); ++i)
    for (int a = 0; a < D; ++a)
      out.r1.at(i, a) = div_h2.at(i, a) + pair.at(i, a) - 0.5 * dns.at(i, a);

  ScalarField<D> divdiv = divergence_covector(g, div_h2, ch);
  ScalarField<D> lap_ns = laplace_beltrami(g, nsum);
  ScalarField<D> cross(m);
  for (int k = 1; k <= D; ++k) {
    if (!H.present(k)) continue;
    DegreeField<D> lapH = hodge_laplacian(H.part[k], g);
    // <lap H_k, H_k> and |d* H_k|^2, normalized inner products
    const int nc = binom(D, k);
    const int ncj = binom(D, k - 1);
    const DegreeField<D>& Hk = H.part[k];
    const DegreeField<D>& dsk = dstar.part[k - 1];
    for (index_t i = 0; i < m.size(); ++i) {
      const SymMat<D> gm = g.matrix(i);
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      const auto Gk = FormGram<D>::build(k, gi);
      const auto Gj = FormGram<D>::build(k - 1, gi);
      cross.data[i] += Gk.inner(&lapH.data[static_cast<std::size_t>(i) * nc],
                                &Hk.data[static_cast<std::size_t>(i) * nc], nc);
      cross.data[i] += Gj.inner(&dsk.data[static_cast<std::size_t>(i) * ncj],
                                &dsk.data[static_cast<std::size_t>(i) * ncj], ncj);
    }
  }
  for (index_t i = 0; i < m.size(); ++i)
    out.r2.data[i] = divdiv.data[i] - 0.5 * lap_ns.data[i] - cross.data[i];
  return out;
}

}  // namespace grf
