#pragma once

#include <array>
#include <vector>

#include "grf/field.hpp"

// Differential forms of degree 0..D on the periodic grid.
//
// A degree-k form stores one coefficient per increasing multi-index; the
// inner product on k-forms makes the increasing coordinate monomials dx^I
// orthonormal in an orthonormal coframe (the 1/k! full-contraction
// normalization). All norms below use that normalization; callers that need
// unnormalized (full-contraction) sums scale by k! themselves, see
// convention.hpp.

namespace grf {

constexpr int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Increasing multi-index tables for D <= 3. index_set<D,k>[c] lists the axes
// of component c in increasing order.
template <int D>
struct FormTables {
  // max component count over degrees is binom(D, floor(D/2))
  static constexpr int max_comps = (D == 1) ? 1 : (D == 2 ? 2 : 3);

  // axes[k][c][slot], slot < k
  static constexpr std::array<std::array<std::array<int, 3>, 3>, 4> axes = [] {
    std::array<std::array<std::array<int, 3>, 3>, 4> t{};
    // degree 1: single axes
    for (int a = 0; a < D; ++a) t[1][a] = {a, -1, -1};
    if constexpr (D >= 2) {
      if constexpr (D == 2) t[2][0] = {0, 1, -1};
      if constexpr (D == 3) {
        t[2][0] = {0, 1, -1};
        t[2][1] = {0, 2, -1};
        t[2][2] = {1, 2, -1};
        t[3][0] = {0, 1, 2};
      }
    }
    return t;
  }();

  static constexpr int comps(int k) { return binom(D, k); }

  // does component c of degree k contain axis a, and at which slot
  static constexpr int slot_of(int k, int c, int a) {
    for (int s = 0; s < k; ++s)
      if (axes[k][c][s] == a) return s;
    return -1;
  }

  // component index of a sorted axis set
  static constexpr int comp_of(int k, const std::array<int, 3>& sorted) {
    for (int c = 0; c < comps(k); ++c) {
      bool ok = true;
      for (int s = 0; s < k; ++s) ok = ok && axes[k][c][s] == sorted[s];
      if (ok) return c;
    }
    return -1;
  }

  // insert axis a into the (k-1)-index set of component j; returns the
  // degree-k component and the sign (-1)^{position of a}
  struct Insert {
    int comp;
    double sign;
  };
  static constexpr Insert insert(int km1, int j, int a) {
    std::array<int, 3> merged{-1, -1, -1};
    int pos = 0;
    bool placed = false;
    int out = 0;
    for (int s = 0; s < km1; ++s) {
      const int ax = axes[km1][j][s];
      if (ax == a) return {-1, 0.0};
      if (!placed && ax > a) {
        merged[out++] = a;
        pos = s;
        placed = true;
      }
      merged[out++] = ax;
    }
    if (!placed) {
      merged[out++] = a;
      pos = km1;
    }
    const int c = comp_of(km1 + 1, merged);
    return {c, (pos % 2 == 0) ? 1.0 : -1.0};
  }
};

struct FormTag {};

// One homogeneous degree as a plain component field.
template <int D>
struct DegreeField {
  int degree = -1;
  Mesh<D> mesh;
  std::vector<double> data;  // size() * comps

  DegreeField() = default;
  DegreeField(const Mesh<D>& m, int k)
      : degree(k), mesh(m), data(static_cast<std::size_t>(m.size()) * binom(D, k), 0.0) {}

  int comps() const { return binom(D, degree); }
  double& at(index_t node, int c) { return data[static_cast<std::size_t>(node) * comps() + c]; }
  double at(index_t node, int c) const { return data[static_cast<std::size_t>(node) * comps() + c]; }
};

// Direct sum of forms over degrees 0..D; absent degrees are empty.
template <int D>
struct Polyform {
  Mesh<D> mesh;
  std::array<DegreeField<D>, D + 1> part;  // part[k] empty unless present(k)

  Polyform() = default;
  explicit Polyform(const Mesh<D>& m) : mesh(m) {}

  bool present(int k) const { return k >= 0 && k <= D && part[k].degree == k; }
  DegreeField<D>& ensure(int k) {
    if (k < 0 || k > D) throw shape_error("polyform degree out of range");
    if (!present(k)) part[k] = DegreeField<D>(mesh, k);
    return part[k];
  }
  bool empty() const {
    for (int k = 0; k <= D; ++k)
      if (present(k)) return false;
    return true;
  }
};

// Gram matrix of the inverse metric on increasing multi-indices of degree k:
// G[I][J] = det( g^{i_a j_b} ). With the normalized convention this is the
// matrix of the k-form inner product in the coordinate basis.
template <int D>
struct FormGram {
  int degree;
  std::array<std::array<double, FormTables<D>::max_comps>, FormTables<D>::max_comps> m{};

  static FormGram build(int k, const SymMat<D>& ginv) {
    using FT = FormTables<D>;
    FormGram G;
    G.degree = k;
    const int nc = binom(D, k);
    for (int I = 0; I < nc; ++I)
      for (int J = 0; J < nc; ++J) {
        double det = 0.0;
        if (k == 0) {
          det = 1.0;
        } else if (k == 1) {
          det = ginv[sym_at<D>(FT::axes[1][I][0], FT::axes[1][J][0])];
        } else if (k == 2) {
          const int i0 = FT::axes[2][I][0], i1 = FT::axes[2][I][1];
          const int j0 = FT::axes[2][J][0], j1 = FT::axes[2][J][1];
          det = ginv[sym_at<D>(i0, j0)] * ginv[sym_at<D>(i1, j1)] -
                ginv[sym_at<D>(i0, j1)] * ginv[sym_at<D>(i1, j0)];
        } else {  // k == 3, single component: det(g^{-1})
          SymMat<D> gi = ginv;
          det = sym_det<D>(gi);
        }
        G.m[I][J] = det;
      }
    return G;
  }

  double inner(const double* a, const double* b, int nc) const {
    double s = 0.0;
    for (int I = 0; I < nc; ++I)
      for (int J = 0; J < nc; ++J) s += a[I] * m[I][J] * b[J];
    return s;
  }
};

// pointwise |alpha_k|^2 in the normalized convention
template <int D>
ScalarField<D> form_norm2(const DegreeField<D>& alpha, const MetricField<D>& g) {
  ScalarField<D> out(alpha.mesh);
  const int nc = alpha.comps();
  const index_t N = alpha.mesh.size();
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
      const auto G = FormGram<D>::build(alpha.degree, gi);
      const double* a = &alpha.data[i * static_cast<std::size_t>(nc)];
      out.data[i] = G.inner(a, a, nc);
    }
  });
  return out;
}

// interior product with a contravariant vector field, degree k -> k-1
template <int D>
DegreeField<D> interior_product(const DegreeField<D>& alpha, const VectorField<D>& X) {
  using FT = FormTables<D>;
  const int k = alpha.degree;
  if (k < 1) throw shape_error("interior product needs degree >= 1");
  DegreeField<D> out(alpha.mesh, k - 1);
  const int nco = binom(D, k - 1);
  const index_t N = alpha.mesh.size();
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (int j = 0; j < nco; ++j) {
        double s = 0.0;
        for (int a = 0; a < D; ++a) {
          const auto ins = FT::insert(k - 1, j, a);
          if (ins.comp >= 0) s += ins.sign * X.at(static_cast<index_t>(i), a) * alpha.at(static_cast<index_t>(i), ins.comp);
        }
        out.at(static_cast<index_t>(i), j) = s;
      }
    }
  });
  return out;
}

// exterior derivative via centered differences, degree k -> k+1.
// d∘d = 0 holds exactly because centered difference operators commute.
template <int D>
DegreeField<D> exterior_derivative(const DegreeField<D>& alpha) {
  using FT = FormTables<D>;
  const int k = alpha.degree;
  if (k >= D) throw shape_error("exterior derivative of top degree");
  DegreeField<D> out(alpha.mesh, k + 1);
  const Mesh<D>& mesh = alpha.mesh;
  const index_t N = mesh.size();
  const int nci = binom(D, k);
  for (int j = 0; j < nci; ++j) {
    for (int a = 0; a < D; ++a) {
      const auto ins = FT::insert(k, j, a);
      if (ins.comp < 0) continue;
      const double scale = ins.sign / (2.0 * mesh.h[a]);
      parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const index_t ip = mesh.shift(static_cast<index_t>(i), a, +1);
          const index_t im = mesh.shift(static_cast<index_t>(i), a, -1);
          out.at(static_cast<index_t>(i), ins.comp) += scale * (alpha.at(ip, j) - alpha.at(im, j));
        }
      });
    }
  }
  return out;
}

// codifferential: the exact discrete adjoint of exterior_derivative under the
// normalized form inner product and the unweighted volume sqrt(det g) dx.
// (d* beta)_J = -(1/sqrt g) Gram_{k-1}^{-1} sum_{a not in J} sign *
//               D_a( sqrt(g) (Gram_k beta)_{J+a} )
template <int D>
DegreeField<D> codifferential(const DegreeField<D>& beta, const MetricField<D>& g) {
  using FT = FormTables<D>;
  const int k = beta.degree;
  if (k < 1) throw shape_error("codifferential needs degree >= 1");
  const Mesh<D>& mesh = beta.mesh;
  const index_t N = mesh.size();
  const int nck = binom(D, k);
  const int ncj = binom(D, k - 1);

  // stage 1: q = sqrt(g) * Gram_k * beta per node
  DegreeField<D> q(mesh, k);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const double det = sym_det<D>(gm);
      const double sq = std::sqrt(det);
      const SymMat<D> gi = sym_inverse<D>(gm, det);
      const auto G = FormGram<D>::build(k, gi);
      for (int I = 0; I < nck; ++I) {
        double s = 0.0;
        for (int J = 0; J < nck; ++J) s += G.m[I][J] * beta.at(static_cast<index_t>(i), J);
        q.at(static_cast<index_t>(i), I) = sq * s;
      }
    }
  });

  // stage 2: c_J = -sum_a sign(a,J) D_a q_{J+a}
  DegreeField<D> c(mesh, k - 1);
  for (int j = 0; j < ncj; ++j) {
    for (int a = 0; a < D; ++a) {
      const auto ins = FT::insert(k - 1, j, a);
      if (ins.comp < 0) continue;
      const double scale = -ins.sign / (2.0 * mesh.h[a]);
      parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const index_t ip = mesh.shift(static_cast<index_t>(i), a, +1);
          const index_t im = mesh.shift(static_cast<index_t>(i), a, -1);
          c.at(static_cast<index_t>(i), j) += scale * (q.at(ip, ins.comp) - q.at(im, ins.comp));
        }
      });
    }
  }

  // stage 3: solve Gram_{k-1} out = c / sqrt(g) per node
  DegreeField<D> out(mesh, k - 1);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
      const double det = sym_det<D>(gm);
      const double isq = 1.0 / std::sqrt(det);
      const SymMat<D> gi = sym_inverse<D>(gm, det);
      const auto G = FormGram<D>::build(k - 1, gi);
      // tiny dense solve (nc <= 3) by Cramer / direct inversion
      double A[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      for (int r = 0; r < ncj; ++r)
        for (int s = 0; s < ncj; ++s) A[r][s] = G.m[r][s];
      double rhs[3] = {0, 0, 0};
      for (int r = 0; r < ncj; ++r) rhs[r] = c.at(static_cast<index_t>(i), r) * isq;
      double x[3] = {0, 0, 0};
      solve3(A, rhs, x, ncj);
      for (int r = 0; r < ncj; ++r) out.at(static_cast<index_t>(i), r) = x[r];
    }
  });
  return out;
}

// Hodge-de Rham Laplacian with the analyst sign: -(d d* + d* d)
template <int D>
DegreeField<D> hodge_laplacian(const DegreeField<D>& alpha, const MetricField<D>& g) {
  const int k = alpha.degree;
  DegreeField<D> out(alpha.mesh, k);
  if (k >= 1) {
    DegreeField<D> ds = codifferential(alpha, g);
    DegreeField<D> dds = exterior_derivative(ds);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= dds.data[i];
  }
  if (k < D) {
    DegreeField<D> da = exterior_derivative(alpha);
    DegreeField<D> sda = codifferential(da, g);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= sda.data[i];
  }
  return out;
}

}  // namespace grf
