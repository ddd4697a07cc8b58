#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "grf/fft.hpp"
#include "grf/operators.hpp"
#include "grf/state.hpp"

// Weighted elliptic solver for the continuity equation
//     div_f(rho grad phi) = -sigma.
// Multiplying by w = e^{-f} sqrt(det g) gives A phi = w sigma with
//     A phi = -sum_a D_a( K_{ab} D_b phi ),   K = w rho g^{-1},
// which is symmetric positive semidefinite in the plain dot product by the
// summation-by-parts structure of centered differences. Its kernel consists
// of the 2^D even/odd sublattice constants (the corner Fourier modes); the
// solver deflates them and preconditions with the exact inverse of the
// constant-coefficient symbol, applied spectrally.

namespace grf {

template <int D>
struct EllipticOperator {
  Mesh<D> mesh;
  std::vector<double> K;  // node-major packed symmetric coefficient

  static EllipticOperator build(const ScalarField<D>& coef_w, const ScalarField<D>& rho,
                                const MetricField<D>& g) {
    EllipticOperator op;
    op.mesh = g.mesh;
    op.K.assign(static_cast<std::size_t>(g.mesh.size()) * sym_size<D>, 0.0);
    parallel_for(static_cast<std::size_t>(g.mesh.size()), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const SymMat<D> gm = g.matrix(static_cast<index_t>(i));
        const SymMat<D> gi = sym_inverse<D>(gm, sym_det<D>(gm));
        const double s = coef_w.data[i] * rho.data[i];
        for (int c = 0; c < sym_size<D>; ++c) op.K[i * sym_size<D> + c] = s * gi[c];
      }
    });
    return op;
  }

  // y = A x
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const index_t N = mesh.size();
    // flux_a = sum_b K_ab D_b x, then y = -sum_a D_a flux_a
    std::vector<double> dx(static_cast<std::size_t>(N) * D);
    for (int a = 0; a < D; ++a) {
      const double s = 1.0 / (2.0 * mesh.h[a]);
      parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const index_t ip = mesh.shift(static_cast<index_t>(i), a, +1);
          const index_t im = mesh.shift(static_cast<index_t>(i), a, -1);
          dx[i * D + a] = s * (x[ip] - x[im]);
        }
      });
    }
    std::vector<double> flux(static_cast<std::size_t>(N) * D);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (int a = 0; a < D; ++a) {
          double s = 0.0;
          for (int bb = 0; bb < D; ++bb) s += K[i * sym_size<D> + sym_at<D>(a, bb)] * dx[i * D + bb];
          flux[i * D + a] = s;
        }
    });
    y.assign(static_cast<std::size_t>(N), 0.0);
    for (int a = 0; a < D; ++a) {
      const double s = 1.0 / (2.0 * mesh.h[a]);
      parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const index_t ip = mesh.shift(static_cast<index_t>(i), a, +1);
          const index_t im = mesh.shift(static_cast<index_t>(i), a, -1);
          y[i] -= s * (flux[static_cast<std::size_t>(ip) * D + a] -
                       flux[static_cast<std::size_t>(im) * D + a]);
        }
      });
    }
  }
};

// 2^D sublattice parity projector (plain dot product)
template <int D>
class KernelProjector {
 public:
  explicit KernelProjector(const Mesh<D>& m) : mesh_(m) {}

  void project(std::vector<double>& v) const {
    const index_t N = mesh_.size();
    for (int s = 0; s < (1 << D); ++s) {
      const double c = parallel_sum(static_cast<std::size_t>(N),
                                    [&](std::size_t i) { return v[i] * parity(static_cast<index_t>(i), s); }) /
                       static_cast<double>(N);
      parallel_for(static_cast<std::size_t>(N), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) v[i] -= c * parity(static_cast<index_t>(i), s);
      });
    }
  }

  double parity(index_t node, int s) const {
    auto c = mesh_.coords(node);
    int bits = 0;
    for (int a = 0; a < D; ++a)
      if (s & (1 << a)) bits += static_cast<int>(c[a]);
    return (bits % 2 == 0) ? 1.0 : -1.0;
  }

 private:
  Mesh<D> mesh_;
};

// spectral inverse of the averaged constant-coefficient operator
template <int D>
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(const EllipticOperator<D>& op) : mesh_(op.mesh) {
    const index_t N = mesh_.size();
    std::array<double, D> cbar{};
    for (int a = 0; a < D; ++a) {
      cbar[a] = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) {
                  return op.K[i * sym_size<D> + sym_at<D>(a, a)];
                }) /
                static_cast<double>(N);
      cbar[a] = std::fmax(cbar[a], 1e-300);
    }
    symbol_.resize(static_cast<std::size_t>(N));
    const index_t n = mesh_.n;
    for (index_t i = 0; i < N; ++i) {
      auto c = mesh_.coords(i);
      double s = 0.0;
      for (int a = 0; a < D; ++a) {
        const double theta = 2.0 * M_PI * static_cast<double>(c[a]) / static_cast<double>(n);
        const double sn = std::sin(theta);
        s += cbar[a] * sn * sn / (mesh_.h[a] * mesh_.h[a]);
      }
      symbol_[i] = s;
    }
  }

  void apply(const std::vector<double>& r, std::vector<double>& z) const {
    const std::size_t N = r.size();
    buf_.assign(N, {0.0, 0.0});
    for (std::size_t i = 0; i < N; ++i) buf_[i] = {r[i], 0.0};
    fftn(buf_, mesh_, false);
    for (std::size_t i = 0; i < N; ++i) {
      if (symbol_[i] > 1e-14)
        buf_[i] /= symbol_[i];
      else
        buf_[i] = {0.0, 0.0};  // kernel modes stay deflated
    }
    fftn(buf_, mesh_, true);
    z.resize(N);
    for (std::size_t i = 0; i < N; ++i) z[i] = buf_[i].real();
  }

 private:
  Mesh<D> mesh_;
  std::vector<double> symbol_;
  mutable std::vector<std::complex<double>> buf_;
};

template <int D>
struct EllipticSolution {
  ScalarField<D> phi;
  int iterations = 0;
  double residual = 0.0;          // ||div_f(rho grad phi) + sigma|| / ||sigma||, weighted L2
  double compat_deviation = 0.0;  // weighted mean of sigma before projection
};

// Solve div_f(rho grad phi) = -sigma for mean-zero phi by deflated PCG.
template <int D>
EllipticSolution<D> continuity_solve(const ScalarField<D>& rho, const ScalarField<D>& sigma,
                                     const GeomState<D>& state, double tol = kEllipticTol,
                                     int max_iter = 0) {
  const Mesh<D>& m = state.mesh();
  require_same_mesh(m, rho.mesh);
  require_same_mesh(m, sigma.mesh);
  for (index_t i = 0; i < rho.size(); ++i)
    if (!(rho.data[i] >= kDensityFloor))
      throw solver_error("continuity solve: density below floor at node " + std::to_string(i));

  const index_t N = m.size();
  const double vol = m.cell_volume();
  ScalarField<D> w = state.weight();

  // compatibility projection in the weighted inner product
  const double wmass = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) { return w.data[i]; });
  const double smass = parallel_sum(static_cast<std::size_t>(N),
                                    [&](std::size_t i) { return sigma.data[i] * w.data[i]; });
  const double gamma = smass / wmass;

  EllipticOperator<D> A = EllipticOperator<D>::build(w, rho, state.g);
  KernelProjector<D> proj(m);
  SpectralPreconditioner<D> M(A);

  std::vector<double> b(static_cast<std::size_t>(N));
  for (index_t i = 0; i < N; ++i) b[i] = w.data[i] * (sigma.data[i] - gamma);
  proj.project(b);

  const double sigma_norm = std::sqrt(parallel_sum(
      static_cast<std::size_t>(N),
      [&](std::size_t i) { return (sigma.data[i] - gamma) * (sigma.data[i] - gamma) * w.data[i] * vol; }));

  std::vector<double> x(static_cast<std::size_t>(N), 0.0), r = b, z, p, Ap;
  auto spec_residual = [&](const std::vector<double>& res) {
    return std::sqrt(parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) {
      const double d = res[i] / w.data[i];
      return d * d * w.data[i] * vol;
    }));
  };

  EllipticSolution<D> out{ScalarField<D>(m), 0, 0.0, std::fabs(smass)};
  if (max_iter <= 0) max_iter = static_cast<int>(10 * N) + 100;

  double rel = sigma_norm > 0 ? spec_residual(r) / sigma_norm : 0.0;
  if (sigma_norm == 0.0 || rel <= tol) {
    out.phi.data.assign(static_cast<std::size_t>(N), 0.0);
    out.residual = rel;
    return out;
  }

  M.apply(r, z);
  proj.project(z);
  p = z;
  double rz = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) { return r[i] * z[i]; });
  int it = 0;
  for (; it < max_iter; ++it) {
    A.apply(p, Ap);
    const double pAp = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) { return p[i] * Ap[i]; });
    if (!(pAp > 0.0)) throw solver_error("continuity solve: operator lost positivity in CG");
    const double alpha = rz / pAp;
    for (index_t i = 0; i < N; ++i) x[i] += alpha * p[i];
    for (index_t i = 0; i < N; ++i) r[i] -= alpha * Ap[i];
    rel = spec_residual(r) / sigma_norm;
    if (rel <= tol) {
      ++it;
      break;
    }
    M.apply(r, z);
    proj.project(z);
    const double rz_new = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) { return r[i] * z[i]; });
    const double beta = rz_new / rz;
    rz = rz_new;
    for (index_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
  }
  if (rel > tol)
    throw solver_error("continuity solve: no convergence after " + std::to_string(it) +
                       " iterations, residual " + std::to_string(rel));

  // gauge: zero mean against e^{-f} dV
  const double xmean = parallel_sum(static_cast<std::size_t>(N),
                                    [&](std::size_t i) { return x[i] * w.data[i]; }) /
                       wmass;
  for (index_t i = 0; i < N; ++i) out.phi.data[i] = x[i] - xmean;
  out.iterations = it;
  out.residual = rel;
  return out;
}

}  // namespace grf
