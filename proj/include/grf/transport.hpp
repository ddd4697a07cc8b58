#pragma once

#include <cmath>
#include <vector>

#include "grf/elliptic.hpp"

// Probability densities relative to e^{-f} dV, paths of measures solving the
// static continuity equation, the kinetic-energy Lagrangian, and its
// minimization between fixed endpoints (dynamic optimal transport).

namespace grf {

template <int D>
double measure_mass(const ScalarField<D>& rho, const ScalarField<D>& weight, double cell_volume) {
  return integrate(rho, weight, cell_volume);
}

// positive, unit-mass density against the state's weighted volume
template <int D>
struct Density {
  ScalarField<D> rho;

  static Density make(ScalarField<D> raw, const GeomState<D>& state) {
    ScalarField<D> w = state.weight();
    const double mass = measure_mass(raw, w, state.mesh().cell_volume());
    if (!(mass > 0.0)) throw solver_error("density: nonpositive total mass");
    for (auto& v : raw.data) v /= mass;
    for (index_t i = 0; i < raw.size(); ++i)
      if (!(raw.data[i] >= kDensityFloor))
        throw solver_error("density: value below floor at node " + std::to_string(i) +
                           " after normalization");
    return Density{std::move(raw)};
  }
};

// SBP first-derivative rows in the path parameter: first-order one-sided at
// the ends, centered inside. This pairing makes the discrete first variation
// of the path energy equal the centered Hamilton-Jacobi residual at every
// interior slice (no boundary pollution), which is what the descent drives
// to zero.
inline double sbp_weight(std::size_t j, std::size_t m) { return (j == 0 || j == m) ? 0.5 : 1.0; }

template <int D>
std::vector<ScalarField<D>> sbp_parameter_derivative(const std::vector<ScalarField<D>>& rho,
                                                     double ds) {
  const std::size_t m = rho.size() - 1;
  std::vector<ScalarField<D>> out(rho.size(), ScalarField<D>(rho[0].mesh));
  const index_t N = rho[0].size();
  for (index_t i = 0; i < N; ++i) {
    out[0].data[i] = (rho[1].data[i] - rho[0].data[i]) / ds;
    out[m].data[i] = (rho[m].data[i] - rho[m - 1].data[i]) / ds;
  }
  for (std::size_t j = 1; j < m; ++j)
    for (index_t i = 0; i < N; ++i)
      out[j].data[i] = (rho[j + 1].data[i] - rho[j - 1].data[i]) / (2.0 * ds);
  return out;
}

// path of (rho, phi) pairs on one background state, parameter in [0,1]
template <int D>
struct MeasurePath {
  GeomState<D> state;
  std::vector<double> s;
  std::vector<ScalarField<D>> rho;
  std::vector<ScalarField<D>> phi;

  std::size_t slices() const { return s.size(); }
  double ds() const { return s[1] - s[0]; }
};

// solve the continuity equation on every slice of a given density path
template <int D>
MeasurePath<D> build_measure_path(const GeomState<D>& state, std::vector<ScalarField<D>> rho,
                                  double tol = kEllipticTol) {
  if (rho.size() < 2) throw shape_error("measure path needs at least two slices");
  MeasurePath<D> path;
  path.state = state;
  const std::size_t m = rho.size() - 1;
  const double ds = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j <= m; ++j) path.s.push_back(ds * static_cast<double>(j));
  std::vector<ScalarField<D>> sigma = sbp_parameter_derivative(rho, ds);
  path.rho = std::move(rho);
  for (std::size_t j = 0; j <= m; ++j)
    path.phi.push_back(continuity_solve(path.rho[j], sigma[j], state, tol).phi);
  return path;
}

// E = 1/2 int_0^1 int |grad phi|^2 dmu ds by trapezoid in s
template <int D>
double path_energy(const MeasurePath<D>& path) {
  const double vol = path.state.mesh().cell_volume();
  ScalarField<D> w = path.state.weight();
  const std::size_t m = path.slices() - 1;
  const double ds = path.ds();
  std::vector<double> slice_vals(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    ScalarField<D> g2 = grad_inner(path.state.g, path.phi[j], path.phi[j]);
    slice_vals[j] =
        0.5 * parallel_sum(static_cast<std::size_t>(w.size()), [&](std::size_t i) {
          return g2.data[i] * path.rho[j].data[i] * w.data[i];
        }) * vol;
  }
  double e = 0.0;
  for (std::size_t j = 0; j <= m; ++j) e += slice_vals[j] * sbp_weight(j, m) * ds;
  return e;
}

// max over interior slices of the L2(dmu) norm of the projected
// Hamilton-Jacobi residual d_s phi + |grad phi|^2 / 2
template <int D>
double bb_first_variation_residual(const MeasurePath<D>& path) {
  const double vol = path.state.mesh().cell_volume();
  ScalarField<D> w = path.state.weight();
  const std::size_t m = path.slices() - 1;
  const double ds = path.ds();
  double worst = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    ScalarField<D> g2 = grad_inner(path.state.g, path.phi[j], path.phi[j]);
    const index_t N = w.size();
    std::vector<double> r(static_cast<std::size_t>(N));
    for (index_t i = 0; i < N; ++i)
      r[i] = (path.phi[j + 1].data[i] - path.phi[j - 1].data[i]) / (2.0 * ds) + 0.5 * g2.data[i];
    const double mean = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) {
      return r[i] * path.rho[j].data[i] * w.data[i];
    }) * vol;
    const double norm2 = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) {
      const double p = r[i] - mean;
      return p * p * path.rho[j].data[i] * w.data[i];
    }) * vol;
    worst = std::fmax(worst, std::sqrt(norm2));
  }
  return worst;
}

template <int D>
struct BbResult {
  MeasurePath<D> path;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimize the path energy over interior slice densities. Interior densities
// are log-parametrized and mass-normalized; phi comes from the slice solves;
// the descent uses Barzilai-Borwein steps safeguarded by Armijo backtracking.
// Stops at the first-variation tolerance or reports the final residual.
template <int D>
BbResult<D> bb_minimize(const Density<D>& mu0, const Density<D>& mu1, const GeomState<D>& state,
                        std::size_t m, double tol_geo = kGeodesicTol, int max_iter = 500) {
  if (m < 8) throw config_error("bb_minimize: need at least 8 parameter steps");
  const Mesh<D>& mesh = state.mesh();
  const index_t N = mesh.size();
  const double vol = mesh.cell_volume();
  const double ds = 1.0 / static_cast<double>(m);
  ScalarField<D> w = state.weight();

  // theta holds log densities of interior slices 1..m-1
  std::vector<std::vector<double>> theta(m - 1, std::vector<double>(static_cast<std::size_t>(N)));
  for (std::size_t j = 1; j < m; ++j) {
    const double a = static_cast<double>(j) * ds;
    for (index_t i = 0; i < N; ++i)
      theta[j - 1][i] = std::log((1.0 - a) * mu0.rho.data[i] + a * mu1.rho.data[i]);
  }

  auto densities = [&](const std::vector<std::vector<double>>& th) {
    std::vector<ScalarField<D>> rho(m + 1, ScalarField<D>(mesh));
    rho[0] = mu0.rho;
    rho[m] = mu1.rho;
    for (std::size_t j = 1; j < m; ++j) {
      ScalarField<D> r(mesh);
      for (index_t i = 0; i < N; ++i) r.data[i] = std::exp(th[j - 1][i]);
      const double mass = measure_mass(r, w, vol);
      for (auto& v : r.data) v /= mass;
      rho[j] = std::move(r);
    }
    return rho;
  };

  auto evaluate = [&](const std::vector<std::vector<double>>& th) {
    MeasurePath<D> p = build_measure_path(state, densities(th));
    return std::pair<double, MeasurePath<D>>(path_energy(p), std::move(p));
  };

  auto objective_gradient = [&](const MeasurePath<D>& p) {
    // grad wrt theta_l = -a_l rho_l w vol (r_l - <r_l>_mu), r = HJ residual
    std::vector<std::vector<double>> grad(m - 1, std::vector<double>(static_cast<std::size_t>(N)));
    for (std::size_t l = 1; l < m; ++l) {
      ScalarField<D> g2 = grad_inner(state.g, p.phi[l], p.phi[l]);
      std::vector<double> r(static_cast<std::size_t>(N));
      for (index_t i = 0; i < N; ++i)
        r[i] = (p.phi[l + 1].data[i] - p.phi[l - 1].data[i]) / (2.0 * ds) + 0.5 * g2.data[i];
      const double mean = parallel_sum(static_cast<std::size_t>(N), [&](std::size_t i) {
        return r[i] * p.rho[l].data[i] * w.data[i];
      }) * vol;
      const double al = ds;  // interior trapezoid weight
      for (index_t i = 0; i < N; ++i)
        grad[l - 1][i] = -al * p.rho[l].data[i] * w.data[i] * vol * (r[i] - mean);
    }
    return grad;
  };

  auto dot = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l)
      s += parallel_sum(a[l].size(), [&](std::size_t i) { return a[l][i] * b[l][i]; });
    return s;
  };

  auto [E, path] = evaluate(theta);
  BbResult<D> out;
  out.residual = bb_first_variation_residual(path);

  std::vector<std::vector<double>> grad = objective_gradient(path);
  std::vector<std::vector<double>> theta_prev, grad_prev;
  double step = 0.0;
  {
    double gmax = 1e-300;
    for (auto& gl : grad)
      for (double v : gl) gmax = std::fmax(gmax, std::fabs(v));
    step = 0.05 / gmax;
  }

  int it = 0;
  for (; it < max_iter && out.residual > tol_geo; ++it) {
    if (!theta_prev.empty()) {
      // BB1 step from the last secant pair
      double sy = 0.0, yy = 0.0;
      for (std::size_t l = 0; l < theta.size(); ++l)
        for (std::size_t i = 0; i < theta[l].size(); ++i) {
          const double sdiff = theta[l][i] - theta_prev[l][i];
          const double ydiff = grad[l][i] - grad_prev[l][i];
          sy += sdiff * ydiff;
          yy += ydiff * ydiff;
        }
      if (sy > 0.0 && yy > 0.0) step = sy / yy;
    }

    const double gnorm2 = dot(grad, grad);
    double tau = step;
    bool accepted = false;
    for (int bt = 0; bt < 40 && !accepted; ++bt) {
      std::vector<std::vector<double>> trial = theta;
      for (std::size_t l = 0; l < trial.size(); ++l)
        for (std::size_t i = 0; i < trial[l].size(); ++i) trial[l][i] -= tau * grad[l][i];
      try {
        auto [Et, pt] = evaluate(trial);
        if (Et <= E - 1e-4 * tau * gnorm2) {
          theta_prev = std::move(theta);
          grad_prev = std::move(grad);
          theta = std::move(trial);
          E = Et;
          path = std::move(pt);
          grad = objective_gradient(path);
          accepted = true;
        } else {
          tau *= 0.5;
        }
      } catch (const solver_error&) {
        tau *= 0.5;  // density floor or solver trouble: shorten
      }
    }
    if (!accepted) break;
    out.residual = bb_first_variation_residual(path);
  }

  out.path = std::move(path);
  out.energy = E;
  out.iterations = it;
  out.converged = out.residual <= tol_geo;
  return out;
}

}  // namespace grf
