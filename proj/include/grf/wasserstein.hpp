#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "grf/state.hpp"
#include "grf/transport.hpp"

// Wasserstein-2 oracles.
//   dim 1: exact circular optimal transport by quantile matching over the
//          optimal rotation, in the arclength coordinate of the metric.
//   dim 2: exact transportation LP on the discrete cost matrix d(x,y)^2 with
//          d from Dijkstra on the metric-weighted 8-neighbor grid graph (a
//          documented approximation of geodesic distance).
// Values are symmetric by construction: the pair is put into a canonical
// order before solving.

namespace grf {

namespace detail {

// quantile samples of a piecewise-constant density on the circle
inline std::vector<double> circle_quantiles(const std::vector<double>& mass,
                                            const std::vector<double>& left_edge,
                                            const std::vector<double>& width, std::size_t K) {
  const std::size_t n = mass.size();
  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + mass[i];
  const double total = cdf[n];
  std::vector<double> q(K);
  std::size_t cell = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double target = total * (static_cast<double>(k) + 0.5) / static_cast<double>(K);
    while (cell + 1 < n && cdf[cell + 1] < target) ++cell;
    const double inside = mass[cell] > 0 ? (target - cdf[cell]) / mass[cell] : 0.5;
    q[k] = left_edge[cell] + width[cell] * inside;
  }
  return q;
}

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace detail

// exact circle W2 between unit-mass densities (relative to e^{-f} dV)
template <int D>
double wasserstein_circle(const ScalarField<D>& rho0, const ScalarField<D>& rho1,
                          const GeomState<D>& state, std::size_t K = 8192) {
  static_assert(D == 1);
  const Mesh<1>& m = state.mesh();
  const index_t n = m.size();
  ScalarField<1> w = state.weight();
  ScalarField<1> sq = volume_density(state.g);

  // arclength cell widths and edges
  std::vector<double> width(n), left(n);
  double lambda = 0.0;
  for (index_t i = 0; i < n; ++i) {
    width[i] = sq.data[i] * m.h[0];
    left[i] = lambda;
    lambda += width[i];
  }

  const std::vector<double>* lo = &rho0.data;
  const std::vector<double>* hi = &rho1.data;
  if (detail::lex_less(rho1.data, rho0.data)) std::swap(lo, hi);

  auto masses = [&](const std::vector<double>& rho) {
    std::vector<double> mass(n);
    for (index_t i = 0; i < n; ++i) mass[i] = rho[i] * w.data[i] * m.h[0];
    return mass;
  };
  std::vector<double> x = detail::circle_quantiles(masses(*lo), left, width, K);
  std::vector<double> y = detail::circle_quantiles(masses(*hi), left, width, K);

  // shift cost over the quantile index, with the periodic lift
  auto cost_of = [&](long shift) {
    const long Kl = static_cast<long>(K);
    double c = 0.0;
    for (long k = 0; k < Kl; ++k) {
      long j = k - shift;
      double lift = 0.0;
      while (j < 0) {
        j += Kl;
        lift -= lambda;
      }
      while (j >= Kl) {
        j -= Kl;
        lift += lambda;
      }
      const double d = x[static_cast<std::size_t>(k)] - (y[static_cast<std::size_t>(j)] + lift);
      c += d * d;
    }
    return c / static_cast<double>(K);
  };

  // coarse scan then ternary refinement; the cost is convex in the lifted
  // shift, and one net winding either way covers every optimal rotation
  const long Kl = static_cast<long>(K);
  long best = 0;
  double bestc = cost_of(0);
  for (long s = -Kl; s <= Kl; s += Kl / 64) {
    const double c = cost_of(s);
    if (c < bestc) {
      bestc = c;
      best = s;
    }
  }
  long a = best - Kl / 32, b = best + Kl / 32;
  while (b - a > 2) {
    const long m1 = a + (b - a) / 3;
    const long m2 = b - (b - a) / 3;
    if (cost_of(m1) <= cost_of(m2))
      b = m2;
    else
      a = m1;
  }
  for (long s = a; s <= b; ++s) bestc = std::fmin(bestc, cost_of(s));
  return std::sqrt(bestc);
}

// all-targets distances from one source on the metric-weighted grid graph
template <int D>
std::vector<double> grid_distances(const MetricField<D>& g, index_t source) {
  static_assert(D == 2);
  const Mesh<2>& m = g.mesh;
  const index_t N = m.size();
  std::vector<double> dist(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, index_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        auto c = m.coords(i);
        c[0] = (c[0] + dx + m.n) % m.n;
        c[1] = (c[1] + dy + m.n) % m.n;
        const index_t jn = m.flat(c);
        const double ex = dx * m.h[0], ey = dy * m.h[1];
        SymMat<2> mid{};
        for (int cix = 0; cix < 3; ++cix) mid[cix] = 0.5 * (g.at(i, cix) + g.at(jn, cix));
        const double len = std::sqrt(mid[0] * ex * ex + 2.0 * mid[1] * ex * ey + mid[2] * ey * ey);
        if (dist[i] + len < dist[jn]) {
          dist[jn] = dist[i] + len;
          heap.push({dist[jn], jn});
        }
      }
  }
  return dist;
}

// Exact dense transportation LP by the classic simplex on the basis tree.
// Masses must be positive and sum to the same total.
class TransportSimplex {
 public:
  // cost(i, j) callback, ns sources with masses a, nt sinks with masses b
  template <typename CostFn>
  static double solve(std::size_t ns, std::size_t nt, const std::vector<double>& a,
                      const std::vector<double>& b, CostFn&& cost) {
    const std::size_t n = ns + nt;
    std::vector<int> parent(n, -1);
    std::vector<double> flow(n, 0.0);  // flow on the arc to parent
    std::vector<double> pot(n, 0.0);
    std::vector<int> depth(n, 0);

    // northwest-corner start: the staircase of basic cells is a spanning tree
    {
      std::vector<double> ra = a, rb = b;
      std::vector<std::pair<int, int>> cells;
      std::size_t i = 0, j = 0;
      std::vector<double> cellflow;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double f = std::fmin(ra[i], rb[j]);
        cells.push_back({static_cast<int>(i), static_cast<int>(ns + j)});
        cellflow.push_back(f);
        ra[i] -= f;
        rb[j] -= f;
        if (k + 2 < n) {
          bool advance_i;
          if (i + 1 == ns)
            advance_i = false;
          else if (j + 1 == nt)
            advance_i = true;
          else
            advance_i = ra[i] <= rb[j];
          if (advance_i)
            ++i;
          else
            ++j;
        }
      }
      // orient arcs away from node 0 by BFS over the cell adjacency
      std::vector<std::vector<std::pair<int, double>>> adj(n);
      for (std::size_t k = 0; k < cells.size(); ++k) {
        adj[cells[k].first].push_back({cells[k].second, cellflow[k]});
        adj[cells[k].second].push_back({cells[k].first, cellflow[k]});
      }
      std::vector<int> stack{0};
      std::vector<char> seen(n, 0);
      seen[0] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (auto [u, f] : adj[v]) {
          if (seen[u]) continue;
          seen[u] = 1;
          parent[u] = v;
          flow[u] = f;
          stack.push_back(u);
        }
      }
    }

    std::vector<int> head(n), next(n), stack;
    stack.reserve(n);
    auto rebuild = [&] {
      // depths and potentials from the tree (root = node 0, u_0 = 0)
      std::fill(head.begin(), head.end(), -1);
      for (std::size_t v = 0; v < n; ++v)
        if (parent[v] >= 0) {
          next[v] = head[parent[v]];
          head[parent[v]] = static_cast<int>(v);
        }
      stack.assign(1, 0);
      pot[0] = 0.0;
      depth[0] = 0;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int k = head[v]; k >= 0; k = next[k]) {
          depth[k] = depth[v] + 1;
          const bool k_is_source = static_cast<std::size_t>(k) < ns;
          const std::size_t si = k_is_source ? k : v;
          const std::size_t tj = k_is_source ? static_cast<std::size_t>(v) - ns
                                             : static_cast<std::size_t>(k) - ns;
          pot[k] = cost(si, tj) - pot[v];  // u_i + v_j = c on basic arcs
          stack.push_back(k);
        }
      }
    };
    rebuild();

    double cmax = 1.0;
    for (std::size_t i = 0; i < ns; i += std::max<std::size_t>(1, ns / 16))
      for (std::size_t j = 0; j < nt; j += std::max<std::size_t>(1, nt / 16))
        cmax = std::fmax(cmax, std::fabs(cost(i, j)));
    const double eps = 1e-12 * cmax;

    const std::size_t total_arcs = ns * nt;
    const std::size_t block = std::max<std::size_t>(1024, total_arcs / 64);
    std::size_t cursor = 0;
    const std::size_t max_pivots = 400 * n + 40000;
    std::size_t pivot = 0;

    for (; pivot < max_pivots; ++pivot) {
      // block pricing: most negative reduced cost among scanned candidates
      long enter = -1;
      double best = -eps;
      std::size_t scanned = 0;
      while (scanned < total_arcs) {
        const std::size_t end = std::min(cursor + block, total_arcs);
        for (std::size_t idx = cursor; idx < end; ++idx) {
          const std::size_t i = idx / nt, j = idx % nt;
          const double r = cost(i, j) - pot[i] - pot[ns + j];
          if (r < best) {
            best = r;
            enter = static_cast<long>(idx);
          }
        }
        scanned += end - cursor;
        cursor = (end == total_arcs) ? 0 : end;
        if (enter >= 0) break;
      }
      if (enter < 0) break;  // optimal

      const int ei = static_cast<int>(static_cast<std::size_t>(enter) / nt);
      const int ej = static_cast<int>(ns + static_cast<std::size_t>(enter) % nt);

      // cycle: both endpoint-to-ancestor paths; arcs at even index on either
      // path lose flow, odd gain (the arcs adjacent to the entering arc lose)
      std::vector<int> up_i, up_j;
      {
        int x = ei, y = ej;
        while (depth[x] > depth[y]) {
          up_i.push_back(x);
          x = parent[x];
        }
        while (depth[y] > depth[x]) {
          up_j.push_back(y);
          y = parent[y];
        }
        while (x != y) {
          up_i.push_back(x);
          x = parent[x];
          up_j.push_back(y);
          y = parent[y];
        }
      }
      double theta = std::numeric_limits<double>::infinity();
      int leave = -1;
      bool leave_on_i = true;
      for (std::size_t k = 0; k < up_i.size(); k += 2)
        if (flow[up_i[k]] < theta) {
          theta = flow[up_i[k]];
          leave = up_i[k];
          leave_on_i = true;
        }
      for (std::size_t k = 0; k < up_j.size(); k += 2)
        if (flow[up_j[k]] < theta) {
          theta = flow[up_j[k]];
          leave = up_j[k];
          leave_on_i = false;
        }
      if (leave < 0) throw solver_error("transport simplex: no leaving arc");

      for (std::size_t k = 0; k < up_i.size(); ++k)
        flow[up_i[k]] += (k % 2 == 0) ? -theta : theta;
      for (std::size_t k = 0; k < up_j.size(); ++k)
        flow[up_j[k]] += (k % 2 == 0) ? -theta : theta;

      // basis exchange: reverse parents from the entering endpoint down to
      // the leaving arc, then hang that chain on the other endpoint
      const int from = leave_on_i ? ei : ej;
      const int attach = leave_on_i ? ej : ei;
      std::vector<int> chain;
      for (int v = from;; v = parent[v]) {
        chain.push_back(v);
        if (v == leave) break;
      }
      std::vector<double> oldflow(chain.size());
      for (std::size_t k = 0; k < chain.size(); ++k) oldflow[k] = flow[chain[k]];
      for (std::size_t k = chain.size(); k-- > 1;) {
        parent[chain[k]] = chain[k - 1];
        flow[chain[k]] = oldflow[k - 1];
      }
      parent[chain[0]] = attach;
      flow[chain[0]] = theta;
      rebuild();
    }
    if (pivot >= max_pivots) throw solver_error("transport simplex: pivot budget exhausted");

    // objective from the tree flows
    double value = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (parent[v] < 0) continue;
      const bool v_is_source = v < ns;
      const std::size_t si = v_is_source ? v : static_cast<std::size_t>(parent[v]);
      const std::size_t tj = v_is_source ? static_cast<std::size_t>(parent[v]) - ns : v - ns;
      value += flow[v] * cost(si, tj);
    }
    return value;
  }
};

// exact LP value of W2 on a 2D state; cells capped for the dense solve
template <int D>
double wasserstein_grid2d(const ScalarField<D>& rho0, const ScalarField<D>& rho1,
                          const GeomState<D>& state) {
  static_assert(D == 2);
  const Mesh<2>& m = state.mesh();
  const index_t N = m.size();
  if (N > 4096) throw config_error("2D transport oracle caps at 4096 cells");
  ScalarField<2> w = state.weight();
  const double vol = m.cell_volume();

  const std::vector<double>* lo = &rho0.data;
  const std::vector<double>* hi = &rho1.data;
  if (detail::lex_less(rho1.data, rho0.data)) std::swap(lo, hi);

  std::vector<double> a(N), b(N);
  double sa = 0.0, sb = 0.0;
  for (index_t i = 0; i < N; ++i) {
    a[i] = (*lo)[i] * w.data[i] * vol;
    b[i] = (*hi)[i] * w.data[i] * vol;
    sa += a[i];
    sb += b[i];
  }
  b[N - 1] += sa - sb;  // absorb quadrature roundoff

  // distance rows, parallel over sources with deterministic storage
  std::vector<std::vector<double>> dist(static_cast<std::size_t>(N));
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t lo_i, std::size_t hi_i) {
    for (std::size_t i = lo_i; i < hi_i; ++i)
      dist[i] = grid_distances(state.g, static_cast<index_t>(i));
  });

  const double value = TransportSimplex::solve(
      static_cast<std::size_t>(N), static_cast<std::size_t>(N), a, b,
      [&](std::size_t i, std::size_t j) { const double d = dist[i][j]; return d * d; });
  return std::sqrt(std::fmax(0.0, value));
}

template <int D>
double wasserstein_oracle(const Density<D>& mu0, const Density<D>& mu1, const GeomState<D>& state) {
  if (mu0.rho.data == mu1.rho.data) return 0.0;
  if constexpr (D == 1) {
    return wasserstein_circle(mu0.rho, mu1.rho, state);
  } else if constexpr (D == 2) {
    return wasserstein_grid2d(mu0.rho, mu1.rho, state);
  } else {
    throw config_error("transport oracle supports dim 1 and 2 (equal measures aside)");
  }
}

}  // namespace grf
