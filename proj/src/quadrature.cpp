#include "qrad/quadrature.hpp"

#include <fmt/format.h>

#include "qrad/gauss.hpp"

namespace qrad {

namespace {

void require_same_grid(const ModeFunction& a, const ModeFunction& b) {
  if (!same_grid(a.grid(), b.grid())) throw GridMismatchError("mode functions live on different grids");
}

// Integrand of the panel variable u at radial node i: g(r) (r/2) dr/du.
double panel_density(const SphericalGrid& grid, std::span<const double> g, std::size_t i) {
  const double r = grid.radii()[i];
  const double jac = grid.spec().layout == RadialLayout::Log ? r : 1.0;
  return g[i] * 0.5 * r * jac;
}

double lagrange(std::span<const double> xs, std::span<const double> ys, double x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double l = 1.0;
    for (std::size_t m = 0; m < xs.size(); ++m) {
      if (m != j) l *= (x - xs[m]) / (xs[j] - xs[m]);
    }
    acc += l * ys[j];
  }
  return acc;
}

}  // namespace

std::vector<double> angular_norms(const ModeFunction& f) {
  const auto& g = f.grid();
  std::vector<double> out(g.n_radial(), 0.0);
  const std::size_t nt = g.n_theta(), np = g.n_phi();
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    double shell = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
      double ring = 0.0;
      for (std::size_t ip = 0; ip < np; ++ip) ring += f[g.index(ir, it, ip)].squaredNorm();
      shell += ring * g.angular_weight(it);
    }
    out[ir] = shell;
  }
  return out;
}

double radial_integral(const SphericalGrid& grid, std::span<const double> g, double a, double b) {
  const auto& s = grid.spec();
  const double slack = 1e-12 * s.r_max;
  if (!(a < b) || a < s.r_min - slack || b > s.r_max + slack) {
    throw RangeError(fmt::format("shell [{:g}, {:g}] outside grid range [{:g}, {:g}]", a, b,
                                 s.r_min, s.r_max));
  }
  if (g.size() != grid.n_radial()) throw GridMismatchError("radial profile size mismatch");
  a = std::max(a, s.r_min);
  b = std::min(b, s.r_max);
  constexpr std::size_t q = SphericalGrid::nodes_per_panel;
  const auto& edges = grid.panel_edges();
  const GaussRule rule = gauss_legendre(static_cast<int>(q));
  double total = 0.0;
  for (std::size_t k = grid.panel_of(a); k + 1 < edges.size() && edges[k] < b; ++k) {
    const double lo = std::max(a, edges[k]);
    const double hi = std::min(b, edges[k + 1]);
    if (!(hi > lo)) continue;
    const std::size_t first = k * q;
    if (lo == edges[k] && hi == edges[k + 1]) {
      for (std::size_t i = first; i < first + q; ++i) total += grid.shell_weight(i) * g[i];
      continue;
    }
    double us[q], ys[q];
    for (std::size_t j = 0; j < q; ++j) {
      us[j] = grid.to_u(grid.radii()[first + j]);
      ys[j] = panel_density(grid, g, first + j);
    }
    const double ulo = grid.to_u(lo), uhi = grid.to_u(hi);
    const double mid = 0.5 * (ulo + uhi), half = 0.5 * (uhi - ulo);
    for (std::size_t j = 0; j < q; ++j) {
      total += half * rule.weights[j] * lagrange(us, ys, mid + half * rule.nodes[j]);
    }
  }
  return total;
}

double shell_integral(const ModeFunction& f, double a, double b) {
  const auto g = angular_norms(f);
  return radial_integral(f.grid(), g, a, b);
}

cplx pairing(const ModeFunction& f1, const ModeFunction& f2) {
  require_same_grid(f1, f2);
  const auto& g = f1.grid();
  cplx total = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) total += g.measure_weight(i) * f1[i].dot(f2[i]);
  return total;
}

cplx pairing_l2(const ModeFunction& f1, const ModeFunction& f2) {
  require_same_grid(f1, f2);
  const auto& g = f1.grid();
  cplx total = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    total += 2.0 * g.radius(i) * g.measure_weight(i) * f1[i].dot(f2[i]);
  }
  return total;
}

double norm_squared(const ModeFunction& f) {
  const auto g = angular_norms(f);
  double total = 0.0;
  for (std::size_t ir = 0; ir < g.size(); ++ir) total += f.grid().shell_weight(ir) * g[ir];
  return total;
}

}  // namespace qrad
