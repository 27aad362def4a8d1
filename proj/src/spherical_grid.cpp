#include "qrad/spherical_grid.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qrad/gauss.hpp"

namespace qrad {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const double dn = n;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = dn * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = dn * (x * p0 - p1) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

Mat3 frame_from_axis(const Vec3& axis) {
  const double n = axis.norm();
  if (!(n > 0.0) || !axis.allFinite()) throw ValidationError("grid axis must be a nonzero vector");
  const Vec3 e3 = axis / n;
  Eigen::Index k = 0;
  e3.cwiseAbs().minCoeff(&k);
  Vec3 c = Vec3::Zero();
  c[k] = 1.0;
  const Vec3 e1 = (c - c.dot(e3) * e3).normalized();
  const Vec3 e2 = e3.cross(e1);
  Mat3 f;
  f.col(0) = e1;
  f.col(1) = e2;
  f.col(2) = e3;
  return f;
}

SphericalGrid::SphericalGrid(const GridSpec& spec) : spec_(spec) {
  if (spec.n_theta < 1 || spec.n_phi < 1) throw ValidationError("angular node counts must be positive");
  if (!(spec.r_max > spec.r_min) || !std::isfinite(spec.r_max)) {
    throw ValidationError("grid requires r_min < r_max < inf");
  }
  int panels = 0;
  if (spec.layout == RadialLayout::Log) {
    if (!(spec.r_min > 0.0)) throw ValidationError("log grid requires r_min > 0 (p = 0 is excluded)");
    if (spec.radial_per_decade < 1) throw ValidationError("radial_per_decade must be positive");
    const double decades = std::log10(spec.r_max / spec.r_min);
    panels = std::max(1, static_cast<int>(std::lround(decades * spec.radial_per_decade /
                                                      static_cast<double>(nodes_per_panel))));
  } else {
    if (spec.r_min < 0.0) throw ValidationError("linear grid requires r_min >= 0");
    if (spec.radial_panels < 1) throw ValidationError("linear grid requires radial_panels >= 1");
    panels = spec.radial_panels;
  }
  frame_ = frame_from_axis(spec.axis);

  const GaussRule g = gauss_legendre(nodes_per_panel);
  const double u0 = to_u(spec.r_min);
  const double u1 = to_u(spec.r_max);
  const double du = (u1 - u0) / panels;
  edges_.resize(static_cast<std::size_t>(panels) + 1);
  for (int k = 0; k <= panels; ++k) edges_[static_cast<std::size_t>(k)] = from_u(u0 + k * du);
  edges_.front() = spec.r_min;
  edges_.back() = spec.r_max;
  for (int k = 0; k < panels; ++k) {
    const double mid = u0 + (k + 0.5) * du;
    for (int i = 0; i < nodes_per_panel; ++i) {
      const double u = mid + 0.5 * du * g.nodes[static_cast<std::size_t>(i)];
      const double w = 0.5 * du * g.weights[static_cast<std::size_t>(i)];
      const double r = from_u(u);
      r_.push_back(r);
      wr_.push_back(spec.layout == RadialLayout::Log ? w * r : w);
    }
  }

  const GaussRule gt = gauss_legendre(spec.n_theta);
  for (int i = 0; i < spec.n_theta; ++i) {
    const double c = gt.nodes[static_cast<std::size_t>(i)];
    cos_theta_.push_back(c);
    sin_theta_.push_back(std::sqrt(std::max(0.0, 1.0 - c * c)));
    wtheta_.push_back(gt.weights[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < spec.n_phi; ++j) {
    const double ph = 2.0 * pi * j / spec.n_phi;
    cos_phi_.push_back(std::cos(ph));
    sin_phi_.push_back(std::sin(ph));
  }
}

double SphericalGrid::to_u(double r) const {
  return spec_.layout == RadialLayout::Log ? std::log(r) : r;
}

double SphericalGrid::from_u(double u) const {
  return spec_.layout == RadialLayout::Log ? std::exp(u) : u;
}

Vec3 SphericalGrid::direction(std::size_t it, std::size_t ip) const noexcept {
  const Vec3 local(sin_theta_[it] * cos_phi_[ip], sin_theta_[it] * sin_phi_[ip], cos_theta_[it]);
  return frame_ * local;
}

Vec3 SphericalGrid::momentum(std::size_t i) const noexcept {
  const std::size_t ir = i / n_angular();
  const std::size_t rem = i % n_angular();
  return r_[ir] * direction(rem / n_phi(), rem % n_phi());
}

double SphericalGrid::measure_weight(std::size_t i) const noexcept {
  const std::size_t ir = i / n_angular();
  const std::size_t it = (i % n_angular()) / n_phi();
  return shell_weight(ir) * angular_weight(it);
}

std::size_t SphericalGrid::panel_of(double r) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges_.begin() - 1, 0));
  return std::min(k, edges_.size() - 2);
}

std::string SphericalGrid::describe() const {
  return fmt::format("{} grid r in [{:g}, {:g}], {} radial x {} theta x {} phi nodes",
                     spec_.layout == RadialLayout::Log ? "log" : "linear", spec_.r_min,
                     spec_.r_max, n_radial(), n_theta(), n_phi());
}

bool same_grid(const SphericalGrid& a, const SphericalGrid& b) {
  return &a == &b || a.spec() == b.spec();
}

}  // namespace qrad
