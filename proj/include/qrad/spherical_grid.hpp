#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "qrad/types.hpp"

namespace qrad {

enum class RadialLayout { Log, Linear };

struct GridSpec {
  double r_min = 1e-4;
  double r_max = 1e4;
  int radial_per_decade = 160;  // log layout
  int radial_panels = 0;        // linear layout: number of 8-node panels
  int n_theta = 32;
  int n_phi = 64;
  RadialLayout layout = RadialLayout::Log;
  Vec3 axis = Vec3::UnitZ();  // polar axis of the angular rule

  bool operator==(const GridSpec&) const = default;
};

// Tensor-product quadrature for integrals over r_min <= |p| <= r_max against the
// measure dp/(2 omega): composite Gauss-Legendre in the radial variable (ln r for
// the log layout) times Gauss-Legendre in cos(theta) times the uniform rule in phi.
class SphericalGrid {
public:
  static constexpr int nodes_per_panel = 8;

  explicit SphericalGrid(const GridSpec& spec);

  static std::shared_ptr<const SphericalGrid> make(const GridSpec& spec) {
    return std::make_shared<const SphericalGrid>(spec);
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t n_radial() const noexcept { return r_.size(); }
  std::size_t n_theta() const noexcept { return cos_theta_.size(); }
  std::size_t n_phi() const noexcept { return cos_phi_.size(); }
  std::size_t n_angular() const noexcept { return n_theta() * n_phi(); }
  std::size_t size() const noexcept { return n_radial() * n_angular(); }

  std::size_t index(std::size_t ir, std::size_t it, std::size_t ip) const noexcept {
    return (ir * n_theta() + it) * n_phi() + ip;
  }

  const std::vector<double>& radii() const noexcept { return r_; }
  // Weight of dr at each radial node.
  const std::vector<double>& radial_weights() const noexcept { return wr_; }
  const std::vector<double>& panel_edges() const noexcept { return edges_; }
  const std::vector<double>& cos_theta() const noexcept { return cos_theta_; }
  const std::vector<double>& theta_weights() const noexcept { return wtheta_; }
  double phi_weight() const noexcept { return 2.0 * pi / static_cast<double>(n_phi()); }
  double phi(std::size_t ip) const noexcept { return phi_weight() * static_cast<double>(ip); }

  // Orthonormal frame (e1, e2, axis) of the angular rule.
  const Mat3& frame() const noexcept { return frame_; }

  Vec3 direction(std::size_t it, std::size_t ip) const noexcept;
  Vec3 momentum(std::size_t i) const noexcept;
  double radius(std::size_t i) const noexcept { return r_[i / n_angular()]; }
  std::size_t radial_index(std::size_t i) const noexcept { return i / n_angular(); }
  // dOmega weight of angular node (it, ip).
  double angular_weight(std::size_t it) const noexcept { return wtheta_[it] * phi_weight(); }
  // Full weight of sample i for the measure dp/(2 omega).
  double measure_weight(std::size_t i) const noexcept;
  // Weight per radial node of integral of g(r) (r/2) dr, i.e. for angular integrals.
  double shell_weight(std::size_t ir) const noexcept { return 0.5 * r_[ir] * wr_[ir]; }

  // Radial panel containing r (clamped to the grid range).
  std::size_t panel_of(double r) const;
  // Map between the radial coordinate and the panel variable (ln r or r).
  double to_u(double r) const;
  double from_u(double u) const;

  std::string describe() const;

private:
  GridSpec spec_;
  std::vector<double> r_, wr_, edges_;
  std::vector<double> cos_theta_, sin_theta_, wtheta_;
  std::vector<double> cos_phi_, sin_phi_;
  Mat3 frame_;
};

// Orthonormal frame whose third column is the unit vector along axis.
Mat3 frame_from_axis(const Vec3& axis);

bool same_grid(const SphericalGrid& a, const SphericalGrid& b);

}  // namespace qrad
