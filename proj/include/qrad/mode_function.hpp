#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "json.hpp"

#include "qrad/spherical_grid.hpp"

namespace qrad {

// Complex 3-vector field h(p) sampled on a SphericalGrid.
class ModeFunction {
public:
  ModeFunction(std::shared_ptr<const SphericalGrid> grid, std::vector<CVec3> samples,
               bool transverse = false);

  static ModeFunction zero(std::shared_ptr<const SphericalGrid> grid, bool transverse = false);
  static ModeFunction sample(std::shared_ptr<const SphericalGrid> grid,
                             const std::function<CVec3(const Vec3&)>& h, bool transverse = false);

  const SphericalGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const SphericalGrid>& grid_ptr() const noexcept { return grid_; }
  const std::vector<CVec3>& samples() const noexcept { return samples_; }
  const CVec3& operator[](std::size_t i) const noexcept { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool transverse() const noexcept { return transverse_; }

  // Throws ValidationError when some |p.h| > tol |p||h|.
  void check_transverse(double tol = 1e-12) const;
  // Largest |p.h| / (|p||h|) over the grid.
  double max_longitudinal_fraction() const;

  // Decay check for the dense test-mode domain: with M(r) the shell maximum of |h|,
  // requires M(r) (1 + r^2)^(order/2) on the outermost shell to be at most
  // rel times its maximum over all shells.
  bool decays_faster_than(int order, double rel = 1e-3) const;

  double max_abs() const;

  // CSV with columns p_x,p_y,p_z,Re h_x,Im h_x,...; the header line carries the
  // grid metadata as a JSON comment. Every stride-th sample is written.
  void write_csv(std::ostream& os, const nlohmann::json& metadata = {}, std::size_t stride = 1) const;

private:
  std::shared_ptr<const SphericalGrid> grid_;
  std::vector<CVec3> samples_;
  bool transverse_;
};

nlohmann::json grid_metadata(const SphericalGrid& g);

}  // namespace qrad
