#include "qrad/mode_function.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace qrad {

ModeFunction::ModeFunction(std::shared_ptr<const SphericalGrid> grid, std::vector<CVec3> samples,
                           bool transverse)
    : grid_(std::move(grid)), samples_(std::move(samples)), transverse_(transverse) {
  if (!grid_) throw ValidationError("mode function needs a grid");
  if (samples_.size() != grid_->size()) {
    throw GridMismatchError(fmt::format("{} samples for a grid of {} nodes", samples_.size(),
                                        grid_->size()));
  }
}

ModeFunction ModeFunction::zero(std::shared_ptr<const SphericalGrid> grid, bool transverse) {
  const std::size_t n = grid->size();
  return ModeFunction(std::move(grid), std::vector<CVec3>(n, CVec3::Zero()), transverse);
}

ModeFunction ModeFunction::sample(std::shared_ptr<const SphericalGrid> grid,
                                  const std::function<CVec3(const Vec3&)>& h, bool transverse) {
  std::vector<CVec3> s(grid->size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = h(grid->momentum(i));
  return ModeFunction(std::move(grid), std::move(s), transverse);
}

double ModeFunction::max_longitudinal_fraction() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double hn = samples_[i].norm();
    if (hn == 0.0) continue;
    const Vec3 p = grid_->momentum(i);
    const double l = std::abs(p.cast<cplx>().dot(samples_[i]));
    worst = std::max(worst, l / (p.norm() * hn));
  }
  return worst;
}

void ModeFunction::check_transverse(double tol) const {
  const double f = max_longitudinal_fraction();
  if (f > tol) {
    throw ValidationError(fmt::format("mode function not transverse: |p.h|/(|p||h|) = {:.3e}", f));
  }
}

double ModeFunction::max_abs() const {
  double m = 0.0;
  for (const auto& s : samples_) m = std::max(m, s.norm());
  return m;
}

bool ModeFunction::decays_faster_than(int order, double rel) const {
  const auto& g = *grid_;
  const std::size_t na = g.n_angular();
  double global = 0.0;
  double outer = 0.0;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    const double r = g.radii()[ir];
    const double poly = std::pow(1.0 + r * r, 0.5 * order);
    double m = 0.0;
    for (std::size_t a = 0; a < na; ++a) m = std::max(m, samples_[ir * na + a].norm());
    global = std::max(global, m * poly);
    if (ir + 1 == g.n_radial()) outer = m * poly;
  }
  return outer <= rel * global;
}

nlohmann::json grid_metadata(const SphericalGrid& g) {
  const auto& s = g.spec();
  return {{"r_min", s.r_min},
          {"r_max", s.r_max},
          {"radial_per_decade", s.radial_per_decade},
          {"radial_panels", s.radial_panels},
          {"n_theta", s.n_theta},
          {"n_phi", s.n_phi},
          {"layout", s.layout == RadialLayout::Log ? "log" : "linear"},
          {"axis", {s.axis.x(), s.axis.y(), s.axis.z()}},
          {"n_radial", g.n_radial()}};
}

void ModeFunction::write_csv(std::ostream& os, const nlohmann::json& metadata,
                             std::size_t stride) const {
  nlohmann::json meta = metadata.is_object() ? metadata : nlohmann::json::object();
  meta["grid"] = grid_metadata(*grid_);
  meta["transverse"] = transverse_;
  meta["stride"] = stride;
  os << "# " << meta.dump() << '\n';
  os << "p_x,p_y,p_z,re_h_x,im_h_x,re_h_y,im_h_y,re_h_z,im_h_z\n";
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t i = 0; i < samples_.size(); i += stride) {
    const Vec3 p = grid_->momentum(i);
    const CVec3& h = samples_[i];
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                      p.x(), p.y(), p.z(), h.x().real(), h.x().imag(), h.y().real(),
                      h.y().imag(), h.z().real(), h.z().imag());
  }
}

}  // namespace qrad
