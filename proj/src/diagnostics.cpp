#include "qrad/diagnostics.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "qrad/quadrature.hpp"

namespace qrad {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Fock: return "Fock";
    case Classification::NonFockUV: return "NonFockUV";
    case Classification::NonFockIR: return "NonFockIR";
    case Classification::NonFockBoth: return "NonFockBoth";
  }
  return "?";
}

LogFit fit_log(const std::vector<std::pair<double, double>>& xy) {
  LogFit f;
  const double n = static_cast<double>(xy.size());
  if (xy.size() < 2) throw ValidationError("log fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += std::log(x);
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (y - my);
  }
  f.b = sxy / sxx;
  f.a = my - f.b * mx;
  double ss = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (f.a + f.b * std::log(x));
    f.residuals.push_back(r);
    ss += r * r;
  }
  f.residual_rms = std::sqrt(ss / n);
  return f;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= lo && x[i] <= hi && y[i] > 0.0) pts.emplace_back(x[i], std::log(y[i]));
  }
  if (pts.size() < 2) return 0.0;
  return fit_log(pts).b;
}

namespace {

std::vector<double> edges_in(const SphericalGrid& g, FitWindow w, std::size_t min_points) {
  if (!(w.lo > 0.0) || !(w.hi > w.lo)) throw ValidationError("fit window must satisfy 0 < lo < hi");
  std::vector<double> out;
  for (double e : g.panel_edges()) {
    if (e >= w.lo * (1 - 1e-12) && e <= w.hi * (1 + 1e-12)) out.push_back(e);
  }
  if (out.size() < min_points) {
    throw ValidationError(fmt::format("only {} shells in window [{:g}, {:g}], need {}", out.size(), w.lo,
                                      w.hi, min_points));
  }
  return out;
}

void require_range(const SphericalGrid& g, double lo, double hi) {
  const auto& s = g.spec();
  if (lo < s.r_min * (1 - 1e-12) || hi > s.r_max * (1 + 1e-12)) {
    throw RangeError(fmt::format("fit needs the grid to cover [{:g}, {:g}]", lo, hi));
  }
}

}  // namespace

UvFit uv_fit(const EmissionAmplitude& amp, FitWindow window, std::size_t min_points) {
  const auto& g = *amp.grid;
  require_range(g, std::min(1.0, window.lo), window.hi);
  const auto prof = angular_norms(amp.J_T);
  UvFit out;
  for (double lam : edges_in(g, window, min_points)) {
    out.shells.emplace_back(lam, lam > 1.0 ? radial_integral(g, prof, 1.0, lam) : 0.0);
  }
  out.fit = fit_log(out.shells);
  const double mid = std::sqrt(window.lo * window.hi);
  out.midpoint_value = mid > 1.0 ? radial_integral(g, prof, 1.0, mid) : 0.0;

  const std::size_t na = g.n_angular();
  std::vector<double> w, s;
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    const double r = g.radii()[ir];
    if (r < window.lo || r > window.hi) continue;
    double m = 0.0;
    for (std::size_t a = 0; a < na; ++a) m = std::max(m, amp.J_T[ir * na + a].norm());
    out.sup_profile.emplace_back(r, m);
    if (m > 0.0) {
      w.push_back(r);
      s.push_back(m);
    }
  }
  if (w.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < w.size(); ++i) pts.emplace_back(w[i], std::log(s[i]));
    const LogFit f = fit_log(pts);
    out.amplitude_exponent = f.b;
    out.exponent_residual = f.residual_rms;
  }
  return out;
}

IrFit ir_fit(const EmissionAmplitude& amp, FitWindow window, std::size_t min_points) {
  const auto& g = *amp.grid;
  require_range(g, window.lo, std::max(1.0, window.hi));
  const auto prof = angular_norms(amp.J_T);
  IrFit out;
  std::vector<std::pair<double, double>> inv;
  for (double eps : edges_in(g, window, min_points)) {
    const double val = eps < 1.0 ? radial_integral(g, prof, eps, 1.0) : 0.0;
    out.shells.emplace_back(eps, val);
    inv.emplace_back(1.0 / eps, val);
  }
  out.fit = fit_log(inv);
  const double mid = std::sqrt(window.lo * window.hi);
  out.midpoint_value = mid < 1.0 ? radial_integral(g, prof, mid, 1.0) : 0.0;
  return out;
}

namespace {

double margin(double b, double theta, double mid) {
  const double thr = theta * mid;
  if (thr > 0.0) return b / thr;
  return b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

nlohmann::json pairs(const std::vector<std::pair<double, double>>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [x, y] : v) a.push_back({x, y});
  return a;
}

}  // namespace

double DivergenceReport::uv_margin() const { return margin(uv.fit.b, theta_rel, uv.midpoint_value); }
double DivergenceReport::ir_margin() const { return margin(ir.fit.b, theta_rel, ir.midpoint_value); }

DivergenceReport classify(const EmissionAmplitude& amp, const DiagnosticsOptions& opt) {
  DivergenceReport rep;
  rep.theta_rel = opt.theta_rel;
  rep.residual_ratio = opt.residual_ratio;
  rep.uv = uv_fit(amp, opt.uv, opt.min_points);
  rep.ir = ir_fit(amp, opt.ir, opt.min_points);

  auto decide = [&](const LogFit& f, double mid, bool& divergent, const char* name) {
    const bool above = f.b > opt.theta_rel * mid;
    if (!above) {
      divergent = false;
      return true;
    }
    if (f.residual_rms < opt.residual_ratio * f.b) {
      divergent = true;
      return true;
    }
    rep.note += fmt::format("{} coefficient {:.4g} above threshold but fit residual {:.4g} too large; ", name,
                            f.b, f.residual_rms);
    return false;
  };
  const bool uv_ok = decide(rep.uv.fit, rep.uv.midpoint_value, rep.uv_divergent, "UV");
  const bool ir_ok = decide(rep.ir.fit, rep.ir.midpoint_value, rep.ir_divergent, "IR");
  if (rep.uv_divergent && rep.ir_divergent) {
    rep.classification = Classification::NonFockBoth;
  } else if (rep.uv_divergent) {
    rep.classification = Classification::NonFockUV;
  } else if (rep.ir_divergent) {
    rep.classification = Classification::NonFockIR;
  } else {
    rep.classification = Classification::Fock;
  }
  if (!uv_ok || !ir_ok) {
    rep.inconclusive = true;
    throw InconclusiveError("divergence fits are inconclusive: " + rep.note, rep);
  }
  if (rep.classification == Classification::Fock) rep.photon_number = norm_squared(amp.J_T);
  return rep;
}

nlohmann::json DivergenceReport::to_json() const {
  nlohmann::json j;
  j["classification"] = inconclusive ? "Inconclusive" : to_string(classification);
  j["uv_shells"] = pairs(uv.shells);
  j["ir_shells"] = pairs(ir.shells);
  j["uv_log_coefficient"] = uv.fit.b;
  j["uv_intercept"] = uv.fit.a;
  j["uv_fit_residual"] = uv.fit.residual_rms;
  j["uv_midpoint_value"] = uv.midpoint_value;
  j["uv_margin"] = uv_margin();
  j["ir_log_coefficient"] = ir.fit.b;
  j["ir_intercept"] = ir.fit.a;
  j["ir_fit_residual"] = ir.fit.residual_rms;
  j["ir_midpoint_value"] = ir.midpoint_value;
  j["ir_margin"] = ir_margin();
  j["uv_amplitude_exponent"] = uv.amplitude_exponent;
  j["uv_amplitude_exponent_residual"] = uv.exponent_residual;
  j["uv_sup_profile"] = pairs(uv.sup_profile);
  j["thresholds"] = {{"theta_rel", theta_rel}, {"residual_ratio", residual_ratio}};
  j["uv_divergent"] = uv_divergent;
  j["ir_divergent"] = ir_divergent;
  if (photon_number) {
    j["photon_number"] = *photon_number;
  } else {
    j["photon_number"] = nullptr;
    j["photon_number_status"] = "withheld: out-state is not a Fock state";
  }
  if (!note.empty()) j["note"] = note;
  return j;
}

double Spectrum::total() const {
  double t = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) t += weight[i] * dn_domega[i];
  return t;
}

void Spectrum::write_csv(std::ostream& os) const {
  os << "omega,dN_domega,weight\n";
  for (std::size_t i = 0; i < omega.size(); ++i) {
    os << fmt::format("{:.17g},{:.17g},{:.17g}\n", omega[i], dn_domega[i], weight[i]);
  }
}

void Spectrum::write_angular_csv(std::ostream& os) const {
  os << fmt::format("# omega = {:.17g}\n", angular_omega);
  os << "cos_theta,phi,abs_JT_squared\n";
  for (std::size_t it = 0; it < cos_theta.size(); ++it) {
    for (std::size_t ip = 0; ip < phi.size(); ++ip) {
      os << fmt::format("{:.17g},{:.17g},{:.17g}\n", cos_theta[it], phi[ip], angular[it * phi.size() + ip]);
    }
  }
}

Spectrum spectrum(const EmissionAmplitude& amp, double angular_omega) {
  const auto& g = *amp.grid;
  const auto prof = angular_norms(amp.J_T);
  Spectrum s;
  s.omega = g.radii();
  s.weight = g.radial_weights();
  s.dn_domega.resize(prof.size());
  for (std::size_t i = 0; i < prof.size(); ++i) s.dn_domega[i] = 0.5 * s.omega[i] * prof[i];

  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    const double d = std::abs(std::log(s.omega[i] / angular_omega));
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  s.angular_omega = s.omega[best];
  s.cos_theta = g.cos_theta();
  for (std::size_t ip = 0; ip < g.n_phi(); ++ip) s.phi.push_back(g.phi(ip));
  for (std::size_t it = 0; it < g.n_theta(); ++it) {
    for (std::size_t ip = 0; ip < g.n_phi(); ++ip) {
      s.angular.push_back(amp.J_T[g.index(best, it, ip)].squaredNorm());
    }
  }
  return s;
}

}  // namespace qrad
