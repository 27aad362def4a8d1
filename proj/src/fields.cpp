#include "qrad/fields.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qrad/emission.hpp"
#include "qrad/gauss.hpp"
#include "qrad/oscillatory.hpp"
#include "qrad/quadrature.hpp"

namespace qrad {

double hermite_he(int n, double x) {
  if (n < 0) throw ValidationError("Hermite order must be nonnegative");
  double h0 = 1.0, h1 = x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

void TestFunction::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) throw ValidationError("test function width must be positive");
  if (!center.allFinite() || !polarization.allFinite() || !std::isfinite(amplitude)) {
    throw ValidationError("test function parameters must be finite");
  }
  for (int a : powers) {
    if (a < 0 || a > 8) throw ValidationError("polynomial powers must lie in [0, 8]");
  }
}

int TestFunction::degree() const {
  if (family == TestFamily::Gaussian) return 0;
  return powers[0] + powers[1] + powers[2];
}

Vec3 TestFunction::value(const Vec3& x) const {
  const Vec3 y = (x - center) / width;
  double s = amplitude * std::exp(-0.5 * y.squaredNorm());
  if (family == TestFamily::GaussianPolynomial) {
    for (int k = 0; k < 3; ++k) s *= std::pow(y[k], powers[static_cast<std::size_t>(k)]);
  }
  return s * polarization;
}

CVec3 TestFunction::transform_centered(const Vec3& p) const {
  const double s3 = width * width * width;
  cplx s = amplitude * s3 * std::exp(-0.5 * width * width * p.squaredNorm());
  if (family == TestFamily::GaussianPolynomial) {
    for (int k = 0; k < 3; ++k) {
      const int a = powers[static_cast<std::size_t>(k)];
      if (a == 0) continue;
      s *= std::pow(cplx(0.0, -1.0), a) * hermite_he(a, width * p[k]);
    }
  }
  return s * polarization.cast<cplx>();
}

CVec3 TestFunction::transform(const Vec3& p) const {
  return transform_centered(p) * std::polar(1.0, -p.dot(center));
}

double TestFunction::momentum_cutoff() const {
  const int d = degree();
  double s = std::sqrt(2.0 * 39.2);
  while (0.5 * s * s - d * std::log(std::max(s, 1.0)) < 39.2) s *= 1.05;
  return s / width;
}

namespace {

constexpr double inv_2pi_32 = 0.063493635934240969;  // (2 pi)^{-3/2}

struct SphereRule {
  std::vector<double> r, wr, ct, wt;
  int n_phi;
};

SphereRule make_rule(double radius, int panels, int n_theta, int n_phi) {
  SphereRule s;
  const GaussRule g = gauss_legendre(8);
  const double h = radius / panels;
  for (int k = 0; k < panels; ++k) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      s.r.push_back(h * (k + 0.5 + 0.5 * g.nodes[i]));
      s.wr.push_back(0.5 * h * g.weights[i]);
    }
  }
  const GaussRule gt = gauss_legendre(n_theta);
  s.ct = gt.nodes;
  s.wt = gt.weights;
  s.n_phi = n_phi;
  return s;
}

// (2 pi)^{-3/2} int sin(rt)/r e^{ip.d} F0(p) dp with the polar axis along d.
CVec3 u_f_sum(const TestFunction& f, const Vec3& d, double t, const SphereRule& rule) {
  const double dn = d.norm();
  const Mat3 frame = frame_from_axis(dn > 0.0 ? d : Vec3::UnitZ());
  const double wphi = 2.0 * pi / rule.n_phi;
  CVec3 total = CVec3::Zero();
  for (std::size_t ir = 0; ir < rule.r.size(); ++ir) {
    const double r = rule.r[ir];
    const double radial = rule.wr[ir] * r * std::sin(r * t);
    if (radial == 0.0) continue;
    CVec3 shell = CVec3::Zero();
    for (std::size_t it = 0; it < rule.ct.size(); ++it) {
      const double c = rule.ct[it];
      const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
      const cplx ph = std::polar(1.0, r * c * dn);
      CVec3 ring = CVec3::Zero();
      for (int ip = 0; ip < rule.n_phi; ++ip) {
        const double phi = wphi * ip;
        const Vec3 n = frame * Vec3(sn * std::cos(phi), sn * std::sin(phi), c);
        ring += f.transform_centered(r * n);
      }
      shell += rule.wt[it] * ph * ring;
    }
    total += radial * wphi * shell;
  }
  return inv_2pi_32 * total;
}

}  // namespace

KernelValue u_f(const TestFunction& f, const Vec3& x, double t, const KernelOptions& opt) {
  f.validate();
  KernelValue out;
  if (t == 0.0) return out;
  const Vec3 d = x - f.center;
  const double radius = f.momentum_cutoff();
  const double k_ang = radius * d.norm();
  const double k_rad = radius * (d.norm() + std::abs(t));
  const int deg = f.degree();
  auto rule_at = [&](double res) {
    const int panels = static_cast<int>(std::ceil(res * (k_rad / 3.0 + 6.0)));
    const int nt = static_cast<int>(std::ceil(res * (0.5 * k_ang + 20.0)));
    const int np = static_cast<int>(std::ceil(res * (2.0 * deg + 8.0)));
    return make_rule(radius, panels, nt, np);
  };
  const CVec3 coarse = u_f_sum(f, d, t, rule_at(opt.resolution));
  const CVec3 fine = u_f_sum(f, d, t, rule_at(1.5 * opt.resolution));
  out.value = fine.real();
  out.imag_residual = fine.imag().norm();
  out.error_estimate = (fine - coarse).norm();
  const double scale = std::abs(f.amplitude) * f.polarization.norm() * f.width;
  const double tol = opt.rel_tol * fine.norm() + opt.abs_tol * scale;
  if (out.error_estimate > tol && opt.throw_on_failure) {
    throw AccuracyError(fmt::format("u_f quadrature did not converge: estimate {:.3e}", out.error_estimate),
                        out.error_estimate, tol);
  }
  return out;
}

KernelValue retarded_kernel(const TestFunction& f, double t0, const Vec3& x, double t,
                            KernelSign sign, const KernelOptions& opt) {
  const double s = t - t0;
  if (sign == KernelSign::Retarded) {
    if (!(s > 0.0)) return {};
    return u_f(f, x, s, opt);
  }
  if (!(s < 0.0)) return {};
  KernelValue v = u_f(f, x, s, opt);
  v.value = -v.value;
  return v;
}

cplx vacuum_weyl(const ModeFunction& h) { return std::exp(-0.25 * norm_squared(h)); }

cplx coherent_weyl(const ModeFunction& h, const ModeFunction& J) {
  const double phase = std::sqrt(2.0) * pairing(J, h).real();
  return std::exp(cplx(-0.25 * norm_squared(h), phase));
}

TailEstimate pairing_with_tails(const ModeFunction& J, const ModeFunction& h) {
  if (!same_grid(J.grid(), h.grid())) throw GridMismatchError("mode functions live on different grids");
  const auto& g = J.grid();
  const std::size_t nt = g.n_theta(), np = g.n_phi();
  std::vector<cplx> shell(g.n_radial());
  for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
    cplx acc = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
      cplx ring = 0.0;
      for (std::size_t ip = 0; ip < np; ++ip) {
        const std::size_t i = g.index(ir, it, ip);
        ring += J[i].dot(h[i]);
      }
      acc += g.angular_weight(it) * ring;
    }
    shell[ir] = g.shell_weight(ir) * acc;
  }
  TailEstimate out;
  for (const cplx& s : shell) out.value += s;

  const auto& spec = g.spec();
  if (spec.layout != RadialLayout::Log || spec.r_max / spec.r_min < 1e4) return out;
  auto decade = [&](double lo, double hi) {
    cplx acc = 0.0;
    for (std::size_t ir = 0; ir < g.n_radial(); ++ir) {
      const double r = g.radii()[ir];
      if (r >= lo && r < hi) acc += shell[ir];
    }
    return std::abs(acc);
  };
  auto tail = [](double d1, double d2) {
    if (d1 == 0.0) return 0.0;
    if (!(d1 < d2)) return std::numeric_limits<double>::infinity();
    const double rho = d1 / d2;
    return d1 * rho / (1.0 - rho);
  };
  out.ir_tail = tail(decade(spec.r_min, 10 * spec.r_min), decade(10 * spec.r_min, 100 * spec.r_min));
  out.uv_tail = tail(decade(spec.r_max / 10, spec.r_max * 1.0000001),
                     decade(spec.r_max / 100, spec.r_max / 10));
  return out;
}

cplx out_state_weyl(const ModeFunction& h, const ModeFunction& J_T, const PairingConvergence& conv) {
  const TailEstimate te = pairing_with_tails(J_T, h);
  const double tail = te.ir_tail + te.uv_tail;
  const double tol = conv.tail_rel * std::max(std::abs(te.value), 1e-300);
  if (tail > tol) {
    throw AccuracyError(fmt::format("pairing (J_T, h) does not converge on the grid: tail estimate {:.3e}",
                                    tail),
                        tail, tol);
  }
  return vacuum_weyl(h) * std::polar(1.0, std::sqrt(2.0) * te.value.real());
}

cplx coherent_positivity_value(const std::vector<cplx>& L, const std::vector<cplx>& c,
                               const Eigen::MatrixXcd& grams) {
  const auto n = static_cast<Eigen::Index>(c.size());
  if (L.size() != c.size() || grams.rows() != n || grams.cols() != n) {
    throw ValidationError("positivity check needs matching pairings, coefficients and Gram matrix");
  }
  const double s2 = std::sqrt(2.0);
  cplx total = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto um = static_cast<std::size_t>(m), uk = static_cast<std::size_t>(k);
      const double dist2 = (grams(k, k) + grams(m, m)).real() - 2.0 * grams(m, k).real();
      const double phase = s2 * (L[uk].real() - L[um].real()) + 0.5 * grams(m, k).imag();
      total += std::conj(c[um]) * c[uk] * std::exp(cplx(-0.25 * dist2, phase));
    }
  }
  return total;
}

double coherent_positivity_check(const std::vector<cplx>& L, const std::vector<cplx>& c,
                                 const Eigen::MatrixXcd& grams) {
  return coherent_positivity_value(L, c, grams).real();
}

CVec3 endpoint_decay_integral(const TestFunction& f, const Vec3& v, double t,
                              const EndpointOptions& opt) {
  f.validate();
  if (v.norm() >= 1.0) throw SuperluminalError("endpoint velocity must satisfy |v| < 1");
  const Mat3 frame = frame_from_axis(v.norm() > 0.0 ? v : Vec3::UnitZ());
  const double radius = f.momentum_cutoff();
  const double cn = f.center.norm();
  const int n_phi = 2 * f.degree() + 8 + static_cast<int>(std::ceil(2.0 * radius * cn));
  const GaussRule gt = gauss_legendre(opt.n_theta);
  OscOptions osc;
  osc.rel_tol = opt.rel_tol;
  const Interval support[] = {{0.0, radius}};
  CVec3 total = CVec3::Zero();
  for (std::size_t it = 0; it < gt.nodes.size(); ++it) {
    const double c = gt.nodes[it];
    const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = 2.0 * pi * ip / n_phi;
      const Vec3 n = frame * Vec3(sn * std::cos(phi), sn * std::sin(phi), c);
      const double a = 1.0 - n.dot(v);
      auto integrand = [&](double r) -> CVec3 {
        const CVec3 ft = project_transverse(n, f.transform(-r * n));
        return std::polar(1.0, r * a * t) / (2.0 * a) * ft;
      };
      const auto res = integrate_plain(integrand, support, a * std::abs(t) + cn, osc);
      total += gt.weights[it] * (2.0 * pi / n_phi) * res.value;
    }
  }
  return total;
}

}  // namespace qrad
