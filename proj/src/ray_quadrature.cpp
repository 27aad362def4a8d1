#include "qrad/ray_quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qrad/gauss.hpp"

namespace qrad {

void spherical_bessel_j(int n, double x, double* out) {
  if (n <= 0) return;
  std::fill(out, out + n, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return;
  }
  if (x < 0.5) {
    // Power series; the ratio of successive terms is below x^2 / 6.
    double lead = 1.0;
    for (int l = 0; l < n; ++l) {
      if (l > 0) lead *= x / static_cast<double>(2 * l + 1);
      double term = 1.0, sum = 1.0;
      for (int k = 1; k < 30; ++k) {
        term *= -0.5 * x * x / (static_cast<double>(k) * static_cast<double>(2 * l + 2 * k + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      out[l] = lead * sum;
      if (lead == 0.0) break;
    }
    return;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  if (x >= static_cast<double>(n)) {
    out[0] = j0;
    if (n > 1) out[1] = j1;
    for (int l = 1; l + 1 < n; ++l) out[l + 1] = (2 * l + 1) / x * out[l] - out[l - 1];
    return;
  }
  // Miller's backward recurrence, normalized by whichever of j_0, j_1 is larger.
  const int start = n + 20 + static_cast<int>(x);
  std::array<double, 160> buf{};
  if (start + 2 > static_cast<int>(buf.size())) throw ValidationError("spherical_bessel_j: order too large");
  buf[start + 1] = 0.0;
  buf[start] = 1e-30;
  for (int l = start; l > 0; --l) {
    buf[l - 1] = (2 * l + 1) / x * buf[l] - buf[l + 1];
    if (std::abs(buf[l - 1]) > 1e200) {
      for (int k = l - 1; k <= start; ++k) buf[k] *= 1e-200;
    }
  }
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / buf[0] : j1 / buf[1];
  for (int l = 0; l < n; ++l) out[l] = buf[l] * scale;
}

namespace {

constexpr long double two_pi_l = 6.283185307179586476925286766559005768L;

struct Basis {
  GaussRule rule;
  // proj[l][j] = (2l+1)/2 w_j P_l(x_j)
  std::array<std::array<double, RayQuadrature::order>, RayQuadrature::order> proj{};

  Basis() : rule(gauss_legendre(RayQuadrature::order)) {
    constexpr int m = RayQuadrature::order;
    for (int j = 0; j < m; ++j) {
      const double x = rule.nodes[j];
      std::array<double, m> p{};
      p[0] = 1.0;
      p[1] = x;
      for (int l = 1; l + 1 < m; ++l) p[l + 1] = ((2 * l + 1) * x * p[l] - l * p[l - 1]) / (l + 1);
      for (int l = 0; l < m; ++l) proj[l][j] = 0.5 * (2 * l + 1) * rule.weights[j] * p[l];
    }
  }
};

const Basis& basis() {
  static const Basis b;
  return b;
}

// s(t) = t - n.x(t) in extended precision.
long double ray_time(const Trajectory::Piece& pc, const Vec3& n, double t) {
  const long double tau = static_cast<long double>(t) - static_cast<long double>(pc.origin);
  long double nx = 0.0L;
  for (int d = 0; d < 3; ++d) {
    long double x = 0.0L;
    for (std::size_t k = kMaxDegree + 1; k-- > 0;) x = x * tau + pc.poly.c[k][d];
    nx += static_cast<long double>(n[d]) * x;
  }
  return static_cast<long double>(t) - nx;
}

Vec3 profile(const VecPoly::Jet& jt, const Vec3& n, Representation rep) {
  const double a = 1.0 - n.dot(jt.v);
  const double ia = 1.0 / a;
  switch (rep) {
    case Representation::Direct: return jt.v * ia;
    case Representation::Ibp1: {
      const double b = n.dot(jt.a);
      return (-b * ia * ia * ia) * jt.v - (ia * ia) * jt.a;
    }
    case Representation::Ibp2: {
      const double b = n.dot(jt.a), c = n.dot(jt.j);
      const double ia2 = ia * ia, ia3 = ia2 * ia;
      return ((-c * ia3 - 3.0 * b * b * ia3 * ia) * ia) * jt.v - (3.0 * b * ia3 * ia) * jt.a -
             (ia2 * ia) * jt.j;
    }
    default: throw RepresentationError("ray quadrature supports direct, ibp1 and ibp2");
  }
}

struct Span {
  std::size_t piece;
  double lo;
  double hi;
};

}  // namespace

RayQuadrature::RayQuadrature(const Trajectory& tr, const Vec3& direction, Representation rep,
                             const RayOptions& opt)
    : rep_(rep) {
  if (direction.norm() == 0.0) throw ZeroMomentumError("ray direction must be nonzero");
  if (!applicable(tr, rep)) {
    throw RepresentationError(fmt::format("{} representation does not apply to this trajectory", to_string(rep)));
  }
  const Vec3 n = direction.normalized();
  constexpr int m = order;
  const Basis& B = basis();
  const auto pieces = tr.pieces();

  std::vector<Span> todo;
  for (std::size_t i = 1; i + 1 < pieces.size(); ++i) {
    const bool vanishes = rep == Representation::Direct ? tr.velocity_vanishes_on(i) : tr.acceleration_vanishes_on(i);
    if (vanishes) continue;
    const double lo = pieces[i].lo, hi = pieces[i].hi;
    for (int k = 0; k < 4; ++k) todo.push_back({i, lo + (hi - lo) * k / 4.0, lo + (hi - lo) * (k + 1) / 4.0});
  }

  struct Trial {
    Panel panel;
    double max_h;
  };
  auto build = [&](const Span& sp) {
    const auto& pc = pieces[sp.piece];
    const long double sa = ray_time(pc, n, sp.lo), sb = ray_time(pc, n, sp.hi);
    Trial out;
    out.panel.center = 0.5L * (sa + sb);
    out.panel.half = static_cast<double>(0.5L * (sb - sa));
    const VecPoly q = pc.poly.shifted(sp.lo - pc.origin);
    const double len = sp.hi - sp.lo;
    std::array<Vec3, m> h;
    out.max_h = 0.0;
    for (int j = 0; j < m; ++j) {
      // Solve tau - n.(q(tau) - q(0)) = u for tau in [0, len].
      const double u = out.panel.half * (1.0 + B.rule.nodes[j]);
      double tau = len * 0.5 * (1.0 + B.rule.nodes[j]);
      for (int it = 0; it < 30; ++it) {
        const auto jt = q.jet(tau);
        const double g = tau - n.dot(jt.x - q.c[0]) - u;
        const double step = g / (1.0 - n.dot(jt.v));
        tau = std::clamp(tau - step, 0.0, len);
        if (std::abs(step) <= 1e-16 * len) break;
      }
      h[j] = profile(q.jet(tau), n, rep);
      out.max_h = std::max(out.max_h, h[j].norm());
    }
    for (int l = 0; l < m; ++l) {
      Vec3 a = Vec3::Zero();
      for (int j = 0; j < m; ++j) a += B.proj[l][j] * h[j];
      out.panel.coef[l] = a;
    }
    out.panel.tail = out.panel.coef[m - 1].norm() + out.panel.coef[m - 2].norm();
    return out;
  };

  double scale = 0.0;
  for (const auto& sp : todo) scale = std::max(scale, build(sp).max_h);
  if (scale > 0.0) {
    const double tol = opt.rel_tol * scale;
    std::reverse(todo.begin(), todo.end());
    while (!todo.empty()) {
      const Span sp = todo.back();
      todo.pop_back();
      Trial t = build(sp);
      const double len = sp.hi - sp.lo;
      const double piece_len = pieces[sp.piece].hi - pieces[sp.piece].lo;
      if (t.panel.tail <= tol || len < 1e-9 * piece_len) {
        panels_.push_back(t.panel);
        if (panels_.size() > opt.max_panels) {
          throw AccuracyError("ray quadrature exceeded its panel budget", t.panel.tail, tol);
        }
        continue;
      }
      const double mid = 0.5 * (sp.lo + sp.hi);
      todo.push_back({sp.piece, mid, sp.hi});
      todo.push_back({sp.piece, sp.lo, mid});
    }
  }

  const auto b = tr.breakpoints();
  const auto cls = tr.classes();
  for (std::size_t k = 0; k < b.size(); ++k) {
    const long double s = ray_time(pieces[tr.piece_index(b[k], Side::Left)], n, b[k]);
    if (rep == Representation::Ibp1 && cls[k] == Smoothness::C0) {
      const Vec3 vl = tr.eval(b[k], 1, Side::Left), vr = tr.eval(b[k], 1, Side::Right);
      breaks_.push_back({s, vl / (1.0 - n.dot(vl)) - vr / (1.0 - n.dot(vr))});
    } else if (rep == Representation::Ibp2 && cls[k] == Smoothness::C1) {
      const Vec3 da = tr.eval(b[k], 2, Side::Left) - tr.eval(b[k], 2, Side::Right);
      const Vec3 v = tr.eval(b[k], 1, Side::Left);
      const double ia = 1.0 / (1.0 - n.dot(v));
      breaks_.push_back({s, (n.dot(da) * ia * ia * ia) * v + (ia * ia) * da});
    }
  }
}

AmplitudeValue RayQuadrature::operator()(double omega) const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ZeroMomentumError("ray amplitude needs omega > 0");
  constexpr int m = order;
  auto phase = [omega](long double s) {
    long double psi = static_cast<long double>(omega) * s;
    psi -= two_pi_l * std::nearbyint(psi / two_pi_l);
    return std::polar(1.0, static_cast<double>(psi));
  };
  CVec3 sum = CVec3::Zero();
  double err = 0.0;
  double j[m];
  for (const Panel& p : panels_) {
    const double kappa = omega * p.half;
    spherical_bessel_j(m, kappa, j);
    Vec3 re = Vec3::Zero(), im = Vec3::Zero();
    for (int l = 0; l < m; l += 4) {
      re += j[l] * p.coef[l] - j[l + 2] * p.coef[l + 2];
      im += j[l + 1] * p.coef[l + 1] - j[l + 3] * p.coef[l + 3];
    }
    const cplx e = phase(p.center) * (2.0 * p.half);
    sum += e * re.cast<cplx>() + (e * I) * im.cast<cplx>();
    err += 2.0 * p.half * p.tail * std::min(1.0, 1.0 / kappa);
  }
  for (const auto& bp : breaks_) sum += phase(bp.s) * bp.term.cast<cplx>();

  cplx factor = amplitude_prefactor;
  if (rep_ == Representation::Ibp1) factor *= cplx(0.0, -1.0 / omega);
  if (rep_ == Representation::Ibp2) factor /= omega * omega;
  AmplitudeValue out;
  out.value = factor * sum;
  out.error = std::abs(factor) * err;
  out.panels = static_cast<int>(panels_.size());
  return out;
}

}  // namespace qrad
