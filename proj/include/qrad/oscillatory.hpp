#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "qrad/gauss.hpp"
#include "qrad/types.hpp"

namespace qrad {

struct Interval {
  double lo;
  double hi;
};

struct OscOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int panels_per_period = 1;
  int max_rounds = 60;  // 0: single pass, no refinement
  std::size_t max_panels = 4'000'000;
  bool throw_on_failure = true;
};

struct OscillatoryIntegralResult {
  CVec3 value = CVec3::Zero();
  double error_estimate = 0.0;
  int subdivisions = 0;  // panels in the final partition
  double l1 = 0.0;       // integral of |integrand|
  bool converged = true;
};

// Neumaier-compensated accumulator for complex 3-vectors.
class CompensatedSum {
public:
  void add(const CVec3& v) {
    for (int k = 0; k < 3; ++k) {
      add1(s_[2 * k], c_[2 * k], v[k].real());
      add1(s_[2 * k + 1], c_[2 * k + 1], v[k].imag());
    }
  }
  CVec3 value() const {
    CVec3 out;
    for (int k = 0; k < 3; ++k) out[k] = {s_[2 * k] + c_[2 * k], s_[2 * k + 1] + c_[2 * k + 1]};
    return out;
  }

private:
  static void add1(double& s, double& c, double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double s_[6] = {};
  double c_[6] = {};
};

namespace detail {

struct Panel {
  double a, b;
  CVec3 value;
  double err;
  double resabs;
};

// Gauss-Kronrod 7/15 on [a, b]. The integrand is called as f(center, offset).
template <class F>
Panel gk15_panel(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  CVec3 fv[15];
  fv[7] = f(c, 0.0);
  for (int j = 0; j < 7; ++j) {
    const double x = h * gk15::xgk[static_cast<std::size_t>(j)];
    fv[j] = f(c, -x);
    fv[14 - j] = f(c, x);
  }
  auto wk = [](int i) { return gk15::wgk[static_cast<std::size_t>(i < 8 ? i : 14 - i)]; };
  CVec3 k = CVec3::Zero();
  CVec3 g = gk15::wg[3] * fv[7];
  double resabs = 0.0;
  for (int i = 0; i < 15; ++i) {
    k += wk(i) * fv[i];
    resabs += wk(i) * fv[i].norm();
  }
  for (int j = 1; j < 7; j += 2) {
    g += gk15::wg[static_cast<std::size_t>(j / 2)] * (fv[j] + fv[14 - j]);
  }
  const CVec3 mean = 0.5 * k;
  double resasc = 0.0;
  for (int i = 0; i < 15; ++i) resasc += wk(i) * (fv[i] - mean).norm();
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = ((k - g) * h).norm();
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, k * h, err, resabs};
}

}  // namespace detail

// Adaptive panel quadrature of an integrand f(t) e^{i psi(t)} over a union of
// intervals whose endpoints are forced panel boundaries. rate bounds |psi_t|; the
// initial partition places panels_per_period panels in each period 2 pi / rate.
// Converged when the summed panel error is below
// max(abs_tol, rel_tol |value|) + 100 eps * integral |f|.
template <class F>
OscillatoryIntegralResult integrate_oscillatory(F&& f, std::span<const Interval> support,
                                                double rate, const OscOptions& opt = {}) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<detail::Panel> panels;
  const double ppd = std::max(opt.panels_per_period, 1);
  for (const auto& iv : support) {
    const double len = iv.hi - iv.lo;
    if (!(len > 0.0)) continue;
    const double periods = rate > 0.0 ? len * rate / (2.0 * pi) : 0.0;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(periods * ppd)));
    if (n > opt.max_panels) {
      throw AccuracyError(fmt::format("oscillatory integral needs {} panels", n),
                          std::numeric_limits<double>::infinity(), opt.rel_tol);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double a = iv.lo + len * static_cast<double>(i) / static_cast<double>(n);
      const double b = i + 1 == n ? iv.hi : iv.lo + len * static_cast<double>(i + 1) / static_cast<double>(n);
      panels.push_back(detail::gk15_panel(f, a, b));
    }
  }

  OscillatoryIntegralResult out;
  for (int round = 0;; ++round) {
    CompensatedSum sum;
    double err = 0.0, l1 = 0.0;
    for (const auto& p : panels) {
      sum.add(p.value);
      err += p.err;
      l1 += p.resabs;
    }
    out.value = sum.value();
    out.error_estimate = err;
    out.l1 = l1;
    out.subdivisions = static_cast<int>(panels.size());
    const double tol = std::max(opt.abs_tol, opt.rel_tol * out.value.norm()) + 100.0 * eps * l1;
    if (err <= tol) {
      out.converged = true;
      return out;
    }
    const bool exhausted = round >= opt.max_rounds || panels.size() >= opt.max_panels;
    if (exhausted) break;

    // Bisect the worst panels until their summed error covers the excess.
    std::vector<std::size_t> order(panels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return panels[i].err > panels[j].err; });
    const double excess = err - 0.5 * tol;
    double covered = 0.0;
    std::vector<char> split(panels.size(), 0);
    bool any = false;
    for (std::size_t i : order) {
      if (covered >= excess) break;
      const auto& p = panels[i];
      const double mid = 0.5 * (p.a + p.b);
      if (!(mid > p.a && mid < p.b)) continue;
      split[i] = 1;
      covered += p.err;
      any = true;
    }
    if (!any) break;
    std::vector<detail::Panel> next;
    next.reserve(panels.size() * 2);
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (!split[i]) {
        next.push_back(panels[i]);
        continue;
      }
      const double mid = 0.5 * (panels[i].a + panels[i].b);
      next.push_back(detail::gk15_panel(f, panels[i].a, mid));
      next.push_back(detail::gk15_panel(f, mid, panels[i].b));
    }
    panels = std::move(next);
  }
  out.converged = false;
  if (opt.throw_on_failure) {
    throw AccuracyError(
        fmt::format("oscillatory integral not converged: error estimate {:.3e} for |value| {:.3e}",
                    out.error_estimate, out.value.norm()),
        out.error_estimate, opt.rel_tol);
  }
  return out;
}

// Convenience overload for integrands written as f(t).
template <class F>
OscillatoryIntegralResult integrate_plain(F&& f, std::span<const Interval> support, double rate,
                                          const OscOptions& opt = {}) {
  auto g = [&f](double c, double s) -> CVec3 { return f(c + s); };
  return integrate_oscillatory(g, support, rate, opt);
}

}  // namespace qrad
