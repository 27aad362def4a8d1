#include "doctest.h"

#include <random>

#include "qrad/emission.hpp"
#include "qrad/fields.hpp"
#include "qrad/gauss.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/weyl_fock.hpp"

using namespace qrad;

namespace {

std::shared_ptr<const SphericalGrid> grid(double r_min = 1e-3, double r_max = 1e2) {
  GridSpec s;
  s.r_min = r_min;
  s.r_max = r_max;
  s.radial_per_decade = 32;
  s.n_theta = 12;
  s.n_phi = 24;
  return SphericalGrid::make(s);
}

// Numerical (2 pi)^{-3/2} int e^{-ipx} f(x) dx by tensor Gauss-Legendre on a box.
CVec3 numeric_transform(const TestFunction& f, const Vec3& p) {
  const int n = 64;
  const double L = 9.0 * f.width;
  const auto r = gauss_legendre(n);
  CVec3 s = CVec3::Zero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 x = f.center + L * Vec3(r.nodes[i], r.nodes[j], r.nodes[k]);
        const double w = r.weights[i] * r.weights[j] * r.weights[k] * L * L * L;
        s += (w * std::polar(1.0, -p.dot(x))) * f.value(x).cast<cplx>();
      }
    }
  }
  return s / std::pow(2.0 * pi, 1.5);
}

TestFunction gaussian(const Vec3& center, double width, const Vec3& pol) {
  TestFunction f;
  f.center = center;
  f.width = width;
  f.polarization = pol;
  return f;
}

}  // namespace

TEST_CASE("test function transforms match numerical quadrature") {
  TestFunction g = gaussian(Vec3(0.2, -0.1, 0.3), 0.8, Vec3(1.0, 0.5, 0.0));
  TestFunction h = g;
  h.family = TestFamily::GaussianPolynomial;
  h.powers = {1, 0, 2};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    for (const auto* f : {&g, &h}) {
      const CVec3 exact = f->transform(p);
      const CVec3 num = numeric_transform(*f, p);
      CHECK((exact - num).norm() <= 1e-6 * std::max(exact.norm(), 1e-3 * f->transform(Vec3::Zero()).norm() + 1e-300));
    }
  }
  TestFunction bad = g;
  bad.width = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(hermite_he(3, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("sharp-time kernel initial data") {
  const TestFunction f = gaussian(Vec3::Zero(), 1.0, Vec3(1.0, -0.5, 0.25));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 5; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK(u_f(f, x, 0.0).value.norm() == 0.0);
    const double h = 1e-4;
    const Vec3 d = (u_f(f, x, h).value - u_f(f, x, -h).value) / (2.0 * h);
    CHECK((d - f.value(x)).norm() <= 1e-6);
  }
}

TEST_CASE("sharp-time kernel solves the wave equation") {
  const TestFunction f = gaussian(Vec3(0.1, 0.0, -0.2), 1.0, Vec3(0.0, 1.0, 0.0));
  const Vec3 x(0.4, -0.3, 0.5);
  const double t = 0.7, h = 2e-2;
  auto u = [&](const Vec3& y, double s) { return u_f(f, y, s).value; };
  const Vec3 c = u(x, t);
  const Vec3 utt = (u(x, t + h) - 2.0 * c + u(x, t - h)) / (h * h);
  Vec3 lap = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = h * Vec3::Unit(k);
    lap += (u(x + e, t) - 2.0 * c + u(x - e, t)) / (h * h);
  }
  CHECK((utt - lap).norm() <= 1e-4 * f.value(f.center).norm());
  CHECK(u_f(f, x, t).imag_residual <= 1e-10 * std::max(1.0, c.norm()));
}

TEST_CASE("retarded and advanced kernels") {
  const TestFunction f = gaussian(Vec3::Zero(), 0.7, Vec3(1.0, 0.0, 0.0));
  const Vec3 x(0.3, 0.2, -0.1);
  CHECK(retarded_kernel(f, 1.0, x, 0.5, KernelSign::Retarded).value == Vec3::Zero());
  CHECK(retarded_kernel(f, 1.0, x, 1.5, KernelSign::Advanced).value == Vec3::Zero());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 6; ++i) {
    const Vec3 y(u(rng), u(rng), u(rng));
    const double t = u(rng), t0 = 0.3;
    const Vec3 diff = retarded_kernel(f, t0, y, t, KernelSign::Retarded).value -
                      retarded_kernel(f, t0, y, t, KernelSign::Advanced).value;
    CHECK((diff - u_f(f, y, t - t0).value).norm() <= 1e-8);
  }
}

TEST_CASE("vacuum and coherent Weyl functionals") {
  const auto g = grid();
  const auto zero = ModeFunction::zero(g);
  CHECK(vacuum_weyl(zero) == cplx(1.0, 0.0));

  const TestFunction f = gaussian(Vec3(0.3, 0.0, 0.0), 1.0, Vec3(0.0, 0.0, 1.0));
  const auto raw = ModeFunction::sample(g, [&](const Vec3& p) { return f.transform(p); });
  const double nrm = std::sqrt(norm_squared(raw));
  const auto h = ModeFunction::sample(g, [&](const Vec3& p) { return CVec3(f.transform(p) / nrm); });
  CHECK(vacuum_weyl(h).real() == doctest::Approx(std::exp(-0.25)).epsilon(1e-10));
  CHECK(std::abs(vacuum_weyl(h).imag()) == 0.0);

  // Single-mode oracle: the functional only sees |h|, so W(|h|) on the vacuum.
  const auto w = weyl_matrix(cplx(nrm, 0.0), 60);
  const cplx fock = w.m(0, 0);
  CHECK(std::abs(vacuum_weyl(raw) - fock) <= 1e-8);

  const TestFunction fj = gaussian(Vec3(0.0, -0.2, 0.1), 0.6, Vec3(1.0, 1.0, 0.0));
  const auto J = ModeFunction::sample(g, [&](const Vec3& p) { return fj.transform(p); });
  CHECK(coherent_weyl(raw, zero) == vacuum_weyl(raw));
  CHECK(coherent_weyl(zero, J) == cplx(1.0, 0.0));
  CHECK(std::abs(coherent_weyl(raw, J)) == doctest::Approx(vacuum_weyl(raw).real()).epsilon(1e-14));
}

TEST_CASE("coherent functional matches the single-mode coherent state") {
  // With h = c u and J = alpha u for a unit mode u, omega_J(W(h)) = <Omega_alpha, W(c) Omega_alpha>.
  const int n_max = 80;
  const cplx alpha(0.6, -0.4);
  const CVec psi = coherent_state(alpha, n_max).c;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 0.7);
  for (int i = 0; i < 5; ++i) {
    const cplx c1(n(rng), n(rng)), c2(n(rng), n(rng));
    const CMat w1 = weyl_matrix(c1, n_max).m, w2 = weyl_matrix(c2, n_max).m;
    const cplx lhs = psi.dot(w1 * w2 * psi);
    const cplx closed = std::exp(cplx(-0.25 * std::norm(c1 + c2), std::sqrt(2.0) * (std::conj(alpha) * (c1 + c2)).real()));
    const cplx rhs = std::exp(cplx(0.0, -0.5 * (std::conj(c1) * c2).imag())) * closed;
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("out-state functional") {
  const auto g = grid(1e-4, 1e2);
  const TestFunction f = gaussian(Vec3::Zero(), 1.0, Vec3(0.0, 1.0, 0.0));
  const auto h = ModeFunction::sample(g, [&](const Vec3& p) { return project_transverse(p, f.transform(p)); }, true);
  const auto zero = ModeFunction::zero(g, true);
  CHECK(out_state_weyl(h, zero) == vacuum_weyl(h));

  // F_T is not square integrable near p = 0, but its pairing with h converges.
  const Vec3 v_out(0.5, 0.0, 0.0);
  auto ft = [&](const Vec3& p) {
    const auto F = closed_form_ir(Vec3::Zero(), v_out, p);
    return CVec3((F.F1_T + F.F2).cast<cplx>() * cplx(0.0, 1.0) / std::pow(2.0 * pi, 1.5));
  };
  const auto JT = ModeFunction::sample(g, ft, true);
  const cplx coarse = out_state_weyl(h, JT);
  GridSpec fs = g->spec();
  fs.radial_per_decade *= 2;
  fs.n_theta *= 2;
  fs.n_phi *= 2;
  const auto gf = SphericalGrid::make(fs);
  const auto hf = ModeFunction::sample(gf, [&](const Vec3& p) { return project_transverse(p, f.transform(p)); }, true);
  const cplx fine = out_state_weyl(hf, ModeFunction::sample(gf, ft, true));
  CHECK(std::isfinite(std::abs(coarse)));
  CHECK(std::abs(coarse - fine) <= 1e-6);

  const TestFunction fj = gaussian(Vec3(0.2, 0.0, 0.0), 0.8, Vec3(0.0, 0.0, 1.0));
  const auto J = ModeFunction::sample(g, [&](const Vec3& p) { return project_transverse(p, fj.transform(p)); }, true);
  CHECK(std::abs(out_state_weyl(h, J) - coherent_weyl(h, J)) <= 1e-12);
}

TEST_CASE("coherent positivity") {
  CHECK(coherent_positivity_check({0.0}, {1.0}, Eigen::MatrixXcd::Zero(1, 1)) == doctest::Approx(1.0));

  // Single-mode oracle: B = sum c_n W(h_n) on Omega_alpha, L_n = conj(alpha) h_n.
  const int n_max = 80;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.8);
  for (cplx alpha : {cplx(0.0), cplx(0.5, 0.3)}) {
    const CVec psi = coherent_state(alpha, n_max).c;
    for (int trial = 0; trial < 4; ++trial) {
      const std::vector<cplx> h{{n(rng), n(rng)}, {n(rng), n(rng)}};
      const std::vector<cplx> c{{n(rng), n(rng)}, {n(rng), n(rng)}};
      Eigen::MatrixXcd grams(2, 2);
      std::vector<cplx> L;
      CVec b = CVec::Zero(n_max + 1);
      for (int i = 0; i < 2; ++i) {
        L.push_back(std::conj(alpha) * h[i]);
        for (int j = 0; j < 2; ++j) grams(i, j) = std::conj(h[i]) * h[j];
        b += c[i] * (weyl_matrix(h[i], n_max).m * psi);
      }
      const double direct = b.squaredNorm();
      CHECK(coherent_positivity_check(L, c, grams) == doctest::Approx(direct).epsilon(1e-7));
      CHECK(std::abs(coherent_positivity_value(L, c, grams).imag()) <= 1e-12 * direct + 1e-14);

      // B_0 trick: the pairings can be absorbed into the coefficients.
      std::vector<cplx> c0;
      for (int i = 0; i < 2; ++i) c0.push_back(c[i] * std::polar(1.0, std::sqrt(2.0) * L[i].real()));
      CHECK(coherent_positivity_check({0.0, 0.0}, c0, grams) ==
            doctest::Approx(coherent_positivity_check(L, c, grams)).epsilon(1e-12));
    }
  }
}

TEST_CASE("equal-time commutator of real test functions vanishes") {
  const auto g = grid(1e-3, 30.0);
  const TestFunction f1 = gaussian(Vec3(0.4, 0.0, -0.3), 0.9, Vec3(1.0, 0.2, 0.0));
  const TestFunction f2 = gaussian(Vec3(-0.2, 0.5, 0.1), 1.1, Vec3(0.0, 1.0, 0.3));
  const auto t1 = ModeFunction::sample(g, [&](const Vec3& p) { return project_transverse(p, f1.transform(p)); }, true);
  const auto t2 = ModeFunction::sample(g, [&](const Vec3& p) { return project_transverse(p, f2.transform(p)); }, true);
  CHECK(std::abs(pairing(t1, t2).imag()) <= 1e-10);
  CHECK_NOTHROW(t1.check_transverse());
  CHECK(t1.decays_faster_than(6));
}

TEST_CASE("endpoint integral decays") {
  const TestFunction f = gaussian(Vec3::Zero(), 0.1, Vec3(0.0, 1.0, 0.0));
  const Vec3 v(0.5, 0.0, 0.0);
  const double start = endpoint_decay_integral(f, v, 0.0).norm();
  const double late = endpoint_decay_integral(f, v, 200.0).norm();
  CHECK(start > 0.0);
  CHECK(late < 1e-3 * start);
}
