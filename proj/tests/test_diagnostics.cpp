#include "doctest.h"

#include <functional>
#include <sstream>

#include "qrad/diagnostics.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/weyl_fock.hpp"

using namespace qrad;

namespace {

std::shared_ptr<const SphericalGrid> fit_grid() {
  GridSpec s;
  s.r_min = 1e-4;
  s.r_max = 1e4;
  s.radial_per_decade = 32;
  s.n_theta = 4;
  s.n_phi = 8;
  return SphericalGrid::make(s);
}

// Transverse synthetic amplitude e_phi-like polarization times a radial profile.
EmissionAmplitude synthetic(const std::shared_ptr<const SphericalGrid>& g,
                            const std::function<double(double)>& radial) {
  auto h = [&radial](const Vec3& p) {
    const Vec3 e = p.cross(Vec3(0.3, -0.2, 1.0)).normalized();
    return CVec3(e.cast<cplx>() * radial(p.norm()));
  };
  const ModeFunction m = ModeFunction::sample(g, h, true);
  return EmissionAmplitude{g, m, m};
}

}  // namespace

TEST_CASE("log fit recovers synthetic coefficients") {
  std::vector<std::pair<double, double>> xy;
  for (int i = 0; i < 12; ++i) {
    const double x = std::pow(10.0, 0.25 * i);
    xy.emplace_back(x, 2.0 + 3.0 * std::log(x));
  }
  const LogFit f = fit_log(xy);
  CHECK(f.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.b == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.residual_rms <= 1e-12);
  CHECK_THROWS_AS(fit_log({{1.0, 1.0}}), ValidationError);

  std::vector<double> x, y;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(5.0 * std::pow(i, -2.5));
  }
  CHECK(loglog_slope(x, y, 1.0, 20.0) == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("classification of synthetic amplitudes") {
  const auto g = fit_grid();
  const double norm = 1.0 / std::sqrt(4.0 * pi);

  SUBCASE("Fock") {
    const auto amp = synthetic(g, [&](double r) { return norm * r * std::exp(-r); });
    const auto rep = classify(amp);
    CHECK(rep.classification == Classification::Fock);
    REQUIRE(rep.photon_number.has_value());
    CHECK(*rep.photon_number == doctest::Approx(norm_squared(amp.J_T)).epsilon(1e-12));
    // integral of r^2 e^{-2r} (r/2) dr * 4 pi * norm^2 = 3/16 over the grid range.
    CHECK(*rep.photon_number == doctest::Approx(3.0 / 16.0).epsilon(1e-6));
  }
  SUBCASE("ultraviolet") {
    const auto amp = synthetic(g, [&](double r) { return norm * r / (1.0 + r * r); });
    const auto rep = classify(amp);
    CHECK(rep.classification == Classification::NonFockUV);
    CHECK_FALSE(rep.photon_number.has_value());
    // |J|^2 -> 1/(4 pi r^2): I_uv grows like (1/2) log(Lambda).
    CHECK(rep.b_uv() == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(rep.uv_margin() > 2.0);
    CHECK(rep.uv.amplitude_exponent == doctest::Approx(-1.0).epsilon(1e-3));
  }
  SUBCASE("infrared") {
    const auto amp = synthetic(g, [&](double r) { return norm * std::exp(-r) / r; });
    const auto rep = classify(amp);
    CHECK(rep.classification == Classification::NonFockIR);
    CHECK(rep.b_ir() == doctest::Approx(0.5).epsilon(1e-2));
  }
  SUBCASE("both") {
    const auto amp = synthetic(g, [&](double r) { return norm / r; });
    CHECK(classify(amp).classification == Classification::NonFockBoth);
  }
  SUBCASE("power divergence is inconclusive") {
    const auto amp = synthetic(g, [&](double r) { return norm / std::sqrt(r); });
    CHECK_THROWS_AS(classify(amp), InconclusiveError);
    try {
      classify(amp);
    } catch (const InconclusiveError& e) {
      CHECK(e.report().inconclusive);
    }
  }
  SUBCASE("zero") {
    const ModeFunction z = ModeFunction::zero(g, true);
    const EmissionAmplitude amp{g, z, z};
    const auto rep = classify(amp);
    CHECK(rep.b_uv() == 0.0);
    CHECK(rep.b_ir() == 0.0);
    CHECK(rep.classification == Classification::Fock);
    CHECK(*rep.photon_number == 0.0);
    const Spectrum s = spectrum(amp);
    for (double v : s.dn_domega) CHECK(v == 0.0);
  }
}

TEST_CASE("fit windows need enough shells and grid coverage") {
  const auto g = fit_grid();
  const auto amp = synthetic(g, [](double r) { return std::exp(-r); });
  CHECK_THROWS_AS(uv_fit(amp, {10.0, 20.0}), ValidationError);
  CHECK_THROWS_AS(uv_fit(amp, {10.0, 1e5}), RangeError);
  CHECK_THROWS_AS(ir_fit(amp, {1e-6, 1e-1}), RangeError);
}

TEST_CASE("shell sequences are monotone and the report re-derives") {
  const auto g = fit_grid();
  const auto amp = synthetic(g, [](double r) { return r / (1.0 + r * r); });
  const auto rep = classify(amp);
  for (std::size_t i = 1; i < rep.uv.shells.size(); ++i) CHECK(rep.uv.shells[i].second >= rep.uv.shells[i - 1].second);
  for (std::size_t i = 1; i < rep.ir.shells.size(); ++i) CHECK(rep.ir.shells[i].second <= rep.ir.shells[i - 1].second);
  const auto j = rep.to_json();
  CHECK(j.at("classification") == "NonFockUV");
  CHECK(j.at("uv_log_coefficient").get<double>() >
        j.at("thresholds").at("theta_rel").get<double>() * j.at("uv_midpoint_value").get<double>());
  CHECK(j.at("uv_divergent") == true);
}

TEST_CASE("spectrum integrates to the photon number") {
  const auto g = fit_grid();
  const auto amp = synthetic(g, [](double r) { return r * std::exp(-r) * (1.0 + 0.3 * std::sin(r)); });
  const Spectrum s = spectrum(amp, 1.0);
  for (double v : s.dn_domega) CHECK(v >= 0.0);
  CHECK(s.total() == doctest::Approx(pairing(amp.J_T, amp.J_T).real()).epsilon(1e-6));
  CHECK(s.angular.size() == g->n_angular());
  std::ostringstream os;
  s.write_csv(os);
  CHECK(os.str().rfind("omega,", 0) == 0);
}

TEST_CASE("boost spectrum falls like 1/omega at low frequency") {
  GridSpec s;
  s.r_min = 1e-4;
  s.r_max = 1.0;
  s.radial_per_decade = 16;
  s.n_theta = 8;
  s.n_phi = 8;
  s.axis = Vec3::UnitX();
  const auto g = SphericalGrid::make(s);
  const auto amp = compute_amplitude(build_boost(Vec3::Zero(), Vec3(0.5, 0.0, 0.0), 2.0), g);
  const Spectrum sp = spectrum(amp);
  CHECK(loglog_slope(sp.omega, sp.dn_domega, 1e-3, 1e-2) == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("photon number is withheld for non-Fock amplitudes") {
  const auto g = fit_grid();
  const auto amp = synthetic(g, [](double r) { return r / (1.0 + r * r); });
  const auto rep = classify(amp);
  CHECK_THROWS_AS(mode_reduce(amp, rep), NonFockError);
  const ModeFunction z = ModeFunction::zero(g, true);
  const EmissionAmplitude zero{g, z, z};
  CHECK(mode_reduce(zero, classify(zero)) == 0.0);
}
