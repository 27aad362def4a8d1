#include "doctest.h"

#include <random>

#include "qrad/serialization.hpp"
#include "qrad/trajectory.hpp"

using namespace qrad;

namespace {

double sampled_peak_speed(const Trajectory& tr, double lo, double hi, int n = 20000) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i) m = std::max(m, tr.eval(lo + (hi - lo) * i / n, 1).norm());
  return m;
}

bool has_c0(const Trajectory& tr) {
  for (auto c : tr.classes()) {
    if (c == Smoothness::C0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("polynomial helpers") {
  const ScalarPoly h = poly::smootherstep();
  CHECK(poly::evaluate(h, 0.0) == doctest::Approx(0.0));
  CHECK(poly::evaluate(h, 1.0) == doctest::Approx(1.0));
  CHECK(poly::evaluate(h, 0.5) == doctest::Approx(0.5));

  VecPoly q = VecPoly::from_scalar(h, Vec3(1.0, 2.0, 0.0));
  for (double tau : {0.0, 1.0}) {
    CHECK(q.derivative(tau, 1).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q.derivative(tau, 2).norm() == doctest::Approx(0.0).epsilon(1e-14));
  }

  const VecPoly s = q.shifted(0.3);
  for (double u : {-0.2, 0.0, 0.4}) {
    CHECK((s.jet(u).x - q.jet(0.3 + u).x).norm() < 1e-14);
    CHECK((s.jet(u).a - q.jet(0.3 + u).a).norm() < 1e-12);
  }

  ScalarPoly a{};
  a[6] = 1.0;
  const ScalarPoly ia = poly::integrate(a);
  CHECK(ia[7] == doctest::Approx(1.0 / 7.0));
  a[7] = 1.0;
  CHECK_THROWS_AS(poly::integrate(a), ValidationError);
}

TEST_CASE("eval is exact on polynomial segments") {
  // x(t) = (0.01 t^3, 0.02 t^2, -1e-4 t^7) on [0, 2].
  TrajectoryData d;
  d.breakpoints = {0.0, 2.0};
  VecPoly seg;
  seg.c[3] = Vec3(0.01, 0.0, 0.0);
  seg.c[2] = Vec3(0.0, 0.02, 0.0);
  seg.c[7] = Vec3(0.0, 0.0, -1e-4);
  d.segments = {seg};
  d.v_in = Vec3::Zero();
  d.v_out = seg.derivative(2.0, 1);
  d.classes = {Smoothness::C1, Smoothness::C1};
  d.v0 = 0.999;
  const Trajectory tr(d);
  for (double t : {0.25, 0.9, 1.7}) {
    const Vec3 x(0.01 * t * t * t, 0.02 * t * t, -1e-4 * std::pow(t, 7));
    const Vec3 v(0.03 * t * t, 0.04 * t, -7e-4 * std::pow(t, 6));
    const Vec3 a(0.06 * t, 0.04, -42e-4 * std::pow(t, 5));
    const Vec3 j(0.06, 0.0, -210e-4 * std::pow(t, 4));
    CHECK((tr.eval(t, 0) - x).norm() <= 1e-14 * x.norm());
    CHECK((tr.eval(t, 1) - v).norm() <= 1e-14 * v.norm());
    CHECK((tr.eval(t, 2) - a).norm() <= 1e-14 * a.norm());
    CHECK((tr.eval(t, 3) - j).norm() <= 1e-14 * j.norm());
  }
  CHECK(tr.eval(3.0, 1) == d.v_out);
  CHECK_THROWS_AS(tr.eval(1.0, 4), UnsupportedOrderError);
}

TEST_CASE("constant trajectory") {
  const Trajectory tr = Trajectory::constant_velocity(Vec3(1.0, -2.0, 0.5), Vec3::Zero());
  CHECK(tr.eval(7.0, 1).norm() == 0.0);
  const auto ph = tr.phase(Vec3(0.0, 0.0, 1.0), 2.0);
  const auto ph0 = Trajectory::constant_velocity(Vec3::Zero(), Vec3::Zero()).phase(Vec3(0, 0, 1), 2.0);
  CHECK(ph0.psi == doctest::Approx(2.0));
  CHECK(ph0.psi_t == doctest::Approx(1.0));
  CHECK(ph0.psi_tt == 0.0);
  CHECK(ph.psi == doctest::Approx(2.0 - 0.5));
  CHECK_THROWS_AS(tr.phase(Vec3::Zero(), 1.0), ZeroMomentumError);
}

TEST_CASE("smooth stop/start builder") {
  const Trajectory tr = build_smooth_stop_start(10.0, Vec3(1.0, 0.0, 0.0), 0.9);
  CHECK(tr.eval(0.0, 1, Side::Right).norm() < 1e-14);
  CHECK(tr.eval(10.0, 1, Side::Left).norm() < 1e-14);
  CHECK((tr.eval(10.0, 0) - tr.eval(0.0, 0) - Vec3(1.0, 0.0, 0.0)).norm() < 1e-14);
  CHECK(tr.v_in().norm() == 0.0);
  CHECK(tr.v_out().norm() == 0.0);
  CHECK(sampled_peak_speed(tr, 0.0, 10.0) < 0.4);
  for (std::size_t b = 0; b < tr.breakpoints().size(); ++b) {
    CHECK(tr.measured_class(b) >= tr.classes()[b]);
    const double t = tr.breakpoints()[b];
    CHECK((tr.eval(t, 2, Side::Left) - tr.eval(t, 2, Side::Right)).norm() < 1e-10);
  }
  CHECK(tr.has_compact_velocity());
  CHECK_FALSE(tr.has_velocity_jump());
  CHECK_THROWS_AS(build_smooth_stop_start(1.0, Vec3(2.0, 0.0, 0.0), 0.99), SuperluminalError);
}

TEST_CASE("kick builder") {
  const Trajectory tr = build_kick(Vec3(0.5, 0.0, 0.0), Vec3::Zero(), 2.0);
  CHECK((tr.eval(0.0, 1, Side::Left) - Vec3(0.5, 0.0, 0.0)).norm() == 0.0);
  CHECK(tr.eval(0.0, 1, Side::Right).norm() == 0.0);
  CHECK(has_c0(tr));
  CHECK(tr.has_velocity_jump());
  for (double t : {-3.5, -3.0001, 3.0001, 10.0}) CHECK(tr.eval(t, 1).norm() == 0.0);
  for (std::size_t b = 0; b < tr.breakpoints().size(); ++b) {
    if (tr.breakpoints()[b] != 0.0) CHECK(tr.classes()[b] == Smoothness::C3);
  }

  const Vec3 p(0.3, -1.2, 0.7);
  const double jump = tr.phase(p, 0.0, Side::Left).psi_t - tr.phase(p, 0.0, Side::Right).psi_t;
  CHECK(jump == doctest::Approx(p.dot(tr.eval(0.0, 1, Side::Right) - tr.eval(0.0, 1, Side::Left))));

  const Trajectory same = build_kick(Vec3(0.3, 0.1, 0.0), Vec3(0.3, 0.1, 0.0), 1.0);
  CHECK_FALSE(has_c0(same));
  CHECK_THROWS_AS(build_kick(Vec3(1.0, 0.0, 0.0), Vec3::Zero(), 1.0), SuperluminalError);
}

TEST_CASE("boost builder") {
  const Trajectory tr = build_boost(Vec3::Zero(), Vec3(0.5, 0.0, 0.0), 4.0);
  CHECK(tr.eval(-1.0, 1).norm() == 0.0);
  CHECK((tr.eval(5.0, 1) - Vec3(0.5, 0.0, 0.0)).norm() == 0.0);
  CHECK(sampled_peak_speed(tr, 0.0, 4.0) <= 0.55);
  for (double t : {-2.0, 4.5, 50.0}) CHECK(tr.eval(t, 2).norm() == 0.0);

  const Vec3 v(0.2, 0.3, -0.1);
  const Trajectory flat = build_boost(v, v, 2.0);
  for (int i = 0; i <= 40; ++i) CHECK(flat.eval(-1.0 + 0.1 * i, 2).norm() < 1e-15);
  CHECK_THROWS_AS(build_boost(Vec3(0.0, 0.0, 1.0), Vec3::Zero(), 1.0), SuperluminalError);
}

TEST_CASE("kink builder has an acceleration jump") {
  const Trajectory tr = build_kink(Vec3(0.3, 0.0, 0.0), 4.0);
  CHECK(tr.classes()[0] == Smoothness::C1);
  CHECK(tr.measured_class(0) == Smoothness::C1);
  CHECK((tr.eval(0.0, 2, Side::Left) - tr.eval(0.0, 2, Side::Right)).norm() > 1e-3);
  CHECK(tr.eval(4.0, 1, Side::Left).norm() < 1e-14);
  CHECK(tr.has_compact_velocity());
}

TEST_CASE("phase derivative stays above the stationary-phase bound") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Trajectory trs[] = {build_smooth_stop_start(10.0, Vec3(1.0, 0.0, 0.0), 0.9),
                            build_kick(Vec3(0.5, 0.0, 0.0), Vec3::Zero(), 2.0),
                            build_boost(Vec3::Zero(), Vec3(0.5, 0.0, 0.0), 2.0),
                            build_kink(Vec3(0.3, 0.0, 0.0), 4.0)};
  for (const auto& tr : trs) {
    for (int i = 0; i < 500; ++i) {
      const Vec3 p = Vec3(u(rng), u(rng), u(rng)) * 5.0;
      const double t = 12.0 * u(rng);
      const auto ph = tr.phase(p, t);
      CHECK(ph.psi_t >= p.norm() * (1.0 - tr.v0()));
      CHECK(ph.psi_t <= p.norm() * (1.0 + tr.v0()));
    }
  }
}

TEST_CASE("invariant checker rejects bad data") {
  TrajectoryData d;
  d.breakpoints = {0.0, 1.0};
  VecPoly seg;
  seg.c[1] = Vec3(0.5, 0.0, 0.0);
  d.segments = {seg};
  d.v_in = Vec3(0.5, 0.0, 0.0);
  d.v_out = Vec3(0.5, 0.0, 0.0);
  d.classes = {Smoothness::C3, Smoothness::C3};
  d.v0 = 0.6;
  CHECK_NOTHROW(Trajectory{d});

  auto bad_speed = d;
  bad_speed.v0 = 0.4;
  CHECK_THROWS_AS(Trajectory{bad_speed}, ValidationError);

  auto bad_class = d;
  bad_class.v_out = Vec3(0.2, 0.0, 0.0);
  CHECK_THROWS_AS(Trajectory{bad_class}, ValidationError);

  auto unordered = d;
  unordered.breakpoints = {1.0, 0.0};
  CHECK_THROWS_AS(Trajectory{unordered}, ValidationError);

  auto fast = d;
  fast.v_in = Vec3(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(Trajectory{fast}, SuperluminalError);
}

TEST_CASE("coulomb potential") {
  const Trajectory st = Trajectory::constant_velocity(Vec3::Zero(), Vec3::Zero());
  CHECK(st.coulomb_potential(Vec3(1.0, 0.0, 0.0), 3.0) == doctest::Approx(0.0795775).epsilon(1e-6));
  const Vec3 x(0.3, -0.4, 1.1);
  CHECK(st.coulomb_potential(2.5 * x, 0.0) == doctest::Approx(st.coulomb_potential(x, 0.0) / 2.5));
  CHECK_THROWS_AS(st.coulomb_potential(Vec3::Zero(), 0.0), SingularityError);

  const Trajectory tr = build_kick(Vec3(0.5, 0.0, 0.0), Vec3::Zero(), 2.0);
  for (double t : {-2.0, -0.5, 0.7}) {
    const double expect = 1.0 / (4.0 * pi * (x - tr.eval(t, 0)).norm());
    CHECK(tr.coulomb_potential(x, t) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("transforms of trajectories") {
  const Trajectory tr = build_kick(Vec3(0.5, 0.1, 0.0), Vec3(0.0, 0.2, 0.0), 1.5);
  const Vec3 a(1.0, -2.0, 3.0);
  const Trajectory moved = tr.translated(a);
  const Trajectory later = tr.time_shifted(2.0);
  for (double t : {-2.0, 0.5, 4.0}) {
    CHECK((moved.eval(t, 0) - tr.eval(t, 0) - a).norm() < 1e-13);
    CHECK((later.eval(t + 2.0, 0) - tr.eval(t, 0)).norm() < 1e-13);
  }
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1.0, 1.0, 0.0).normalized()).toRotationMatrix();
  const Trajectory turned = tr.rotated(r);
  CHECK((turned.eval(-0.5, 1) - r * tr.eval(-0.5, 1)).norm() < 1e-14);
}

TEST_CASE("serialization roundtrip") {
  const Trajectory tr = build_kink(Vec3(0.3, 0.1, 0.0), 4.0);
  const auto j = trajectory_to_json(tr);
  for (const char* key : {"breakpoints", "segments", "v_in", "v_out", "classes", "v0"}) CHECK(j.contains(key));
  const Trajectory back = trajectory_from_json(j);
  CHECK(trajectory_hash(back) == trajectory_hash(tr));
  for (double t : {-1.0, 0.0, 1.3, 3.9, 6.0}) CHECK((back.eval(t, 0) - tr.eval(t, 0)).norm() == 0.0);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}
