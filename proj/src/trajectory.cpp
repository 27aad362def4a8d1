#include "qrad/trajectory.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace qrad {

std::string to_string(Smoothness s) {
  return fmt::format("C{}", static_cast<int>(s));
}

Smoothness smoothness_from_string(const std::string& s) {
  if (s == "C0") return Smoothness::C0;
  if (s == "C1") return Smoothness::C1;
  if (s == "C2") return Smoothness::C2;
  if (s == "C3") return Smoothness::C3;
  throw ValidationError(fmt::format("unknown smoothness class '{}'", s));
}

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

// Scale of the k-th derivative over all breakpoints, used as the floor of the
// relative comparisons so that exact zeros on one side do not demand exact zeros
// on the other.
// Largest |x^(order)| over breakpoints and interior samples of each segment.
double derivative_scale(const Trajectory& tr, int order) {
  double s = 0.0;
  const auto bp = tr.breakpoints();
  for (std::size_t k = 0; k < bp.size(); ++k) {
    s = std::max(s, tr.eval(bp[k], order, Side::Left).norm());
    s = std::max(s, tr.eval(bp[k], order, Side::Right).norm());
    if (k + 1 == bp.size()) break;
    for (int i = 1; i < 8; ++i) {
      s = std::max(s, tr.eval(bp[k] + (bp[k + 1] - bp[k]) * i / 8.0, order).norm());
    }
  }
  return s;
}

}  // namespace

Trajectory::Trajectory(TrajectoryData data, const TrajectoryTolerances& tol)
    : data_(std::move(data)), tol_(tol) {
  const auto& d = data_;
  if (d.breakpoints.empty()) throw ValidationError("trajectory needs at least one breakpoint");
  if (d.segments.size() + 1 != d.breakpoints.size()) {
    throw ValidationError(fmt::format("{} breakpoints need {} segments, got {}",
                                      d.breakpoints.size(), d.breakpoints.size() - 1,
                                      d.segments.size()));
  }
  if (d.classes.size() != d.breakpoints.size()) {
    throw ValidationError("one smoothness class per breakpoint required");
  }
  for (std::size_t k = 0; k < d.breakpoints.size(); ++k) {
    if (!std::isfinite(d.breakpoints[k])) throw ValidationError("non-finite breakpoint");
    if (k > 0 && !(d.breakpoints[k] > d.breakpoints[k - 1])) {
      throw ValidationError("breakpoints must be strictly increasing");
    }
  }
  for (const auto& seg : d.segments) {
    for (const auto& c : seg.c) {
      if (!finite(c)) throw ValidationError("non-finite segment coefficient");
    }
  }
  if (!finite(d.v_in) || !finite(d.v_out) || !finite(d.anchor) || !std::isfinite(d.v0)) {
    throw ValidationError("non-finite trajectory data");
  }
  if (d.v_in.norm() >= 1.0 || d.v_out.norm() >= 1.0) {
    throw SuperluminalError("asymptotic velocity must satisfy |v| < 1");
  }
  if (d.v0 >= 1.0) throw SuperluminalError(fmt::format("declared v0 = {} is not < 1", d.v0));
  if (d.v0 < 0.0) throw ValidationError("declared v0 must be nonnegative");
  build_pieces();
  validate();
}

Trajectory Trajectory::constant_velocity(const Vec3& anchor, const Vec3& v, double t0) {
  TrajectoryData d;
  d.breakpoints = {t0};
  d.classes = {Smoothness::C3};
  d.v_in = v;
  d.v_out = v;
  d.anchor = anchor;
  d.v0 = v.norm();
  return Trajectory(std::move(d));
}

void Trajectory::build_pieces() {
  const auto& b = data_.breakpoints;
  constexpr double inf = std::numeric_limits<double>::infinity();
  pieces_.clear();
  pieces_.reserve(b.size() + 1);

  VecPoly left;
  left.c[0] = data_.anchor;
  left.c[1] = data_.v_in;
  pieces_.push_back({-inf, b.front(), b.front(), left});

  for (std::size_t k = 0; k < data_.segments.size(); ++k) {
    pieces_.push_back({b[k], b[k + 1], b[k], data_.segments[k]});
  }

  VecPoly right;
  const auto& last = pieces_.back();
  right.c[0] = data_.segments.empty() ? data_.anchor
                                      : last.poly.jet(last.hi - last.origin).x;
  right.c[1] = data_.v_out;
  pieces_.push_back({b.back(), inf, b.back(), right});
}

std::size_t Trajectory::piece_index(double t, Side side) const {
  const auto& b = data_.breakpoints;
  auto it = side == Side::Right ? std::upper_bound(b.begin(), b.end(), t)
                                : std::lower_bound(b.begin(), b.end(), t);
  return static_cast<std::size_t>(it - b.begin());
}

VecPoly::Jet Trajectory::jet(double t, Side side) const {
  const Piece& pc = pieces_[piece_index(t, side)];
  return pc.poly.jet(t - pc.origin);
}

Vec3 Trajectory::eval(double t, int order, Side side) const {
  if (order < 0) throw ValidationError("derivative order must be nonnegative");
  if (order > 3) throw UnsupportedOrderError(fmt::format("derivative order {} > 3", order));
  const auto j = jet(t, side);
  switch (order) {
    case 0: return j.x;
    case 1: return j.v;
    case 2: return j.a;
    default: return j.j;
  }
}

PhaseDerivatives Trajectory::phase(const Vec3& p, double t, Side side) const {
  const double omega = p.norm();
  if (omega == 0.0) throw ZeroMomentumError("phase undefined at p = 0");
  const auto j = jet(t, side);
  return {omega * t - p.dot(j.x), omega - p.dot(j.v), -p.dot(j.a), -p.dot(j.j), side};
}

double Trajectory::coulomb_potential(const Vec3& x, double t) const {
  const double r = (x - eval(t, 0)).norm();
  if (r == 0.0) throw SingularityError("potential evaluated on the worldline");
  return 1.0 / (4.0 * pi * r);
}

bool Trajectory::has_compact_velocity() const noexcept {
  return data_.v_in.squaredNorm() == 0.0 && data_.v_out.squaredNorm() == 0.0;
}

bool Trajectory::has_velocity_jump() const noexcept {
  return std::ranges::any_of(data_.classes, [](Smoothness s) { return s == Smoothness::C0; });
}

bool Trajectory::velocity_vanishes_on(std::size_t piece) const {
  return pieces_.at(piece).poly.is_zero_beyond(0);
}

bool Trajectory::acceleration_vanishes_on(std::size_t piece) const {
  return pieces_.at(piece).poly.is_zero_beyond(1);
}

std::optional<Vec3> Trajectory::motion_axis() const {
  std::vector<Vec3> dirs{data_.v_in, data_.v_out};
  for (const auto& seg : data_.segments) {
    for (std::size_t k = 1; k <= kMaxDegree; ++k) dirs.push_back(seg.c[k]);
    dirs.push_back(seg.c[0] - data_.anchor);
  }
  const auto big = std::ranges::max_element(
      dirs, [](const Vec3& a, const Vec3& b) { return a.norm() < b.norm(); });
  if (big->norm() == 0.0) return std::nullopt;
  const Vec3 e = big->normalized();
  for (const auto& w : dirs) {
    if ((w - w.dot(e) * e).norm() > 1e-13 * w.norm()) return std::nullopt;
  }
  return e;
}

Smoothness Trajectory::measured_class(std::size_t bi) const {
  const double b = data_.breakpoints.at(bi);
  int cls = 0;
  for (int order = 1; order <= 3; ++order) {
    const Vec3 l = eval(b, order, Side::Left);
    const Vec3 r = eval(b, order, Side::Right);
    const double scale = std::max({l.norm(), r.norm(), derivative_scale(*this, order)});
    if ((l - r).norm() > tol_.derivative_rel * scale) break;
    cls = order;
  }
  return static_cast<Smoothness>(cls);
}

double Trajectory::sampled_speed_sup() const {
  double sup = std::max(data_.v_in.norm(), data_.v_out.norm());
  const int n = std::max(tol_.samples_per_segment, 2);
  for (std::size_t k = 0; k < data_.segments.size(); ++k) {
    const double len = data_.breakpoints[k + 1] - data_.breakpoints[k];
    for (int i = 0; i < n; ++i) {
      const double tau = len * static_cast<double>(i) / static_cast<double>(n - 1);
      sup = std::max(sup, data_.segments[k].jet(tau).v.norm());
    }
  }
  return sup;
}

void Trajectory::validate() const {
  const double xscale = derivative_scale(*this, 0);
  for (std::size_t k = 0; k < data_.breakpoints.size(); ++k) {
    const double b = data_.breakpoints[k];
    const Vec3 l = eval(b, 0, Side::Left);
    const Vec3 r = eval(b, 0, Side::Right);
    if ((l - r).norm() > tol_.continuity_rel * std::max({l.norm(), r.norm(), xscale})) {
      throw ValidationError(fmt::format("position discontinuous at breakpoint t = {}", b));
    }
    const Smoothness m = measured_class(k);
    if (m != data_.classes[k]) {
      throw ValidationError(fmt::format("breakpoint t = {} declared {} but measured {}", b,
                                        to_string(data_.classes[k]), to_string(m)));
    }
  }
  const double sup = sampled_speed_sup();
  if (sup >= 1.0) throw SuperluminalError(fmt::format("sampled speed {} is not < 1", sup));
  if (sup > data_.v0 + tol_.speed_slack) {
    throw ValidationError(
        fmt::format("sampled speed {} exceeds declared v0 = {}", sup, data_.v0));
  }
}

Trajectory Trajectory::translated(const Vec3& a) const {
  TrajectoryData d = data_;
  d.anchor += a;
  for (auto& seg : d.segments) seg.c[0] += a;
  return Trajectory(std::move(d), tol_);
}

Trajectory Trajectory::time_shifted(double tau) const {
  TrajectoryData d = data_;
  for (auto& b : d.breakpoints) b += tau;
  return Trajectory(std::move(d), tol_);
}

Trajectory Trajectory::rotated(const Mat3& r) const {
  TrajectoryData d = data_;
  d.anchor = r * d.anchor;
  d.v_in = r * d.v_in;
  d.v_out = r * d.v_out;
  for (auto& seg : d.segments) {
    for (auto& c : seg.c) c = r * c;
  }
  return Trajectory(std::move(d), tol_);
}

namespace {

void require_subluminal(const Vec3& v, const char* name) {
  if (!v.allFinite()) throw ValidationError(fmt::format("{} is not finite", name));
  if (v.norm() >= 1.0) {
    throw SuperluminalError(fmt::format("{} has speed {} >= 1", name, v.norm()));
  }
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ValidationError(fmt::format("{} must be positive and finite", name));
  }
}

// Position polynomial x(tau) = x0 + v0 tau + dv * len * H(tau / len) where
// H is the antiderivative of the velocity profile h.
VecPoly blend(const Vec3& x0, const Vec3& v_start, const Vec3& dv, const ScalarPoly& h,
              double len) {
  const ScalarPoly big_h = poly::rescale(poly::integrate(h), len);
  VecPoly out = VecPoly::from_scalar(big_h, dv * len);
  out.c[0] += x0;
  out.c[1] += v_start;
  return out;
}

Vec3 end_of(const VecPoly& seg, double len) { return seg.jet(len).x; }

}  // namespace

Trajectory build_smooth_stop_start(double duration, const Vec3& displacement,
                                   double v0_cap) {
  require_positive(duration, "duration");
  if (!displacement.allFinite()) throw ValidationError("displacement is not finite");
  if (!(v0_cap > 0.0) || v0_cap >= 1.0) throw ValidationError("v0_cap must lie in (0, 1)");
  // Velocity profile 140 s^3 (1 - s)^3 integrates to 1 and peaks at 140/64.
  const ScalarPoly bump{0.0, 0.0, 0.0, 140.0, -420.0, 420.0, -140.0, 0.0};
  const double peak = 140.0 / 64.0 * displacement.norm() / duration;
  if (peak >= 1.0) {
    throw SuperluminalError(fmt::format("implied peak speed {} >= 1", peak));
  }
  if (peak >= v0_cap) {
    throw ValidationError(fmt::format("implied peak speed {} exceeds v0_cap {}", peak, v0_cap));
  }
  TrajectoryData d;
  d.breakpoints = {0.0, duration};
  d.segments = {blend(Vec3::Zero(), Vec3::Zero(), displacement / duration, bump, duration)};
  d.classes = {Smoothness::C3, Smoothness::C3};
  d.v0 = peak;
  return Trajectory(std::move(d));
}

Trajectory build_kick(const Vec3& v_minus, const Vec3& v_plus, double ramp) {
  require_subluminal(v_minus, "v_minus");
  require_subluminal(v_plus, "v_plus");
  require_positive(ramp, "ramp");
  const ScalarPoly h = poly::smootherstep();

  TrajectoryData d;
  d.anchor = -(0.5 * ramp + 1.0) * v_minus;
  VecPoly up = blend(d.anchor, Vec3::Zero(), v_minus, h, ramp);
  Vec3 x = end_of(up, ramp);

  d.breakpoints = {-ramp - 1.0, -1.0};
  d.segments = {up};
  d.classes = {Smoothness::C3, Smoothness::C3};

  auto cruise = [](const Vec3& x0, const Vec3& v) {
    VecPoly s;
    s.c[0] = x0;
    s.c[1] = v;
    return s;
  };
  if (v_minus == v_plus) {
    d.segments.push_back(cruise(x, v_minus));
    x = end_of(d.segments.back(), 2.0);
  } else {
    d.segments.push_back(cruise(x, v_minus));
    x = end_of(d.segments.back(), 1.0);
    d.breakpoints.push_back(0.0);
    d.classes.push_back(Smoothness::C0);
    d.segments.push_back(cruise(x, v_plus));
    x = end_of(d.segments.back(), 1.0);
  }
  d.breakpoints.push_back(1.0);
  d.classes.push_back(Smoothness::C3);
  d.segments.push_back(blend(x, v_plus, -v_plus, h, ramp));
  d.breakpoints.push_back(ramp + 1.0);
  d.classes.push_back(Smoothness::C3);
  d.v0 = std::max(v_minus.norm(), v_plus.norm());
  return Trajectory(std::move(d));
}

Trajectory build_boost(const Vec3& v_in, const Vec3& v_out, double duration) {
  require_subluminal(v_in, "v_in");
  require_subluminal(v_out, "v_out");
  require_positive(duration, "duration");
  TrajectoryData d;
  d.breakpoints = {0.0, duration};
  d.segments = {blend(Vec3::Zero(), v_in, v_out - v_in, poly::smootherstep(), duration)};
  d.classes = {Smoothness::C3, Smoothness::C3};
  d.v_in = v_in;
  d.v_out = v_out;
  d.v0 = std::max(v_in.norm(), v_out.norm());
  return Trajectory(std::move(d));
}

Trajectory build_kink(const Vec3& v_peak, double duration) {
  require_subluminal(v_peak, "v_peak");
  require_positive(duration, "duration");
  // s (1 - s)^4 peaks at s = 1/5 with value 256/3125.
  ScalarPoly h{0.0, 1.0, -4.0, 6.0, -4.0, 1.0, 0.0, 0.0};
  for (auto& c : h) c *= 3125.0 / 256.0;
  TrajectoryData d;
  d.breakpoints = {0.0, duration};
  d.segments = {blend(Vec3::Zero(), Vec3::Zero(), v_peak, h, duration)};
  const bool moving = v_peak.squaredNorm() != 0.0;
  d.classes = {moving ? Smoothness::C1 : Smoothness::C3, Smoothness::C3};
  d.v0 = v_peak.norm();
  return Trajectory(std::move(d));
}

}  // namespace qrad
