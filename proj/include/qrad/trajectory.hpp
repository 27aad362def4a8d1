#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrad/polynomial.hpp"
#include "qrad/types.hpp"

namespace qrad {

enum class Side { Left, Right };

// Smoothness at a breakpoint: derivatives up to this order agree across it.
// C0 is a velocity jump.
enum class Smoothness : int { C0 = 0, C1 = 1, C2 = 2, C3 = 3 };

std::string to_string(Smoothness s);
Smoothness smoothness_from_string(const std::string& s);

// psi(p,t) = omega t - p.x(t) and its time derivatives.
struct PhaseDerivatives {
  double psi = 0.0;
  double psi_t = 0.0;
  double psi_tt = 0.0;
  double psi_ttt = 0.0;
  Side side = Side::Right;
};

// Raw description of a piecewise-polynomial path. Segment k lives on
// [breakpoints[k], breakpoints[k+1]] in the local variable tau = t - breakpoints[k].
struct TrajectoryData {
  std::vector<double> breakpoints;
  std::vector<VecPoly> segments;
  Vec3 v_in = Vec3::Zero();
  Vec3 v_out = Vec3::Zero();
  Vec3 anchor = Vec3::Zero();  // x(breakpoints[0]); taken from segments[0] when present
  std::vector<Smoothness> classes;
  double v0 = 0.0;
};

// Tolerances used by the invariant checker.
struct TrajectoryTolerances {
  double continuity_rel = 1e-12;
  double derivative_rel = 1e-10;
  double speed_slack = 1e-9;
  int samples_per_segment = 10000;
};

// Immutable classical path x(t) with linear tails of velocity v_in / v_out.
class Trajectory {
public:
  // One polynomial piece. Index 0 is the left tail, the last is the right tail.
  struct Piece {
    double lo;
    double hi;
    double origin;  // local time is t - origin
    VecPoly poly;
  };

  explicit Trajectory(TrajectoryData data, const TrajectoryTolerances& tol = {});

  static Trajectory constant_velocity(const Vec3& anchor, const Vec3& v, double t0 = 0.0);

  const TrajectoryData& data() const noexcept { return data_; }
  std::span<const double> breakpoints() const noexcept { return data_.breakpoints; }
  std::span<const Smoothness> classes() const noexcept { return data_.classes; }
  std::span<const Piece> pieces() const noexcept { return pieces_; }
  const Vec3& v_in() const noexcept { return data_.v_in; }
  const Vec3& v_out() const noexcept { return data_.v_out; }
  double v0() const noexcept { return data_.v0; }

  // x, x', x'', x''' at t; at a breakpoint the one-sided limit selected by side.
  Vec3 eval(double t, int order, Side side = Side::Right) const;
  VecPoly::Jet jet(double t, Side side = Side::Right) const;
  PhaseDerivatives phase(const Vec3& p, double t, Side side = Side::Right) const;

  // Electrostatic potential (4 pi)^{-1} |x - x(t)|^{-1} of the unit point charge.
  double coulomb_potential(const Vec3& x, double t) const;

  std::size_t piece_index(double t, Side side) const;

  // True when x' vanishes on both tails (velocity of compact support).
  bool has_compact_velocity() const noexcept;
  bool has_velocity_jump() const noexcept;
  bool velocity_vanishes_on(std::size_t piece) const;
  bool acceleration_vanishes_on(std::size_t piece) const;

  // Unit vector e with x(t) - x(t0) parallel to e for all t; empty for static or
  // genuinely three-dimensional paths.
  std::optional<Vec3> motion_axis() const;

  // Measured smoothness class at breakpoint b (ignores the declared value).
  Smoothness measured_class(std::size_t b) const;
  double sampled_speed_sup() const;

  Trajectory translated(const Vec3& a) const;
  Trajectory time_shifted(double tau) const;
  Trajectory rotated(const Mat3& r) const;

private:
  void build_pieces();
  void validate() const;

  TrajectoryData data_;
  TrajectoryTolerances tol_;
  std::vector<Piece> pieces_;
};

// x' a polynomial bump on [0, duration], at rest outside, C3 at both ends.
Trajectory build_smooth_stop_start(double duration, const Vec3& displacement, double v0_cap);

// Velocity ramps 0 -> v_minus on [-ramp-1, -1], constant to t = 0, jumps to v_plus,
// constant to t = 1, ramps to 0 on [1, ramp+1].
Trajectory build_kick(const Vec3& v_minus, const Vec3& v_plus, double ramp);

// x' = v_in for t <= 0, v_out for t >= duration, C3 Hermite blend between.
Trajectory build_boost(const Vec3& v_in, const Vec3& v_out, double duration);

// Compactly supported velocity pulse peaking at v_peak whose acceleration jumps at
// t = 0 (class C1 there) and which stops C3-smoothly at t = duration.
Trajectory build_kink(const Vec3& v_peak, double duration);

}  // namespace qrad
