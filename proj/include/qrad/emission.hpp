#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrad/mode_function.hpp"
#include "qrad/oscillatory.hpp"
#include "qrad/trajectory.hpp"

namespace qrad {

struct TestFunction;

// Transverse projector P(p) = 1 - p p^T / |p|^2.
Mat3 transverse_projector(const Vec3& p);
CVec3 project_transverse(const Vec3& p, const CVec3& h);

enum class Representation : std::uint8_t { Direct, Ibp1, Ibp2, ClosedForm, Zero };
enum class Strategy { Auto, Direct, Ibp1, Ibp2 };

std::string to_string(Representation r);
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct AmplitudeValue {
  CVec3 value = CVec3::Zero();
  double error = 0.0;  // absolute, prefactor included
  int panels = 0;
  bool converged = true;
};

// J(p) = -i (2 pi)^{-3/2} int x'(s) e^{i omega s - i p.x(s)} ds for compactly supported x'.
AmplitudeValue amplitude_direct(const Trajectory& tr, const Vec3& p, const OscOptions& opt = {});
// One integration by parts, plus velocity-jump boundary terms.
AmplitudeValue amplitude_ibp1(const Trajectory& tr, const Vec3& p, const OscOptions& opt = {});
// Two integrations by parts, plus acceleration-jump boundary terms. Rejects velocity jumps.
AmplitudeValue amplitude_ibp2(const Trajectory& tr, const Vec3& p, const OscOptions& opt = {});
AmplitudeValue amplitude(const Trajectory& tr, const Vec3& p, Representation rep,
                         const OscOptions& opt = {});

bool applicable(const Trajectory& tr, Representation rep);

struct JumpPieces {
  Vec3 delta = Vec3::Zero();
  Vec3 delta1_T = Vec3::Zero();
  Vec3 delta2 = Vec3::Zero();
};

// Delta(p) = v-/(omega - p.v-) - v+/(omega - p.v+) and its transverse split.
JumpPieces closed_form_delta(const Vec3& v_minus, const Vec3& v_plus, const Vec3& p);

struct InfraredPieces {
  Vec3 F = Vec3::Zero();
  Vec3 F1_T = Vec3::Zero();
  Vec3 F2 = Vec3::Zero();
};

// F(p) = v_out/(omega - p.v_out) - v_in/(omega - p.v_in) and its transverse split.
InfraredPieces closed_form_ir(const Vec3& v_in, const Vec3& v_out, const Vec3& p);

// Separable regular current j(x, t) = g(t) f(x) with g a polynomial on [0, duration].
struct SeparableCurrent {
  const TestFunction* spatial = nullptr;
  ScalarPoly temporal{};
  double duration = 1.0;
};

// -sqrt(2 pi) i jhat(omega, p) for the separable current.
AmplitudeValue amplitude_regular(const SeparableCurrent& j, const Vec3& p, const OscOptions& opt = {});

// Grid evaluation engine: Ray builds one Legendre-panel quadrature per direction
// and reuses it for every radius; Adaptive integrates each momentum separately.
enum class Engine { Ray, Adaptive };

std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

struct RayOptions {
  double rel_tol = 1e-13;          // Legendre tail relative to the profile scale
  std::size_t max_panels = 20000;
};

struct EmissionOptions {
  Strategy strategy = Strategy::Auto;
  Engine engine = Engine::Ray;
  RayOptions ray{};
  double omega_switch = 5.0;
  OscOptions osc{};
  double cross_check_fraction = 0.01;
  double cross_check_tol = 1e-5;
  double cross_check_omega_lo = 0.1;
  double cross_check_omega_hi = 100.0;
  bool use_symmetry = true;
  int threads = 0;  // 0: hardware concurrency; 1: serial
};

struct CrossCheck {
  std::size_t index;
  double omega;
  Representation primary;
  Representation alternative;
  double rel_gap;
  bool passed;
};

struct EmissionAmplitude {
  std::shared_ptr<const SphericalGrid> grid;
  ModeFunction J;
  ModeFunction J_T;
  std::vector<Representation> representation;
  std::vector<double> error;
  std::vector<CrossCheck> cross_checks;
  Strategy strategy = Strategy::Auto;
  OscOptions tolerances{};
  std::string trajectory_hash;
  bool symmetric_fast_path = false;
  Engine engine = Engine::Ray;
  double ray_tolerance = 0.0;

  double max_error() const;
  bool cross_checks_passed() const;
  void write_csv(std::ostream& os, std::size_t stride = 1) const;
  nlohmann::json metadata() const;
};

// Representation used at momentum p by the dispatch rule.
Representation choose_representation(const Trajectory& tr, double omega, const EmissionOptions& opt);

EmissionAmplitude compute_amplitude(const Trajectory& tr, std::shared_ptr<const SphericalGrid> grid,
                                    const EmissionOptions& opt = {});

double relative_gap(const CVec3& a, const CVec3& b);

}  // namespace qrad
