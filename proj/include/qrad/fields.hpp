#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "qrad/mode_function.hpp"

namespace qrad {

enum class TestFamily { Gaussian, GaussianPolynomial };

// f(x) = amplitude * polarization * prod_k y_k^{powers_k} * exp(-|y|^2 / 2),
// y = (x - center) / width. Real, vector valued, Schwartz class.
struct TestFunction {
  TestFamily family = TestFamily::Gaussian;
  Vec3 center = Vec3::Zero();
  double width = 1.0;
  Vec3 polarization = Vec3::UnitX();
  double amplitude = 1.0;
  std::array<int, 3> powers{0, 0, 0};  // used by GaussianPolynomial only

  void validate() const;
  int degree() const;
  Vec3 value(const Vec3& x) const;
  // (2 pi)^{-3/2} int e^{-ipx} f(x) dx in closed form.
  CVec3 transform(const Vec3& p) const;
  // transform(p) without the translation phase e^{-ip.center}.
  CVec3 transform_centered(const Vec3& p) const;
  // Radius beyond which |transform| is below 1e-17 of its scale.
  double momentum_cutoff() const;
};

// Probabilists' Hermite polynomial He_n(x).
double hermite_he(int n, double x);

struct KernelOptions {
  double rel_tol = 1e-9;        // agreement between the two resolutions
  double abs_tol = 1e-13;
  double resolution = 1.0;      // multiplies all node counts
  bool throw_on_failure = true;
};

struct KernelValue {
  Vec3 value = Vec3::Zero();
  double imag_residual = 0.0;   // |Im| of the complex quadrature result
  double error_estimate = 0.0;
};

// u_f(x, t) = (2 pi)^{-3/2} int sin(omega t)/omega e^{ipx} f~(p) dp.
KernelValue u_f(const TestFunction& f, const Vec3& x, double t, const KernelOptions& opt = {});

enum class KernelSign { Retarded, Advanced };

// (G_+/- * (f (x) delta_{t0}))(x, t) = +/- theta(+/-(t - t0)) u_f(x, t - t0).
KernelValue retarded_kernel(const TestFunction& f, double t0, const Vec3& x, double t,
                            KernelSign sign, const KernelOptions& opt = {});

// omega_0(W(h)) = exp(-||h||^2 / 4).
cplx vacuum_weyl(const ModeFunction& h);

// omega_J(W(h)) = exp(-||h||^2 / 4 + i sqrt(2) Re (J, h)).
cplx coherent_weyl(const ModeFunction& h, const ModeFunction& J);

struct PairingConvergence {
  double tail_rel = 1e-3;  // admissible extrapolated tail relative to |pairing|
};

struct TailEstimate {
  cplx value;
  double ir_tail = 0.0;  // extrapolated missing contribution below r_min
  double uv_tail = 0.0;  // extrapolated missing contribution above r_max
  bool converged = true;
};

// Pairing (J, h) with an estimate of the contribution cut off by the grid range,
// from the geometric decay of per-decade contributions at both ends.
TailEstimate pairing_with_tails(const ModeFunction& J, const ModeFunction& h);

// omega_in(W_in(h)) e^{i sqrt(2) Re (J_T, h)}; J_T need not have finite norm.
cplx out_state_weyl(const ModeFunction& h, const ModeFunction& J_T,
                    const PairingConvergence& conv = {});

// omega(B* B) for B = sum_n c_n W(h_n) in the coherent state with pairings
// L_n = (J, h_n); grams(m, n) = (h_m, h_n).
double coherent_positivity_check(const std::vector<cplx>& L_values,
                                 const std::vector<cplx>& coefficients,
                                 const Eigen::MatrixXcd& grams);

// Same quantity with the complex imaginary part retained (should vanish).
cplx coherent_positivity_value(const std::vector<cplx>& L_values,
                               const std::vector<cplx>& coefficients,
                               const Eigen::MatrixXcd& grams);

struct EndpointOptions {
  int n_theta = 48;
  double rel_tol = 1e-8;
};

// int (omega - p.v)^{-1} e^{i(omega - p.v)t} f~_T(-p) dp/(2 omega) by spherical
// quadrature with an adaptive oscillatory radial rule.
CVec3 endpoint_decay_integral(const TestFunction& f, const Vec3& v_out, double t,
                              const EndpointOptions& opt = {});

}  // namespace qrad
