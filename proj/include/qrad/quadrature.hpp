#pragma once

#include <span>
#include <vector>

#include "qrad/mode_function.hpp"

namespace qrad {

// Angular integral of |f|^2 on each radial shell: g_i = sum |f(r_i n)|^2 dOmega.
std::vector<double> angular_norms(const ModeFunction& f);

// Integral over a <= r <= b of g(r) (r/2) dr from per-node angular integrals g.
// Partial panels are integrated through the panel's Lagrange interpolant.
double radial_integral(const SphericalGrid& grid, std::span<const double> g, double a, double b);

// Shell norm: integral over a <= |p| <= b of |f|^2 dp/(2 omega).
double shell_integral(const ModeFunction& f, double a, double b);

// Inner product of H: integral of conj(f1).f2 dp/(2 omega).
cplx pairing(const ModeFunction& f1, const ModeFunction& f2);

// The flat L^2(dp) pairing integral of conj(f1).f2 dp = pairing with 2 omega inserted.
cplx pairing_l2(const ModeFunction& f1, const ModeFunction& f2);

double norm_squared(const ModeFunction& f);

}  // namespace qrad
