#pragma once

#include <array>
#include <cstddef>

#include "qrad/types.hpp"

namespace qrad {

inline constexpr std::size_t kMaxDegree = 7;

// Scalar polynomial of degree <= kMaxDegree, coefficients in ascending order.
using ScalarPoly = std::array<double, kMaxDegree + 1>;

// 3-vector polynomial sum_k c[k] tau^k in a local time variable tau.
struct VecPoly {
  std::array<Vec3, kMaxDegree + 1> c;

  VecPoly() { c.fill(Vec3::Zero()); }

  // Value and first three derivatives at tau.
  struct Jet {
    Vec3 x, v, a, j;
  };

  Jet jet(double tau) const {
    Vec3 p0 = c[kMaxDegree];
    Vec3 p1 = Vec3::Zero(), p2 = Vec3::Zero(), p3 = Vec3::Zero();
    for (std::size_t k = kMaxDegree; k-- > 0;) {
      p3 = p3 * tau + p2;
      p2 = p2 * tau + p1;
      p1 = p1 * tau + p0;
      p0 = p0 * tau + c[k];
    }
    return {p0, p1, 2.0 * p2, 6.0 * p3};
  }

  // k-th derivative at tau, any k (zero beyond the degree).
  Vec3 derivative(double tau, int order) const;

  // Taylor re-expansion about tau0: returns q with q(s) = this(tau0 + s).
  VecPoly shifted(double tau0) const;

  int degree() const;
  bool is_zero_beyond(int order) const;  // all coefficients of degree > order vanish

  static VecPoly from_scalar(const ScalarPoly& s, const Vec3& direction);
};

namespace poly {

ScalarPoly multiply(const ScalarPoly& a, const ScalarPoly& b);
// Antiderivative vanishing at 0; throws if the degree would exceed kMaxDegree.
ScalarPoly integrate(const ScalarPoly& a);
// s(tau / scale): rescale the variable.
ScalarPoly rescale(const ScalarPoly& a, double scale);
double evaluate(const ScalarPoly& a, double x);

// Minimal-degree Hermite step h(s) on [0,1]: h(0)=0, h(1)=1, h', h'' vanish at both ends.
ScalarPoly smootherstep();

}  // namespace poly

}  // namespace qrad
