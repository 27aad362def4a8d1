#include "qrad/polynomial.hpp"

namespace qrad {

Vec3 VecPoly::derivative(double tau, int order) const {
  if (order <= 3) {
    const Jet jt = jet(tau);
    switch (order) {
      case 0: return jt.x;
      case 1: return jt.v;
      case 2: return jt.a;
      default: return jt.j;
    }
  }
  Vec3 acc = Vec3::Zero();
  for (int k = static_cast<int>(kMaxDegree); k >= order; --k) {
    double falling = 1.0;
    for (int m = 0; m < order; ++m) falling *= static_cast<double>(k - m);
    acc = acc * tau + falling * c[static_cast<std::size_t>(k)];
  }
  return acc;
}

VecPoly VecPoly::shifted(double tau0) const {
  // Repeated synthetic division by (tau - tau0).
  VecPoly q = *this;
  for (std::size_t i = 0; i < kMaxDegree; ++i) {
    for (std::size_t k = kMaxDegree; k-- > i;) q.c[k] += tau0 * q.c[k + 1];
  }
  return q;
}

int VecPoly::degree() const {
  for (int k = static_cast<int>(kMaxDegree); k > 0; --k) {
    if (c[static_cast<std::size_t>(k)].squaredNorm() != 0.0) return k;
  }
  return 0;
}

bool VecPoly::is_zero_beyond(int order) const { return degree() <= order; }

VecPoly VecPoly::from_scalar(const ScalarPoly& s, const Vec3& direction) {
  VecPoly out;
  for (std::size_t k = 0; k <= kMaxDegree; ++k) out.c[k] = s[k] * direction;
  return out;
}

namespace poly {

ScalarPoly multiply(const ScalarPoly& a, const ScalarPoly& b) {
  ScalarPoly out{};
  for (std::size_t i = 0; i <= kMaxDegree; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j <= kMaxDegree; ++j) {
      if (b[j] == 0.0) continue;
      if (i + j > kMaxDegree) throw ValidationError("polynomial degree exceeds 7");
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

ScalarPoly integrate(const ScalarPoly& a) {
  if (a[kMaxDegree] != 0.0) throw ValidationError("polynomial degree exceeds 7");
  ScalarPoly out{};
  for (std::size_t k = 0; k < kMaxDegree; ++k) out[k + 1] = a[k] / static_cast<double>(k + 1);
  return out;
}

ScalarPoly rescale(const ScalarPoly& a, double scale) {
  ScalarPoly out{};
  double f = 1.0;
  for (std::size_t k = 0; k <= kMaxDegree; ++k) {
    out[k] = a[k] * f;
    f /= scale;
  }
  return out;
}

double evaluate(const ScalarPoly& a, double x) {
  double acc = 0.0;
  for (std::size_t k = kMaxDegree + 1; k-- > 0;) acc = acc * x + a[k];
  return acc;
}

ScalarPoly smootherstep() { return {0.0, 0.0, 0.0, 10.0, -15.0, 6.0, 0.0, 0.0}; }

}  // namespace poly

}  // namespace qrad
