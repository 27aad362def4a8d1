#pragma once

#include <array>
#include <vector>

#include "qrad/emission.hpp"

namespace qrad {

// Spherical Bessel functions j_0 .. j_{n-1} at x >= 0.
void spherical_bessel_j(int n, double x, double* out);

// J(omega n) along a fixed direction n for arbitrary omega. With s = t - n.x(t)
// the phase is omega s, and each representation reads
//   J = prefactor * c_k(omega) * int H(s) e^{i omega s} ds + breakpoint terms,
// c_k = 1, -i/omega, omega^{-2} for direct, ibp1, ibp2, with H independent of
// omega. H is expanded in Legendre polynomials on panels in s and every term is
// integrated exactly: int_{-1}^{1} P_l(x) e^{i kappa x} dx = 2 i^l j_l(kappa).
class RayQuadrature {
public:
  static constexpr int order = 16;

  RayQuadrature(const Trajectory& tr, const Vec3& direction, Representation rep,
                const RayOptions& opt = {});

  AmplitudeValue operator()(double omega) const;

  std::size_t panels() const noexcept { return panels_.size(); }
  Representation representation() const noexcept { return rep_; }

private:
  struct Panel {
    long double center;
    double half;
    double tail;
    std::array<Vec3, order> coef;
  };
  struct Breakpoint {
    long double s;
    Vec3 term;
  };

  Representation rep_;
  std::vector<Panel> panels_;
  std::vector<Breakpoint> breaks_;
};

}  // namespace qrad
