#include "doctest.h"

#include <random>
#include <sstream>

#include "qrad/pipeline.hpp"
#include "qrad/weyl_fock.hpp"

using namespace qrad;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("canonical commutation relation on the bulk") {
  const int n = 40;
  const CMat a = annihilation(n).m, ad = creation(n).m;
  const CMat comm = a * ad - ad * a;
  const CMat bulk = comm.topLeftCorner(n - 1, n - 1) - CMat::Identity(n - 1, n - 1);
  CHECK(bulk.norm() <= 1e-12);
  CHECK(std::abs(comm(n, n) - cplx(-n)) <= 1e-12);
  CHECK((number_operator(n).m - ad * a).norm() <= 1e-12);
  CHECK_THROWS_AS(annihilation(0), ValidationError);
}

TEST_CASE("coherent states") {
  const auto vac = coherent_state(0.0, 30);
  CHECK(vac.c[0] == cplx(1.0));
  CHECK(vac.c.tail(30).norm() == 0.0);

  const int n_max = 60;
  const CMat a = annihilation(n_max).m;
  for (cplx alpha : {cplx(1.0, 0.0), cplx(-1.2, 0.9), cplx(0.0, 2.0)}) {
    const auto s = coherent_state(alpha, n_max);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((a * s.c - alpha * s.c).norm() <= 1e-8);
    const cplx n_exp = s.c.dot(number_operator(n_max).m * s.c);
    CHECK(std::abs(n_exp - std::norm(alpha)) <= 1e-9);
  }
  CHECK_THROWS_AS(coherent_state(cplx(3.0, 0.0), 60), CutoffError);

  const CMat ad = creation(n_max).m;
  CVec v = vacuum(n_max).c;
  for (int k = 1; k <= 10; ++k) {
    v = ad * v;
    CHECK(v.norm() == doctest::Approx(std::sqrt(factorial(k))).epsilon(1e-12));
  }
}

TEST_CASE("Weyl operators") {
  const int n_max = 80;
  CHECK((weyl_matrix(0.0, n_max).m - CMat::Identity(n_max + 1, n_max + 1)).norm() <= 1e-12);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  const int k = 40;
  for (int i = 0; i < 5; ++i) {
    const cplx h1(u(rng), u(rng)), h2(u(rng), u(rng));
    const CMat w1 = weyl_matrix(h1, n_max).m, w2 = weyl_matrix(h2, n_max).m;
    CHECK(std::abs(w1(0, 0) - std::exp(-0.25 * std::norm(h1))) <= 1e-8);
    const CMat lhs = w1 * w2;
    const CMat rhs = std::exp(cplx(0.0, -0.5 * (std::conj(h1) * h2).imag())) * weyl_matrix(h1 + h2, n_max).m;
    CHECK((lhs - rhs).leftCols(21).norm() <= 1e-7);
    const CMat uu = w1.adjoint() * w1;
    CHECK((uu.topLeftCorner(k, k) - CMat::Identity(k, k)).norm() <= 1e-8);
  }
}

TEST_CASE("S operator") {
  const int n_max = 80;
  CHECK((s_operator(0.0, n_max).m - CMat::Identity(n_max + 1, n_max + 1)).norm() <= 1e-12);
  const int k = 40;
  for (cplx alpha : {cplx(1.0, 0.0), cplx(0.4, -1.1)}) {
    const CMat s = s_operator(alpha, n_max).m;
    const CMat sinv = s.adjoint();
    CHECK((sinv * vacuum(n_max).c - coherent_state(alpha, n_max).c).norm() <= 1e-7);
    CHECK(((s.adjoint() * s).topLeftCorner(k, k) - CMat::Identity(k, k)).norm() <= 1e-8);
    const CMat a = annihilation(n_max).m;
    const CMat shifted = sinv * a * s;
    const CMat expect = a - alpha * CMat::Identity(n_max + 1, n_max + 1);
    CHECK((shifted - expect).topLeftCorner(k, k).norm() <= 1e-7);
  }
}

TEST_CASE("scattering amplitudes") {
  const cplx alpha(0.8, 0.3);
  const auto s00 = scattering_amplitude(0, 0, alpha);
  CHECK(std::abs(s00.out_form - std::exp(-0.5 * std::norm(alpha))) <= 1e-12);
  for (int m = 0; m <= 6; ++m) {
    for (int n = 0; n <= 6; ++n) CHECK(scattering_amplitude(m, n, alpha).discrepancy() <= 1e-8);
  }
  // <Omega_alpha, a* Omega_0> is the conjugated first coherent coefficient.
  const auto s01 = scattering_amplitude(0, 1, alpha);
  CHECK(std::abs(s01.out_form - std::conj(coherent_state(alpha, default_cutoff).c[1])) <= 1e-12);
  CHECK_THROWS_AS(scattering_amplitude(7, 0, alpha), ValidationError);
}

TEST_CASE("algebra suite passes for the default amplitudes") {
  for (cplx alpha : {cplx(0.0), cplx(0.5, 0.0), cplx(1.0, 0.5), cplx(1.2, -1.4)}) {
    for (const auto& c : algebra_suite(alpha, 80, 20240611, 20)) {
      INFO(c.name << " = " << c.value);
      CHECK(c.passed);
    }
  }
}

TEST_CASE("fock objects serialize as index,re,im") {
  std::ostringstream os;
  coherent_state(cplx(0.5, 0.0), 30).write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("index,re,im\n0,", 0) == 0);
  std::ostringstream om;
  creation(3).write_csv(om);
  CHECK(om.str().rfind("row,col,re,im\n1,0,1,0\n", 0) == 0);
}
