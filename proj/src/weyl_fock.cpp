#include "qrad/weyl_fock.hpp"

#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "qrad/diagnostics.hpp"
#include "qrad/quadrature.hpp"

namespace qrad {

namespace {

void require_cutoff(int n_max) {
  if (n_max < 1) throw ValidationError("Fock cutoff must be at least 1");
}

}  // namespace

TruncatedOperator annihilation(int n_max) {
  require_cutoff(n_max);
  CMat a = CMat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {a, OperatorTag::Annihilation};
}

TruncatedOperator creation(int n_max) {
  return {annihilation(n_max).m.adjoint(), OperatorTag::Creation};
}

TruncatedOperator number_operator(int n_max) {
  require_cutoff(n_max);
  CMat m = CMat::Zero(n_max + 1, n_max + 1);
  for (int n = 0; n <= n_max; ++n) m(n, n) = n;
  return {m, OperatorTag::Number};
}

TruncatedFockState vacuum(int n_max) {
  require_cutoff(n_max);
  CVec c = CVec::Zero(n_max + 1);
  c[0] = 1.0;
  return {c};
}

TruncatedFockState coherent_state(cplx alpha, int n_max, double tail_tol) {
  require_cutoff(n_max);
  const double a2 = std::norm(alpha);
  if (n_max < 10.0 * a2 + 20.0) {
    throw CutoffError(fmt::format("cutoff {} too small for |alpha|^2 = {:.4g} (need >= {:.0f})", n_max, a2,
                                  std::ceil(10.0 * a2 + 20.0)));
  }
  CVec c(n_max + 1);
  cplx term = std::exp(-0.5 * a2);
  c[0] = term;
  for (int n = 1; n <= n_max; ++n) {
    term *= alpha / std::sqrt(static_cast<double>(n));
    c[n] = term;
  }
  TruncatedFockState s{c};
  if (s.tail_mass() > tail_tol) {
    throw CutoffError(fmt::format("coherent state tail mass {:.3e} exceeds {:.1e}", s.tail_mass(), tail_tol));
  }
  return s;
}

CMat exp_i_hermitian(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const Eigen::VectorXcd phases = (es.eigenvalues().cast<cplx>() * I).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

TruncatedOperator weyl_matrix(cplx h, int n_max) {
  const CMat a = annihilation(n_max).m;
  const CMat gen = (h * a.adjoint() + std::conj(h) * a) / std::sqrt(2.0);
  return {exp_i_hermitian(gen), OperatorTag::Weyl};
}

TruncatedOperator s_operator(cplx alpha, int n_max) {
  TruncatedOperator s = weyl_matrix(cplx(0.0, std::sqrt(2.0)) * alpha, n_max);
  s.tag = OperatorTag::Displacement;
  return s;
}

ScatteringAmplitude scattering_amplitude(int m_out, int n_in, cplx alpha, int n_max) {
  if (m_out < 0 || n_in < 0 || m_out > 6 || n_in > 6) {
    throw ValidationError("scattering amplitudes are supported for 0 <= m, n <= 6");
  }
  const CMat ad = creation(n_max).m;
  const CMat id = CMat::Identity(n_max + 1, n_max + 1);
  CVec in = vacuum(n_max).c;
  for (int k = 0; k < n_in; ++k) in = ad * in;

  CVec out = coherent_state(alpha, n_max).c;
  const CMat ad_out = ad - std::conj(alpha) * id;
  for (int k = 0; k < m_out; ++k) out = ad_out * out;

  CVec bra = vacuum(n_max).c;
  for (int k = 0; k < m_out; ++k) bra = ad * bra;
  const CMat s = s_operator(alpha, n_max).m;

  return {out.dot(in), bra.dot(s * in)};
}

double block_norm(const CMat& m, int k) {
  const CMat b = m.topLeftCorner(k, k);
  Eigen::JacobiSVD<CMat> svd(b);
  return svd.singularValues()(0);
}

double mode_reduce(const EmissionAmplitude& amp, const DivergenceReport& report) {
  if (report.inconclusive || report.classification != Classification::Fock) {
    throw NonFockError(fmt::format("out-state classified {}; ||J_T|| is not finite",
                                   report.inconclusive ? "inconclusive" : to_string(report.classification)));
  }
  return std::sqrt(norm_squared(amp.J_T));
}

void TruncatedFockState::write_csv(std::ostream& os) const {
  os << "index,re,im\n";
  for (Eigen::Index n = 0; n < c.size(); ++n) {
    os << fmt::format("{},{:.17g},{:.17g}\n", n, c[n].real() + 0.0, c[n].imag() + 0.0);
  }
}

void TruncatedOperator::write_csv(std::ostream& os) const {
  os << "row,col,re,im\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) == cplx(0.0)) continue;
      os << fmt::format("{},{},{:.17g},{:.17g}\n", r, c, m(r, c).real() + 0.0, m(r, c).imag() + 0.0);
    }
  }
}

}  // namespace qrad
