#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "qrad/types.hpp"

namespace qrad {

struct EmissionAmplitude;
struct DivergenceReport;

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr int default_cutoff = 80;

// Occupation-number amplitudes c_0..c_N of one mode.
struct TruncatedFockState {
  CVec c;

  int cutoff() const { return static_cast<int>(c.size()) - 1; }
  double norm() const { return c.norm(); }
  double tail_mass() const { return std::norm(c[c.size() - 1]); }
  void write_csv(std::ostream& os) const;
};

enum class OperatorTag { Creation, Annihilation, Number, Weyl, Displacement, Custom };

struct TruncatedOperator {
  CMat m;
  OperatorTag tag = OperatorTag::Custom;

  int cutoff() const { return static_cast<int>(m.rows()) - 1; }
  TruncatedFockState apply(const TruncatedFockState& s) const { return {m * s.c}; }
  void write_csv(std::ostream& os) const;
};

TruncatedOperator annihilation(int n_max);
TruncatedOperator creation(int n_max);
TruncatedOperator number_operator(int n_max);
TruncatedFockState vacuum(int n_max);

// Ω_α with c_n = e^{-|α|^2/2} α^n / sqrt(n!). Requires n_max >= 10|α|^2 + 20 and
// a tail mass below tail_tol.
TruncatedFockState coherent_state(cplx alpha, int n_max, double tail_tol = 1e-9);

// W(h) = exp(i (h a* + conj(h) a) / sqrt 2) via the eigendecomposition of the
// Hermitian generator.
TruncatedOperator weyl_matrix(cplx h, int n_max);

// S = exp(-α a* + conj(α) a) = W(i sqrt(2) α); S^{-1} Ω_0 = Ω_α.
TruncatedOperator s_operator(cplx alpha, int n_max);

// exp(i H) for Hermitian H.
CMat exp_i_hermitian(const CMat& h);

struct ScatteringAmplitude {
  cplx out_form;  // <(a* - conj α)^m Ω_α, (a*)^n Ω_0>
  cplx s_form;    // <(a*)^m Ω_0, S (a*)^n Ω_0>
  double discrepancy() const { return std::abs(out_form - s_form); }
};

ScatteringAmplitude scattering_amplitude(int m_out, int n_in, cplx alpha, int n_max = default_cutoff);

// Operator norm (largest singular value) of the leading (k x k) block.
double block_norm(const CMat& m, int k);

// α = ||J_T|| of a Fock-classified amplitude; refuses non-Fock reports.
double mode_reduce(const EmissionAmplitude& amp, const DivergenceReport& report);

}  // namespace qrad
