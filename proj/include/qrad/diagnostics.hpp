#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qrad/emission.hpp"

namespace qrad {

enum class Classification { Fock, NonFockUV, NonFockIR, NonFockBoth };
std::string to_string(Classification c);

struct FitWindow {
  double lo;
  double hi;
};

struct DiagnosticsOptions {
  FitWindow uv{10.0, 1e3};
  FitWindow ir{1e-4, 1e-1};
  double theta_rel = 0.05;
  double residual_ratio = 0.2;
  std::size_t min_points = 8;
};

// I(x) ~ a + b log(x) by least squares.
struct LogFit {
  double a = 0.0;
  double b = 0.0;
  double residual_rms = 0.0;
  std::vector<double> residuals;
};

LogFit fit_log(const std::vector<std::pair<double, double>>& xy);

struct UvFit {
  std::vector<std::pair<double, double>> shells;  // (Lambda, I_uv(Lambda))
  LogFit fit;
  double amplitude_exponent = 0.0;                 // slope of log sup|J_T| vs log omega
  double exponent_residual = 0.0;
  std::vector<std::pair<double, double>> sup_profile;  // (omega, sup_dir |J_T|)
  double midpoint_value = 0.0;                     // I_uv at the geometric window midpoint
};

struct IrFit {
  std::vector<std::pair<double, double>> shells;  // (eps, I_ir(eps))
  LogFit fit;                                      // against log(1/eps)
  double midpoint_value = 0.0;
};

UvFit uv_fit(const EmissionAmplitude& amp, FitWindow window = {10.0, 1e3}, std::size_t min_points = 8);
IrFit ir_fit(const EmissionAmplitude& amp, FitWindow window = {1e-4, 1e-1}, std::size_t min_points = 8);

struct DivergenceReport {
  UvFit uv;
  IrFit ir;
  double theta_rel = 0.05;
  double residual_ratio = 0.2;
  bool uv_divergent = false;
  bool ir_divergent = false;
  bool inconclusive = false;
  std::string note;
  Classification classification = Classification::Fock;
  std::optional<double> photon_number;

  double b_uv() const { return uv.fit.b; }
  double b_ir() const { return ir.fit.b; }
  // b / (theta_rel I_mid); > 1 means divergent by the threshold rule.
  double uv_margin() const;
  double ir_margin() const;
  nlohmann::json to_json() const;
};

class InconclusiveError : public Error {
public:
  InconclusiveError(const std::string& msg, DivergenceReport report)
      : Error(msg), report_(std::move(report)) {}
  const DivergenceReport& report() const noexcept { return report_; }

private:
  DivergenceReport report_;
};

// Runs both fits and applies the threshold rule. Throws InconclusiveError when
// a coefficient exceeds the threshold but its fit residual rules out a clean log law.
DivergenceReport classify(const EmissionAmplitude& amp, const DiagnosticsOptions& opt = {});

struct Spectrum {
  std::vector<double> omega;
  std::vector<double> weight;      // dr quadrature weight per shell
  std::vector<double> dn_domega;
  double angular_omega = 0.0;      // shell used for the angular slice
  std::vector<double> cos_theta;
  std::vector<double> phi;
  std::vector<double> angular;     // |J_T|^2, n_theta x n_phi, row major

  double total() const;
  void write_csv(std::ostream& os) const;
  void write_angular_csv(std::ostream& os) const;
};

Spectrum spectrum(const EmissionAmplitude& amp, double angular_omega = 1.0);

// Least-squares slope of log y against log x over x in [lo, hi].
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi);

}  // namespace qrad
