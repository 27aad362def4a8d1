#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qrad/diagnostics.hpp"
#include "qrad/emission.hpp"
#include "qrad/trajectory.hpp"

namespace qrad {

// Fully resolved run configuration (defaults merged in, validated).
struct RunConfig {
  nlohmann::json doc;
};

nlohmann::json default_config();
RunConfig resolve_config(const nlohmann::json& user);
// KEY=VALUE with a dotted key path; VALUE is parsed as JSON when possible.
void apply_override(nlohmann::json& doc, const std::string& assignment);

Trajectory build_trajectory(const nlohmann::json& spec);
GridSpec grid_spec(const RunConfig& cfg, const Trajectory& tr);
EmissionOptions emission_options(const RunConfig& cfg);
DiagnosticsOptions diagnostics_options(const RunConfig& cfg);

enum class Command { Run, EmitSpectrum, Classify, AlgebraCheck, CompareRepresentations };

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json report;
};

// Executes a command, writing artifacts under output.dir when write_files is set.
RunOutcome run(const RunConfig& cfg, Command cmd, bool write_files = true);

struct GapRow {
  double omega_lo;
  double omega_hi;
  std::size_t samples;
  double max_gap;
};

struct RepresentationComparison {
  std::vector<std::string> representations;
  std::vector<GapRow> rows;
  double threshold = 1e-4;
  bool passed() const;
  nlohmann::json to_json() const;
};

RepresentationComparison compare_representations(const RunConfig& cfg);
RepresentationComparison compare_representations(const Trajectory& tr, const nlohmann::json& compare_cfg,
                                                 const OscOptions& osc);

struct AlgebraCheck {
  std::string name;
  double value;
  double tolerance;
  bool passed;
};

// Truncated-Fock verification suite for one coherent amplitude alpha.
std::vector<AlgebraCheck> algebra_suite(cplx alpha, int n_max, std::uint64_t seed, int positivity_instances = 100);

}  // namespace qrad
