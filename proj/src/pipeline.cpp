#include "qrad/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>

#include "qrad/fields.hpp"
#include "qrad/quadrature.hpp"
#include "qrad/serialization.hpp"
#include "qrad/weyl_fock.hpp"

namespace qrad {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "trajectory": {"builder": "smooth_stop_start", "duration": 10.0, "displacement": [1.0, 0.0, 0.0],
                   "v0_cap": 0.9},
    "grid": {"r_min": 1e-4, "r_max": 1e4, "radial_per_decade": 160, "n_theta": 32, "n_phi": 64,
             "axis": "auto"},
    "strategy": "auto",
    "engine": "ray",
    "omega_switch": 5.0,
    "tolerances": {"rel_tol": 1e-9, "abs_tol": 0.0, "ray_rel_tol": 1e-13, "cross_check_fraction": 0.01,
                   "cross_check_tol": 1e-5, "fail_on_cross_check": true},
    "analysis": {"classify": true, "spectrum": true, "algebra_check": false,
                 "compare_representations": false},
    "diagnostics": {"uv_window": [10.0, 1000.0], "ir_window": [1e-4, 0.1], "theta_rel": 0.05,
                    "residual_ratio": 0.2, "min_points": 8},
    "spectrum": {"angular_omega": 1.0},
    "algebra": {"n_max": 80, "alphas": [[0.0, 0.0], [0.5, 0.0], [1.0, 0.5], [1.2, -1.4]], "seed": 20240611,
                "positivity_instances": 100},
    "compare": {"decades": [[0.1, 1.0], [1.0, 10.0], [10.0, 100.0]], "samples_per_decade": 20,
                "seed": 17, "threshold": 1e-4},
    "output": {"dir": "out", "amplitude_stride": "auto", "max_amplitude_rows": 200000},
    "threads": 0
  })");
}

namespace {

// Defaults, then user values. Objects merge key by key; the trajectory block is
// replaced wholesale since its keys depend on the builder.
void merge_into(json& base, const json& user, const std::string& path) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (key == "trajectory") {
      base[it.key()] = it.value();
    } else if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
      merge_into(base[it.key()], it.value(), key);
    } else {
      base[it.key()] = it.value();
    }
  }
}

template <class T>
T get(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ValidationError(fmt::format("{}: missing key '{}'", where, key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

double positive(const json& j, const char* key, const char* where) {
  const double v = get<double>(j, key, where);
  if (!(v > 0.0)) throw ValidationError(fmt::format("{}.{} must be positive", where, key));
  return v;
}

FitWindow window(const json& j, const char* key) {
  const auto w = get<std::vector<double>>(j, key, "diagnostics");
  if (w.size() != 2) throw ValidationError(fmt::format("diagnostics.{} must be [lo, hi]", key));
  return {w[0], w[1]};
}

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ValidationError("complex values are numbers or [re, im] pairs");
}

Trajectory apply_transform(Trajectory tr, const json& spec) {
  if (spec.contains("rotate")) {
    const json& r = spec["rotate"];
    const Vec3 axis = vec3_from_json(r.at("axis"), "trajectory.rotate.axis");
    if (axis.norm() == 0.0) throw ValidationError("trajectory.rotate.axis must be nonzero");
    const double angle = get<double>(r, "angle", "trajectory.rotate");
    tr = tr.rotated(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix());
  }
  if (spec.contains("translate")) tr = tr.translated(vec3_from_json(spec["translate"], "trajectory.translate"));
  if (spec.contains("time_shift")) tr = tr.time_shifted(get<double>(spec, "time_shift", "trajectory"));
  return tr;
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(fmt::format("override '{}' is not KEY=VALUE", assignment));
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError(fmt::format("override key '{}' has an empty component", key));
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) {
      throw ValidationError(fmt::format("override key '{}': '{}' is not an object", key, part));
    }
    node = &child;
    start = dot + 1;
  }
}

Trajectory build_trajectory(const json& spec) {
  if (!spec.is_object()) throw ValidationError("trajectory must be an object");
  const std::string builder = get<std::string>(spec, "builder", "trajectory");
  auto vec = [&](const char* key) {
    if (!spec.contains(key)) throw ValidationError(fmt::format("trajectory: missing key '{}'", key));
    return vec3_from_json(spec[key], key);
  };
  Trajectory tr = [&] {
    if (builder == "smooth_stop_start") {
      const double cap = spec.contains("v0_cap") ? get<double>(spec, "v0_cap", "trajectory") : 0.9;
      return build_smooth_stop_start(positive(spec, "duration", "trajectory"), vec("displacement"), cap);
    }
    if (builder == "kick") {
      return build_kick(vec("v_minus"), vec("v_plus"), positive(spec, "ramp", "trajectory"));
    }
    if (builder == "boost") {
      return build_boost(vec("v_in"), vec("v_out"), positive(spec, "duration", "trajectory"));
    }
    if (builder == "kink") return build_kink(vec("v_peak"), positive(spec, "duration", "trajectory"));
    if (builder == "constant") {
      const Vec3 anchor = spec.contains("anchor") ? vec("anchor") : Vec3::Zero();
      return Trajectory::constant_velocity(anchor, vec("velocity"));
    }
    if (builder == "inline") {
      if (!spec.contains("data")) throw ValidationError("inline trajectory needs a 'data' object");
      return trajectory_from_json(spec["data"]);
    }
    throw ValidationError(fmt::format(
        "unknown trajectory builder '{}' (smooth_stop_start, kick, boost, kink, constant, inline)", builder));
  }();
  return apply_transform(std::move(tr), spec);
}

RunConfig resolve_config(const json& user) {
  if (!user.is_object() && !user.is_null()) throw ValidationError("configuration must be a JSON object");
  json doc = default_config();
  if (user.is_object()) merge_into(doc, user, "");
  RunConfig cfg{doc};

  // Validate eagerly so that every command fails before doing any work.
  const Trajectory tr = build_trajectory(doc["trajectory"]);
  grid_spec(cfg, tr);
  emission_options(cfg);
  diagnostics_options(cfg);
  const json& alg = doc["algebra"];
  if (get<int>(alg, "n_max", "algebra") < 1) throw ValidationError("algebra.n_max must be >= 1");
  for (const auto& a : get<json>(alg, "alphas", "algebra")) complex_from_json(a);
  const json& cmp = doc["compare"];
  if (get<int>(cmp, "samples_per_decade", "compare") < 1) {
    throw ValidationError("compare.samples_per_decade must be >= 1");
  }
  positive(cmp, "threshold", "compare");
  for (const auto& d : get<json>(cmp, "decades", "compare")) {
    const auto w = d.get<std::vector<double>>();
    if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > w[0])) {
      throw ValidationError("compare.decades entries must be [lo, hi] with 0 < lo < hi");
    }
  }
  const json& stride = doc["output"]["amplitude_stride"];
  if (!(stride == "auto") && !(stride.is_number_integer() && stride.get<long>() >= 1)) {
    throw ValidationError("output.amplitude_stride must be 'auto' or a positive integer");
  }
  return cfg;
}

GridSpec grid_spec(const RunConfig& cfg, const Trajectory& tr) {
  const json& g = cfg.doc.at("grid");
  GridSpec s;
  s.r_min = positive(g, "r_min", "grid");
  s.r_max = positive(g, "r_max", "grid");
  if (!(s.r_max > s.r_min)) throw ValidationError("grid.r_max must exceed grid.r_min");
  s.radial_per_decade = get<int>(g, "radial_per_decade", "grid");
  s.n_theta = get<int>(g, "n_theta", "grid");
  s.n_phi = get<int>(g, "n_phi", "grid");
  if (s.radial_per_decade < 1 || s.n_theta < 1 || s.n_phi < 1) {
    throw ValidationError("grid node counts must be positive");
  }
  const json& axis = g.contains("axis") ? g["axis"] : json("auto");
  if (axis.is_string()) {
    if (axis != "auto") throw ValidationError("grid.axis must be 'auto' or a vector");
    s.axis = tr.motion_axis().value_or(Vec3::UnitZ());
  } else {
    s.axis = vec3_from_json(axis, "grid.axis");
    if (s.axis.norm() == 0.0) throw ValidationError("grid.axis must be nonzero");
    s.axis.normalize();
  }
  return s;
}

EmissionOptions emission_options(const RunConfig& cfg) {
  const json& d = cfg.doc;
  EmissionOptions o;
  o.strategy = strategy_from_string(get<std::string>(d, "strategy", "config"));
  o.engine = engine_from_string(get<std::string>(d, "engine", "config"));
  o.omega_switch = positive(d, "omega_switch", "config");
  const json& t = d.at("tolerances");
  o.osc.rel_tol = positive(t, "rel_tol", "tolerances");
  o.osc.abs_tol = get<double>(t, "abs_tol", "tolerances");
  o.ray.rel_tol = positive(t, "ray_rel_tol", "tolerances");
  if (o.osc.abs_tol < 0.0) throw ValidationError("tolerances.abs_tol must be >= 0");
  o.cross_check_fraction = get<double>(t, "cross_check_fraction", "tolerances");
  if (!(o.cross_check_fraction >= 0.0 && o.cross_check_fraction <= 1.0)) {
    throw ValidationError("tolerances.cross_check_fraction must lie in [0, 1]");
  }
  if (o.cross_check_fraction == 0.0) o.cross_check_omega_hi = -1.0;
  o.cross_check_tol = positive(t, "cross_check_tol", "tolerances");
  o.threads = get<int>(d, "threads", "config");
  if (o.threads < 0) throw ValidationError("threads must be >= 0");
  return o;
}

DiagnosticsOptions diagnostics_options(const RunConfig& cfg) {
  const json& d = cfg.doc.at("diagnostics");
  DiagnosticsOptions o;
  o.uv = window(d, "uv_window");
  o.ir = window(d, "ir_window");
  o.theta_rel = positive(d, "theta_rel", "diagnostics");
  o.residual_ratio = positive(d, "residual_ratio", "diagnostics");
  const int mp = get<int>(d, "min_points", "diagnostics");
  if (mp < 2) throw ValidationError("diagnostics.min_points must be >= 2");
  o.min_points = static_cast<std::size_t>(mp);
  return o;
}

bool RepresentationComparison::passed() const {
  for (const auto& r : rows) {
    if (!(r.max_gap <= threshold)) return false;
  }
  return true;
}

json RepresentationComparison::to_json() const {
  json j;
  j["representations"] = representations;
  j["threshold"] = threshold;
  j["passed"] = passed();
  j["decades"] = json::array();
  for (const auto& r : rows) {
    j["decades"].push_back(
        {{"omega_lo", r.omega_lo}, {"omega_hi", r.omega_hi}, {"samples", r.samples}, {"max_gap", r.max_gap}});
  }
  return j;
}

RepresentationComparison compare_representations(const Trajectory& tr, const json& c, const OscOptions& osc) {
  RepresentationComparison out;
  for (Representation r : {Representation::Direct, Representation::Ibp1, Representation::Ibp2}) {
    if (applicable(tr, r)) out.representations.push_back(to_string(r));
  }
  if (out.representations.size() < 2) {
    throw RepresentationError(fmt::format("trajectory admits only {}; nothing to compare",
                                          out.representations.empty() ? "no representation"
                                                                      : out.representations[0]));
  }
  out.threshold = get<double>(c, "threshold", "compare");
  const int n = get<int>(c, "samples_per_decade", "compare");
  std::mt19937_64 rng(get<std::uint64_t>(c, "seed", "compare"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (const auto& d : c.at("decades")) {
    const double lo = d[0].get<double>(), hi = d[1].get<double>();
    GapRow row{lo, hi, 0, 0.0};
    for (int k = 0; k < n; ++k) {
      const double omega = lo * std::pow(hi / lo, unit(rng));
      const double z = 2.0 * unit(rng) - 1.0;
      const double phi = 2.0 * pi * unit(rng);
      const double s = std::sqrt(1.0 - z * z);
      const Vec3 p = omega * Vec3(s * std::cos(phi), s * std::sin(phi), z);
      std::vector<CVec3> vals;
      for (const auto& name : out.representations) {
        const Representation r = name == "direct" ? Representation::Direct
                                 : name == "ibp1" ? Representation::Ibp1
                                                  : Representation::Ibp2;
        vals.push_back(amplitude(tr, p, r, osc).value);
      }
      for (std::size_t a = 0; a < vals.size(); ++a) {
        for (std::size_t b = a + 1; b < vals.size(); ++b) {
          row.max_gap = std::max(row.max_gap, relative_gap(vals[a], vals[b]));
        }
      }
      ++row.samples;
    }
    out.rows.push_back(row);
  }
  return out;
}

RepresentationComparison compare_representations(const RunConfig& cfg) {
  return compare_representations(build_trajectory(cfg.doc.at("trajectory")), cfg.doc.at("compare"),
                                 emission_options(cfg).osc);
}

namespace {

cplx random_complex(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(radius * std::sqrt(u(rng)), 2.0 * pi * u(rng));
}

}  // namespace

std::vector<AlgebraCheck> algebra_suite(cplx alpha, int n_max, std::uint64_t seed, int positivity_instances) {
  std::vector<AlgebraCheck> out;
  auto record = [&](std::string name, double value, double tol) {
    out.push_back({std::move(name), value, tol, value <= tol});
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 5);
  const int bulk = std::min(n_max, 20);

  double weyl = 0.0, vac = 0.0;
  for (int k = 0; k < 10; ++k) {
    const cplx h1 = random_complex(rng, 1.0), h2 = random_complex(rng, 1.0);
    const CMat lhs = weyl_matrix(h1, n_max).m * weyl_matrix(h2, n_max).m;
    const CMat rhs = std::exp(-0.5 * I * std::imag(std::conj(h1) * h2)) * weyl_matrix(h1 + h2, n_max).m;
    weyl = std::max(weyl, (lhs - rhs).leftCols(bulk + 1).colwise().norm().maxCoeff());
    vac = std::max(vac, std::abs(weyl_matrix(h1, n_max).m(0, 0) - std::exp(-0.25 * std::norm(h1))));
  }
  record("weyl_relation_defect", weyl, 1e-7);
  record("vacuum_weyl_expectation", vac, 1e-8);

  const TruncatedFockState omega_a = coherent_state(alpha, n_max);
  const CVec resid = annihilation(n_max).m * omega_a.c - alpha * omega_a.c;
  record("coherent_eigenvalue_residual", resid.norm(), 1e-8);

  const CVec s_inv_vac = s_operator(alpha, n_max).m.adjoint().col(0);
  record("s_inverse_vacuum_distance", (s_inv_vac - omega_a.c).norm(), 1e-7);

  double scatter = 0.0;
  for (int m = 0; m <= 6; ++m) {
    for (int n = 0; n <= 6; ++n) scatter = std::max(scatter, scattering_amplitude(m, n, alpha, n_max).discrepancy());
  }
  record("scattering_rewriting", scatter, 1e-8);

  double worst = 0.0;
  for (int inst = 0; inst < positivity_instances; ++inst) {
    const int terms = count(rng);
    const int dim = 3;
    Eigen::MatrixXcd h(dim, terms);
    for (int a = 0; a < terms; ++a) {
      for (int d = 0; d < dim; ++d) h(d, a) = random_complex(rng, 1.5);
    }
    Eigen::VectorXcd J(dim);
    for (int d = 0; d < dim; ++d) J(d) = random_complex(rng, 2.0);
    std::vector<cplx> L(terms), c(terms);
    for (int a = 0; a < terms; ++a) {
      L[a] = J.dot(h.col(a));
      c[a] = random_complex(rng, 1.0);
    }
    const double v = coherent_positivity_check(L, c, h.adjoint() * h);
    worst = std::max(worst, -v);
  }
  record("coherent_positivity_violation", worst, 1e-10);
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path);
  if (!os) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  body(os);
  if (!os) throw Error(fmt::format("failed writing '{}'", path.string()));
}

json algebra_report(const RunConfig& cfg, std::optional<double> mode_alpha, bool& all_passed) {
  const json& alg = cfg.doc.at("algebra");
  const int n_max = alg.at("n_max").get<int>();
  const auto seed = alg.at("seed").get<std::uint64_t>();
  const int instances = alg.at("positivity_instances").get<int>();
  std::vector<cplx> alphas;
  for (const auto& a : alg.at("alphas")) alphas.push_back(complex_from_json(a));
  if (mode_alpha) alphas.insert(alphas.begin(), cplx(*mode_alpha, 0.0));

  json out = json::array();
  for (const cplx a : alphas) {
    json entry{{"alpha", {a.real(), a.imag()}}, {"n_max", n_max}};
    try {
      json checks = json::array();
      for (const auto& c : algebra_suite(a, n_max, seed, instances)) {
        checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
        all_passed = all_passed && c.passed;
      }
      entry["checks"] = checks;
    } catch (const CutoffError& e) {
      entry["refused"] = e.what();
      all_passed = false;
    }
    out.push_back(entry);
  }
  return out;
}

std::size_t amplitude_stride(const RunConfig& cfg, std::size_t n) {
  const json& o = cfg.doc.at("output");
  if (o.at("amplitude_stride").is_number_integer()) return o["amplitude_stride"].get<std::size_t>();
  const auto rows = std::max<std::size_t>(1, o.at("max_amplitude_rows").get<std::size_t>());
  return std::max<std::size_t>(1, (n + rows - 1) / rows);
}

}  // namespace

RunOutcome run(const RunConfig& cfg, Command cmd, bool write_files) {
  RunOutcome out;
  json& rep = out.report;
  rep["config"] = cfg.doc;
  const std::filesystem::path dir = cfg.doc.at("output").at("dir").get<std::string>();
  if (write_files) std::filesystem::create_directories(dir);
  auto finish = [&] {
    if (write_files) write_file(dir / "report.json", [&](std::ostream& os) { os << rep.dump(2) << '\n'; });
  };

  const json& analysis = cfg.doc.at("analysis");
  if (cmd == Command::AlgebraCheck) {
    rep["command"] = "algebra-check";
    bool ok = true;
    rep["algebra"] = algebra_report(cfg, std::nullopt, ok);
    rep["algebra_passed"] = ok;
    out.exit_code = ok ? 0 : 2;
    finish();
    return out;
  }

  const Trajectory tr = build_trajectory(cfg.doc.at("trajectory"));
  rep["trajectory"] = {{"hash", trajectory_hash(tr)}, {"data", trajectory_to_json(tr)}};

  if (cmd == Command::CompareRepresentations) {
    rep["command"] = "compare-representations";
    const auto cmp = compare_representations(cfg);
    rep["compare_representations"] = cmp.to_json();
    out.exit_code = cmp.passed() ? 0 : 2;
    if (write_files) {
      write_file(dir / "representation_gaps.csv", [&](std::ostream& os) {
        os << "omega_lo,omega_hi,samples,max_gap\n";
        for (const auto& r : cmp.rows) {
          os << fmt::format("{:.17g},{:.17g},{},{:.17g}\n", r.omega_lo, r.omega_hi, r.samples, r.max_gap);
        }
      });
    }
    finish();
    return out;
  }

  rep["command"] = cmd == Command::Run ? "run" : cmd == Command::Classify ? "classify" : "emit-spectrum";
  const EmissionOptions eopt = emission_options(cfg);
  const auto grid = SphericalGrid::make(grid_spec(cfg, tr));
  rep["grid"] = grid_metadata(*grid);
  const EmissionAmplitude amp = compute_amplitude(tr, grid, eopt);
  rep["emission"] = amp.metadata();

  const bool want_spectrum = cmd != Command::Run || analysis.at("spectrum").get<bool>();
  if (write_files) {
    write_file(dir / "amplitude.csv",
               [&](std::ostream& os) { amp.write_csv(os, amplitude_stride(cfg, grid->size())); });
    if (want_spectrum) {
      const Spectrum s = spectrum(amp, cfg.doc.at("spectrum").at("angular_omega").get<double>());
      write_file(dir / "spectrum.csv", [&](std::ostream& os) { s.write_csv(os); });
      write_file(dir / "spectrum_angular.csv", [&](std::ostream& os) { s.write_angular_csv(os); });
    }
  }

  const bool fail_on_check = cfg.doc.at("tolerances").at("fail_on_cross_check").get<bool>();
  if (fail_on_check && !amp.cross_checks_passed()) {
    rep["error"] = "cross-representation check exceeded tolerance";
    out.exit_code = 2;
  }

  const bool want_classify =
      cmd == Command::Classify || (cmd == Command::Run && analysis.at("classify").get<bool>());
  std::optional<double> mode_alpha;
  if (want_classify) {
    try {
      const DivergenceReport dr = classify(amp, diagnostics_options(cfg));
      rep["classification"] = dr.to_json();
      try {
        mode_alpha = mode_reduce(amp, dr);
        rep["alpha"] = *mode_alpha;
      } catch (const NonFockError& e) {
        rep["alpha"] = nullptr;
        rep["alpha_status"] = std::string("refused: ") + e.what();
      }
    } catch (const InconclusiveError& e) {
      rep["classification"] = e.report().to_json();
      rep["error"] = e.what();
      out.exit_code = 3;
      finish();
      return out;
    }
  }

  if (cmd == Command::Run && analysis.at("algebra_check").get<bool>()) {
    bool ok = true;
    rep["algebra"] = algebra_report(cfg, mode_alpha, ok);
    rep["algebra_passed"] = ok;
    if (!ok && out.exit_code == 0) out.exit_code = 2;
  }
  if (cmd == Command::Run && analysis.at("compare_representations").get<bool>()) {
    const auto cmp = compare_representations(cfg);
    rep["compare_representations"] = cmp.to_json();
    if (!cmp.passed() && out.exit_code == 0) out.exit_code = 2;
  }
  finish();
  return out;
}

}  // namespace qrad
