// qrad: emission spectrum, Fock/non-Fock classification and algebra checks for a
// classical point charge on a prescribed trajectory.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qrad/diagnostics.hpp"
#include "qrad/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  bool serial = false;
  std::vector<std::string> overrides;
};

nlohmann::json load(const Options& o) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw qrad::ValidationError("cannot read config '" + o.config + "'");
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw qrad::ValidationError("config '" + o.config + "': " + e.what());
    }
  }
  for (const auto& s : o.overrides) qrad::apply_override(doc, s);
  if (!o.out.empty()) qrad::apply_override(doc, "output.dir=" + nlohmann::json(o.out).dump());
  if (o.serial) qrad::apply_override(doc, "threads=1");
  return doc;
}

int execute(const Options& o, qrad::Command cmd) {
  try {
    const qrad::RunConfig cfg = qrad::resolve_config(load(o));
    const auto res = qrad::run(cfg, cmd);
    const auto& r = res.report;
    if (r.contains("classification")) {
      std::cout << "classification: " << r["classification"]["classification"].get<std::string>() << '\n';
      if (r["classification"]["photon_number"].is_number()) {
        std::cout << "photon_number: " << r["classification"]["photon_number"].get<double>() << '\n';
      }
    }
    if (r.contains("compare_representations")) {
      for (const auto& d : r["compare_representations"]["decades"]) {
        std::cout << "omega [" << d["omega_lo"] << ", " << d["omega_hi"] << "): max gap " << d["max_gap"] << '\n';
      }
    }
    if (r.contains("algebra_passed")) std::cout << "algebra checks passed: " << r["algebra_passed"] << '\n';
    if (r.contains("error")) std::cerr << "error: " << r["error"].get<std::string>() << '\n';
    std::cout << "report: " << cfg.doc["output"]["dir"].get<std::string>() << "/report.json\n";
    return res.exit_code;
  } catch (const qrad::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const qrad::AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << '\n';
    return 2;
  } catch (const qrad::InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum radiation from a classical point charge"};
  app.require_subcommand(1);
  Options opt;

  const std::pair<const char*, qrad::Command> commands[] = {
      {"run", qrad::Command::Run},
      {"emit-spectrum", qrad::Command::EmitSpectrum},
      {"classify", qrad::Command::Classify},
      {"algebra-check", qrad::Command::AlgebraCheck},
      {"compare-representations", qrad::Command::CompareRepresentations},
  };
  const char* help[] = {
      "emission, then the analyses enabled in the config",
      "compute J(p) on the grid and write amplitude and spectrum CSVs",
      "compute J(p) and classify the out-state",
      "truncated Fock-space identity checks",
      "per-decade gaps between the applicable representations of J(p)",
  };
  qrad::Command chosen = qrad::Command::Run;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_flag("--serial", opt.serial, "single-threaded, bit-reproducible evaluation");
    sub->add_option("--set", opt.overrides, "KEY=VALUE override (dotted key, JSON value)");
    sub->callback([&chosen, c = commands[i].second] { chosen = c; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return execute(opt, chosen);
}
