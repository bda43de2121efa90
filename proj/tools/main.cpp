#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "phaselab/config.hpp"
#include "phaselab/experiments.hpp"
#include "phaselab/format.hpp"
#include "phaselab/quadrature.hpp"

using namespace phaselab;

namespace {

// Exit codes: 0 all checks passed, 1 a check failed, 2 bad input,
// 3 numerical compliance failure.
int run(const std::string& path, const std::vector<std::string>& sets, std::string out) {
  ExperimentConfig cfg = ExperimentConfig::load(path);
  for (const auto& s : sets) cfg.apply_override(s);
  for (const auto& d : cfg.diagnostics()) std::cerr << d.to_string() << "\n";
  if (out.empty()) {
    const char* env = std::getenv("PHASELAB_OUTPUT_DIR");
    out = env && *env ? env : "phaselab-out";
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_experiment(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto manifest = make_manifest(cfg, result, wall);
  const auto files = write_outputs(out, cfg, result, manifest);

  std::cout << result.experiment << "  config fnv1a64:" << manifest.config_hash << "  seed "
            << manifest.seed << "\n";
  for (const auto& [k, v] : result.summary.items())
    std::cout << "  " << k << " = " << (v.is_number_float() ? format_number(v.get<double>()) : v.dump())
              << "\n";
  for (const auto& c : result.checks)
    std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": " << c.detail << "\n";
  for (const auto& f : files) std::cout << "  wrote " << f.string() << "\n";
  std::cout << "  wall time " << wall << " s\n";
  return result.passed() ? 0 : 1;
}

int validate(const std::string& path) {
  Json doc;
  try {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot open " << path << "\n";
      return 2;
    }
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    std::cerr << "error: " << path << " is not valid JSON: " << e.what() << "\n";
    return 2;
  }
  const auto diags = validate_config(doc);
  for (const auto& d : diags) std::cout << d.to_string() << "\n";
  if (diags.empty()) std::cout << "ok\n";
  return has_errors(diags) ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: wave-packet coarse graining and phase-space statistics experiments"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string run_path, out;
  std::vector<std::string> sets;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  run_cmd->add_option("config", run_path, "JSON config")->required();
  run_cmd->add_option("--set", sets, "Override one key, e.g. --set decoherence.samples=1000");
  run_cmd->add_option("--out", out, "Output directory (default $PHASELAB_OUTPUT_DIR or ./phaselab-out)");

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Check a config file and print diagnostics");
  val_cmd->add_option("config", validate_path, "JSON config")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(run_path, sets, out);
    return validate(validate_path);
  } catch (const ComplianceError& e) {
    std::cerr << "compliance check '" << e.check() << "' failed: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
