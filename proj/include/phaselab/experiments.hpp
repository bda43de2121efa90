#pragma once

// Experiment pipelines behind the command-line tool. Each run returns plain
// tables plus named checks; writing them out is separate so that the same
// result can go to CSV and JSON.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaselab/config.hpp"
#include "phaselab/phase_grid.hpp"

namespace phaselab {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<Check> checks;
  Json summary = Json::object();

  bool passed() const;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  double wall_seconds = 0.0;  // reported on the console only
  std::vector<std::string> overrides;
  std::vector<Check> checks;
};

std::string tool_version();

struct RandomSuperposition {
  std::vector<WavePacket> packets;
  std::vector<complex> amplitudes;  // unit l2 norm
};

/// `count` packets with labels uniform in the given ranges and complex
/// Gaussian amplitudes, reproducible from `seed` on every platform.
RandomSuperposition random_superposition(std::uint64_t seed, int count, double xi, double hbar,
                                         Range q_range, Range p_range);

/// Upper bound on sum |c|^2 / ||psi||^2 for projection onto a lattice with
/// these spacings (Gershgorin bound on the lattice Gram matrix).
double frame_bound(double xi, double hbar, double dq, double dp);

/// Throws std::invalid_argument on bad configuration and ComplianceError on
/// failed numerical checks inside the pipelines.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

RunManifest make_manifest(const ExperimentConfig& cfg, const ExperimentResult& result,
                          double wall_seconds);

/// Table as CSV with '#' header lines carrying the manifest and resolved
/// configuration.
void write_table_csv(std::ostream& os, const Table& table, const ExperimentConfig& cfg,
                     const ExperimentResult& result, const RunManifest& manifest);

Json result_json(const ExperimentConfig& cfg, const ExperimentResult& result,
                 const RunManifest& manifest);

/// Writes <experiment>.<table>.csv files (format csv) and <experiment>.json.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir,
                                                 const ExperimentConfig& cfg,
                                                 const ExperimentResult& result,
                                                 const RunManifest& manifest);

}  // namespace phaselab
