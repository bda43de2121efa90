#pragma once

// Experiment configuration: one JSON document per run. Every key has a
// default; the resolved document (defaults merged with the file and any
// --set overrides) is what the experiments read and what the outputs echo.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace phaselab {

using Json = nlohmann::ordered_json;

struct Diagnostic {
  enum class Level { error, warning };
  Level level = Level::error;
  std::string field;  // dotted key, empty for whole-document problems
  std::string message;

  std::string to_string() const;
};

/// Names accepted for the "experiment" key.
const std::vector<std::string>& experiment_names();

/// The complete default document.
const Json& default_config();

/// Schema check (unknown keys, types, enums, ranges) plus physics lint.
/// Works on partial documents: missing keys take their defaults.
std::vector<Diagnostic> validate_config(const Json& doc);

bool has_errors(const std::vector<Diagnostic>& diags);

class ExperimentConfig {
 public:
  /// Throws std::invalid_argument listing every error diagnostic.
  static ExperimentConfig from_json(const Json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// "a.b=value"; value is parsed as JSON, falling back to a plain string.
  /// The key must exist in the defaults. Re-validates the document.
  void apply_override(const std::string& assignment);

  const Json& resolved() const noexcept { return resolved_; }
  const std::vector<std::string>& overrides() const noexcept { return overrides_; }
  std::vector<Diagnostic> diagnostics() const { return validate_config(resolved_); }

  std::string experiment() const;
  std::uint64_t seed() const;

  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// FNV-1a 64 of the compact dump of the resolved document, as 16 hex digits.
  std::string hash() const;

 private:
  Json resolved_;
  std::vector<std::string> overrides_;
  const Json& at(const std::string& key) const;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes) noexcept;

}  // namespace phaselab
