#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "phaselab/config.hpp"

using namespace phaselab;

namespace {

bool mentions(const std::vector<Diagnostic>& ds, Diagnostic::Level level, const std::string& field,
              const std::string& text = "") {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) {
    return d.level == level && d.field == field && d.message.find(text) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("complete default config gives no diagnostics") {
  CHECK(validate_config(default_config()).empty());
  CHECK(validate_config(Json::object()).empty());
  for (const auto& name : experiment_names()) CHECK(validate_config(Json{{"experiment", name}}).empty());
}

TEST_CASE("unknown keys are errors naming the key") {
  auto ds = validate_config(Json::parse(R"({"lattice": {"dq": 10, "dz": 3}})"));
  CHECK(has_errors(ds));
  CHECK(mentions(ds, Diagnostic::Level::error, "lattice.dz", "unknown"));
  ds = validate_config(Json::parse(R"({"colour": "blue"})"));
  CHECK(mentions(ds, Diagnostic::Level::error, "colour", "unknown"));
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json::parse(R"({"colour": 1})")), std::invalid_argument);
}

TEST_CASE("type, enum and range errors") {
  CHECK(mentions(validate_config(Json{{"experiment", "teleport"}}), Diagnostic::Level::error,
                 "experiment"));
  CHECK(mentions(validate_config(Json::parse(R"({"packet": {"xi": "wide"}})")),
                 Diagnostic::Level::error, "packet.xi"));
  CHECK(mentions(validate_config(Json::parse(R"({"packet": {"xi": -1}})")), Diagnostic::Level::error,
                 "packet.xi"));
  CHECK(mentions(validate_config(Json::parse(R"({"lattice": 3})")), Diagnostic::Level::error,
                 "lattice"));
  CHECK(has_errors(validate_config(Json::array())));
}

TEST_CASE("dq = xi warns about the delta regime") {
  const auto ds = validate_config(Json::parse(R"({"lattice": {"dq": 1.0}})"));
  CHECK_FALSE(has_errors(ds));
  CHECK(mentions(ds, Diagnostic::Level::warning, "lattice.dq", "dq >> 2 xi"));
  const auto dp = validate_config(Json::parse(R"({"lattice": {"dp": 0.5}})"));
  CHECK(mentions(dp, Diagnostic::Level::warning, "lattice.dp", "dp >> hbar/xi"));
}

TEST_CASE("file values merge over defaults") {
  const auto cfg = ExperimentConfig::from_json(Json::parse(R"({"experiment": "decohere", "seed": 7,
      "decoherence": {"samples": 50000}})"));
  CHECK(cfg.experiment() == "decohere");
  CHECK(cfg.seed() == 7);
  CHECK(cfg.integer("decoherence.samples") == 50000);
  CHECK(cfg.number("decoherence.reservoir_scale") == 64.0);
  CHECK(cfg.resolved().at("packet").at("xi") == 1.0);
}

TEST_CASE("overrides are applied and recorded") {
  auto cfg = ExperimentConfig::from_json(Json::object());
  const auto before = cfg.hash();
  cfg.apply_override("packet.xi=2");
  cfg.apply_override("phasespace.potential=harmonic");
  CHECK(cfg.number("packet.xi") == 2.0);
  CHECK(cfg.text("phasespace.potential") == "harmonic");
  CHECK(cfg.overrides() == std::vector<std::string>{"packet.xi=2", "phasespace.potential=\"harmonic\""});
  CHECK(cfg.hash() != before);
  CHECK_THROWS_AS(cfg.apply_override("packet.width=2"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("packet=2"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("packet.xi"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("packet.xi=-3"), std::invalid_argument);
  CHECK(cfg.number("packet.xi") == 2.0);
}

TEST_CASE("hash is fnv1a64 of the resolved document") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  const auto a = ExperimentConfig::from_json(Json::object());
  const auto b = ExperimentConfig::from_json(default_config());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a64(a.resolved().dump()));
  CHECK(a.hash() == std::string(buf));
}
