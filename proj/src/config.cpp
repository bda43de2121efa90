#include "phaselab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phaselab/phase_grid.hpp"

namespace phaselab {

namespace {

Json build_defaults() {
  Json d;
  d["experiment"] = "overlap-matrix";
  d["seed"] = 1;
  d["output"] = {{"format", "csv"}};
  d["packet"] = {{"xi", 1.0}, {"hbar", 1.0}};
  d["lattice"] = {{"dq", 10.0}, {"dp", 10.0}, {"q_min", 0.0},
                  {"q_max", 40.0}, {"p_min", -20.0}, {"p_max", 20.0}};
  d["state"] = {{"packets", 10}, {"q_min", 0.0}, {"q_max", 60.0}, {"p_min", -8.0}, {"p_max", 8.0}};
  d["observable"] = {{"p", {0.0, 0.0, 1.0}}, {"q", {0.0, 0.0, 1.0}}};
  d["sweep"] = {{"ratios", {2.0, 4.0, 6.0, 8.0, 10.0}}};
  d["decoherence"] = {{"energies", {0.0, 1.0}},
                      {"degeneracies", {2, 2}},
                      {"temperature", 1.0 / std::log(2.0)},
                      {"reservoir_scale", 64.0},
                      {"operator", "tridiagonal"},
                      {"diagonal", {0.0, 1.0}},
                      {"coupling", {0.3, 0.4}},
                      {"samples", 10000},
                      {"checkpoints", {100, 1000, 10000}}};
  d["phasespace"] = {{"L", 7.5},         {"m", 1.0},       {"hbar", 1.0},
                     {"beta", 1.0},      {"z", 1.0},       {"n_max", 3},
                     {"potential", "none"}, {"omega", 2.0}, {"grid_points", 256}};
  d["commutation"] = {{"j_max", 4}, {"q_samples", 8}};
  d["limits"] = {{"betas", {0.01, 0.0177827941, 0.0316227766, 0.0562341325, 0.1}},
                 {"grid_points", 512}};
  return d;
}

// Dotted key path -> JSON pointer.
Json::json_pointer pointer(const std::string& key) {
  std::string p;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return Json::json_pointer(p);
}

void push(std::vector<Diagnostic>& out, Diagnostic::Level level, std::string field,
          std::string msg) {
  out.push_back({level, std::move(field), std::move(msg)});
}

bool is_integer(const Json& v) {
  if (v.is_number_integer()) return true;
  return v.is_number_float() && std::isfinite(v.get<double>()) &&
         v.get<double>() == std::floor(v.get<double>());
}

// Compares the user document against the defaults: unknown keys and type
// mismatches.
void check_shape(const Json& doc, const Json& def, const std::string& prefix,
                 std::vector<Diagnostic>& out) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!def.contains(it.key())) {
      push(out, Diagnostic::Level::error, key, "unknown key");
      continue;
    }
    const Json& want = def.at(it.key());
    const Json& got = it.value();
    if (want.is_object()) {
      if (!got.is_object())
        push(out, Diagnostic::Level::error, key, "expected an object");
      else
        check_shape(got, want, key, out);
    } else if (want.is_array()) {
      if (!got.is_array()) {
        push(out, Diagnostic::Level::error, key, "expected an array of numbers");
        continue;
      }
      const bool ints = !want.empty() && want.front().is_number_integer();
      for (const auto& e : got)
        if (!e.is_number() || (ints && !is_integer(e))) {
          push(out, Diagnostic::Level::error, key,
               ints ? "expected an array of integers" : "expected an array of numbers");
          break;
        }
    } else if (want.is_string()) {
      if (!got.is_string()) push(out, Diagnostic::Level::error, key, "expected a string");
    } else if (want.is_number_integer()) {
      if (!got.is_number() || !is_integer(got))
        push(out, Diagnostic::Level::error, key, "expected an integer");
    } else if (want.is_number()) {
      if (!got.is_number() || !std::isfinite(got.get<double>()))
        push(out, Diagnostic::Level::error, key, "expected a finite number");
    }
  }
}

void merge_into(Json& base, const Json& doc) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

Json merged(const Json& doc) {
  Json r = default_config();
  merge_into(r, doc);
  return r;
}

void lint(const Json& r, std::vector<Diagnostic>& out) {
  using L = Diagnostic::Level;
  auto num = [&](const char* k) { return r.at(pointer(k)).get<double>(); };
  auto positive = [&](const char* k) {
    if (!(num(k) > 0.0)) push(out, L::error, k, "must be > 0");
  };
  for (const char* k : {"packet.xi", "packet.hbar", "lattice.dq", "lattice.dp", "decoherence.temperature",
                        "decoherence.reservoir_scale", "phasespace.L", "phasespace.m",
                        "phasespace.hbar", "phasespace.beta", "phasespace.omega"})
    positive(k);
  if (num("phasespace.z") < 0.0) push(out, L::error, "phasespace.z", "must be >= 0");
  if (num("lattice.q_max") < num("lattice.q_min"))
    push(out, L::error, "lattice.q_max", "must be >= lattice.q_min");
  if (num("lattice.p_max") < num("lattice.p_min"))
    push(out, L::error, "lattice.p_max", "must be >= lattice.p_min");
  if (num("state.q_max") < num("state.q_min"))
    push(out, L::error, "state.q_max", "must be >= state.q_min");
  if (num("state.p_max") < num("state.p_min"))
    push(out, L::error, "state.p_max", "must be >= state.p_min");
  if (r.at(pointer("state.packets")).get<long long>() < 1)
    push(out, L::error, "state.packets", "must be >= 1");
  if (r.at("seed").get<long long>() < 0) push(out, L::error, "seed", "must be >= 0");

  const std::string exp = r.at("experiment").get<std::string>();
  bool known = false;
  for (const auto& n : experiment_names()) known = known || n == exp;
  if (!known) push(out, L::error, "experiment", "unknown experiment '" + exp + "'");
  const std::string fmt = r.at(pointer("output.format")).get<std::string>();
  if (fmt != "csv" && fmt != "json") push(out, L::error, "output.format", "must be csv or json");
  const std::string op = r.at(pointer("decoherence.operator")).get<std::string>();
  if (op != "energy" && op != "identity" && op != "tridiagonal")
    push(out, L::error, "decoherence.operator", "must be energy, identity or tridiagonal");
  const std::string pot = r.at(pointer("phasespace.potential")).get<std::string>();
  if (pot != "none" && pot != "harmonic")
    push(out, L::error, "phasespace.potential", "must be none or harmonic");

  const auto& en = r.at(pointer("decoherence.energies"));
  const auto& dg = r.at(pointer("decoherence.degeneracies"));
  if (en.empty()) push(out, L::error, "decoherence.energies", "needs at least one level");
  if (dg.size() != en.size())
    push(out, L::error, "decoherence.degeneracies", "must have one entry per energy");
  for (const auto& g : dg)
    if (g.get<long long>() < 1) push(out, L::error, "decoherence.degeneracies", "entries must be >= 1");
  if (op == "tridiagonal" && r.at(pointer("decoherence.diagonal")).size() != en.size())
    push(out, L::error, "decoherence.diagonal", "must have one entry per energy");
  if (r.at(pointer("decoherence.coupling")).size() != 2)
    push(out, L::error, "decoherence.coupling", "must be [re, im]");
  if (r.at(pointer("decoherence.samples")).get<long long>() < 2)
    push(out, L::error, "decoherence.samples", "must be >= 2");
  long long prev = 0;
  for (const auto& c : r.at(pointer("decoherence.checkpoints"))) {
    const long long v = c.get<long long>();
    if (v <= prev || v > r.at(pointer("decoherence.samples")).get<long long>()) {
      push(out, L::error, "decoherence.checkpoints",
           "must be ascending, positive and not beyond decoherence.samples");
      break;
    }
    prev = v;
  }
  const long long n_max = r.at(pointer("phasespace.n_max")).get<long long>();
  if (n_max < 0 || n_max > 8) push(out, L::error, "phasespace.n_max", "must be in [0, 8]");
  else if (n_max > 4)
    push(out, L::warning, "phasespace.n_max", "above 4 the permutation sums grow quickly");
  for (const char* k : {"phasespace.grid_points", "limits.grid_points"}) {
    const long long g = r.at(pointer(k)).get<long long>();
    if (g < 8 || g % 2 != 0) push(out, L::error, k, "must be even and >= 8");
  }
  if (r.at(pointer("commutation.j_max")).get<long long>() < 0)
    push(out, L::error, "commutation.j_max", "must be >= 0");
  if (r.at(pointer("commutation.q_samples")).get<long long>() < 1)
    push(out, L::error, "commutation.q_samples", "must be >= 1");
  prev = 0;
  double last = 0.0;
  for (const auto& b : r.at(pointer("limits.betas"))) {
    if (!(b.get<double>() > last)) {
      push(out, L::error, "limits.betas", "must be positive and ascending");
      break;
    }
    last = b.get<double>();
  }
  if (r.at(pointer("limits.betas")).size() < 2)
    push(out, L::error, "limits.betas", "needs at least two values for a slope");
  last = 0.0;
  for (const auto& b : r.at(pointer("sweep.ratios"))) {
    if (!(b.get<double>() > last)) {
      push(out, L::error, "sweep.ratios", "must be positive and ascending");
      break;
    }
    last = b.get<double>();
  }
  if (has_errors(out)) return;

  // Physics lint.
  const double xi = num("packet.xi"), hbar = num("packet.hbar");
  const PhaseGrid grid(xi, hbar, num("lattice.dq"), num("lattice.dp"),
                       {num("lattice.q_min"), num("lattice.q_max")},
                       {num("lattice.p_min"), num("lattice.p_max")});
  for (const auto& w : grid.diagnostics())
    push(out, L::warning, w.rfind("dq", 0) == 0 ? "lattice.dq" : "lattice.dp", w);
}

}  // namespace

std::string Diagnostic::to_string() const {
  std::string s = level == Level::error ? "error" : "warning";
  if (!field.empty()) s += " [" + field + "]";
  return s + ": " + message;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"overlap-matrix", "project",  "expectation-sweep",
                                              "decohere",       "wavespace", "phasespace",
                                              "commutation",    "limits"};
  return names;
}

const Json& default_config() {
  static const Json d = build_defaults();
  return d;
}

std::vector<Diagnostic> validate_config(const Json& doc) {
  std::vector<Diagnostic> out;
  if (!doc.is_object()) {
    push(out, Diagnostic::Level::error, "", "configuration must be a JSON object");
    return out;
  }
  check_shape(doc, default_config(), "", out);
  if (has_errors(out)) return out;
  lint(merged(doc), out);
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.level == Diagnostic::Level::error) return true;
  return false;
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  const auto diags = validate_config(doc);
  if (has_errors(diags)) {
    std::string msg = "invalid configuration:";
    for (const auto& d : diags)
      if (d.level == Diagnostic::Level::error) msg += "\n  " + d.to_string();
    throw std::invalid_argument(msg);
  }
  ExperimentConfig c;
  c.resolved_ = merged(doc);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open configuration " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  if (!default_config().contains(pointer(key)) || default_config().at(pointer(key)).is_object())
    throw std::invalid_argument("override names unknown key '" + key + "'");
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  if (default_config().at(pointer(key)).is_string() && !value.is_string()) value = raw;
  Json doc = resolved_;
  doc[pointer(key)] = value;
  const auto diags = validate_config(doc);
  if (has_errors(diags)) {
    std::string msg = "override '" + assignment + "' is invalid:";
    for (const auto& d : diags)
      if (d.level == Diagnostic::Level::error) msg += "\n  " + d.to_string();
    throw std::invalid_argument(msg);
  }
  resolved_ = merged(doc);
  overrides_.push_back(key + "=" + value.dump());
}

const Json& ExperimentConfig::at(const std::string& key) const {
  const auto p = pointer(key);
  if (!resolved_.contains(p)) throw std::out_of_range("no configuration key '" + key + "'");
  return resolved_.at(p);
}

std::string ExperimentConfig::experiment() const { return text("experiment"); }
std::uint64_t ExperimentConfig::seed() const { return std::uint64_t(integer("seed")); }
double ExperimentConfig::number(const std::string& key) const { return at(key).get<double>(); }
long long ExperimentConfig::integer(const std::string& key) const {
  return (long long)std::llround(at(key).get<double>());
}
std::string ExperimentConfig::text(const std::string& key) const { return at(key).get<std::string>(); }
std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  return at(key).get<std::vector<double>>();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)fnv1a64(resolved_.dump()));
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace phaselab
