#include "erqt/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include "erqt/error.hpp"

namespace erqt {

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::GammaScale: return "gamma_scale";
    case SweepParameter::BiasDelta: return "bias_delta";
    case SweepParameter::NModes: return "n_modes";
  }
  return "?";
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// Parsing ---------------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Validation, path + ": " + what);
}

std::string at_line(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.line < 0) return {};
  return " (line " + std::to_string(m.line + 1) + ")";
}

void allow_keys(const YAML::Node& n, const std::string& path,
                std::initializer_list<const char*> keys) {
  if (!n.IsMap()) fail(path, "expected a mapping" + at_line(n));
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key" + at_line(kv.first));
  }
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double read_double(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(path, "expected a number" + at_line(n));
  double x;
  try {
    x = n.as<double>();
  } catch (const YAML::Exception&) {
    fail(path, "expected a number, got '" + n.Scalar() + "'" + at_line(n));
  }
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double require_double(const YAML::Node& map, const std::string& path, const char* key) {
  const auto n = map[key];
  if (!n) fail(join(path, key), "required");
  return read_double(n, join(path, key));
}

double optional_double(const YAML::Node& map, const std::string& path, const char* key,
                       double fallback) {
  const auto n = map[key];
  return n ? read_double(n, join(path, key)) : fallback;
}

std::string read_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(path, "expected a string" + at_line(n));
  return n.Scalar();
}

std::size_t read_count(const YAML::Node& n, const std::string& path) {
  const double x = read_double(n, path);
  if (x < 1.0 || x != std::floor(x) || x > 1e9) fail(path, "must be a positive integer");
  return static_cast<std::size_t>(x);
}

// A complex entry is [re, im] or a plain real number.
cplx read_complex(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return {read_double(n, path), 0.0};
  if (!n.IsSequence() || n.size() != 2) fail(path, "expected [re, im]" + at_line(n));
  return {read_double(n[0], path + "[0]"), read_double(n[1], path + "[1]")};
}

std::vector<cplx> read_complex_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(path, "expected a list of [re, im] pairs" + at_line(n));
  std::vector<cplx> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(read_complex(n[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SystemSpec parse_system(const YAML::Node& n) {
  const std::string path = "system";
  if (!n) fail(path, "required");
  allow_keys(n, path, {"preset", "epsilon", "hamiltonian"});
  if (n["preset"] && n["hamiltonian"]) fail(path, "give either preset or hamiltonian, not both");
  if (n["preset"]) {
    const auto name = read_string(n["preset"], "system.preset");
    if (name != "single_level") fail("system.preset", "unknown preset '" + name + "'");
    return SingleLevelPreset{optional_double(n, path, "epsilon", 0.0)};
  }
  if (!n["hamiltonian"]) fail(path, "needs preset or hamiltonian");
  if (n["epsilon"]) fail("system.epsilon", "only valid with a preset");
  DenseHamiltonian h;
  h.entries = read_complex_list(n["hamiltonian"], "system.hamiltonian");
  const auto size = static_cast<std::size_t>(std::llround(std::sqrt(double(h.entries.size()))));
  if (size == 0 || size * size != h.entries.size()) {
    fail("system.hamiltonian", "needs N*N entries, got " + std::to_string(h.entries.size()));
  }
  h.size = size;
  double scale = 0.0;
  for (const auto& z : h.entries) scale = std::max(scale, std::abs(z));
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      if (std::abs(h.entries[i * size + j] - std::conj(h.entries[j * size + i])) >
          1e-12 * std::max(scale, 1.0)) {
        fail("system.hamiltonian", "not Hermitian at (" + std::to_string(i) + ", " +
                                       std::to_string(j) + ")");
      }
    }
  }
  return h;
}

BandSpec parse_band(const YAML::Node& n, const std::string& path) {
  allow_keys(n, path,
             {"profile", "gamma0", "values", "range", "n_modes", "scheme", "gamma_rule", "site"});
  BandSpec b;
  const auto profile = n["profile"] ? read_string(n["profile"], join(path, "profile")) : "flat";
  if (profile == "flat") {
    b.flat = true;
    b.gamma0 = require_double(n, path, "gamma0");
    if (b.gamma0 < 0.0) fail(join(path, "gamma0"), "must be >= 0");
    if (n["values"]) fail(join(path, "values"), "only valid with profile: tabulated");
  } else if (profile == "tabulated") {
    b.flat = false;
    if (n["gamma0"]) fail(join(path, "gamma0"), "only valid with profile: flat");
    const auto v = n["values"];
    if (!v || !v.IsSequence() || v.size() < 2) fail(join(path, "values"), "needs at least 2 samples");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto p = join(path, "values") + "[" + std::to_string(i) + "]";
      b.samples.push_back(read_double(v[i], p));
      if (b.samples.back() < 0.0) fail(p, "must be >= 0");
    }
  } else {
    fail(join(path, "profile"), "must be flat or tabulated");
  }
  const auto range = n["range"];
  if (!range || !range.IsSequence() || range.size() != 2) {
    fail(join(path, "range"), "expected [omega_min, omega_max]");
  }
  b.omega_min = read_double(range[0], join(path, "range") + "[0]");
  b.omega_max = read_double(range[1], join(path, "range") + "[1]");
  if (!(b.omega_max > b.omega_min)) fail(join(path, "range"), "needs omega_min < omega_max");
  if (!n["n_modes"]) fail(join(path, "n_modes"), "required");
  b.n_modes = read_count(n["n_modes"], join(path, "n_modes"));

  const auto scheme = n["scheme"] ? read_string(n["scheme"], join(path, "scheme")) : "uniform";
  if (scheme == "uniform") {
    b.scheme = BandScheme::Uniform;
  } else if (scheme == "gauss") {
    b.scheme = BandScheme::MidpointGauss;
  } else {
    fail(join(path, "scheme"), "must be uniform or gauss");
  }

  b.gamma_rule = {GammaRule::Kind::SpacingProportional, 1.0};
  if (const auto g = n["gamma_rule"]) {
    const auto gp = join(path, "gamma_rule");
    allow_keys(g, gp, {"kind", "c"});
    const auto kind = g["kind"] ? read_string(g["kind"], join(gp, "kind")) : "spacing";
    if (kind == "spacing") {
      b.gamma_rule.kind = GammaRule::Kind::SpacingProportional;
    } else if (kind == "constant") {
      b.gamma_rule.kind = GammaRule::Kind::Constant;
    } else {
      fail(join(gp, "kind"), "must be spacing or constant");
    }
    b.gamma_rule.c = optional_double(g, gp, "c", 1.0);
    if (!(b.gamma_rule.c > 0.0)) fail(join(gp, "c"), "must be > 0");
  }
  if (n["site"]) {
    const double s = read_double(n["site"], join(path, "site"));
    if (s < 0.0 || s != std::floor(s)) fail(join(path, "site"), "must be a non-negative integer");
    b.site = static_cast<std::size_t>(s);
  }
  return b;
}

ReservoirSpec parse_reservoir(const YAML::Node& n, const std::string& path, std::size_t n_system,
                              bool allow_proportional) {
  if (!n) fail(path, "required");
  allow_keys(n, path, {"modes", "proportional", "band"});
  const int count = int(bool(n["modes"])) + int(bool(n["proportional"])) + int(bool(n["band"]));
  if (count != 1) fail(path, "needs exactly one of modes, proportional, band");

  if (const auto p = n["proportional"]) {
    const auto pp = join(path, "proportional");
    if (!allow_proportional) fail(pp, "only the right reservoir can be proportional");
    allow_keys(p, pp, {"lambda"});
    const double lambda = require_double(p, pp, "lambda");
    if (!(lambda > 0.0)) fail(join(pp, "lambda"), "must be > 0");
    return ProportionalSpec{lambda};
  }
  if (const auto b = n["band"]) {
    auto band = parse_band(b, join(path, "band"));
    if (band.site >= n_system) {
      fail(join(path, "band.site"), "out of range for a " + std::to_string(n_system) + "-site system");
    }
    return band;
  }
  const auto m = n["modes"];
  const auto mp = join(path, "modes");
  if (!m.IsSequence()) fail(mp, "expected a list" + at_line(m));
  ExplicitModes out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto p = mp + "[" + std::to_string(k) + "]";
    allow_keys(m[k], p, {"omega", "gamma", "coupling"});
    ModeSpec mode;
    mode.omega = require_double(m[k], p, "omega");
    mode.gamma = require_double(m[k], p, "gamma");
    if (!(mode.gamma > 0.0)) fail(join(p, "gamma"), "must be > 0");
    if (!m[k]["coupling"]) fail(join(p, "coupling"), "required");
    mode.coupling = read_complex_list(m[k]["coupling"], join(p, "coupling"));
    if (mode.coupling.size() != n_system) {
      fail(join(p, "coupling"), "needs " + std::to_string(n_system) + " entries, got " +
                                    std::to_string(mode.coupling.size()));
    }
    out.modes.push_back(std::move(mode));
  }
  return out;
}

std::size_t system_size(const SystemSpec& s) {
  if (const auto* h = std::get_if<DenseHamiltonian>(&s)) return h->size;
  return 1;
}

bool is_flat_band(const ReservoirSpec& r) {
  const auto* b = std::get_if<BandSpec>(&r);
  return b && b->flat;
}

bool has_band(const ScenarioConfig& c) {
  return std::holds_alternative<BandSpec>(c.left) || std::holds_alternative<BandSpec>(c.right);
}

bool needs_markovian(Method m) {
  return m == Method::PcAnalytic || m == Method::WeakGamma || m == Method::StrongGamma ||
         m == Method::OccupancyLargeGamma || m == Method::Lyapunov;
}

void parse_run(const YAML::Node& n, ScenarioConfig& c) {
  if (!n) fail("run", "required");
  allow_keys(n, "run", {"methods", "sweep", "quadrature"});
  const auto m = n["methods"];
  if (!m || !m.IsSequence() || m.size() == 0) fail("run.methods", "needs a non-empty list");
  std::set<Method> seen;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto p = "run.methods[" + std::to_string(i) + "]";
    const auto name = read_string(m[i], p);
    const auto method = method_from_string(name);
    if (!method) fail(p, "unknown method '" + name + "'");
    if (!seen.insert(*method).second) fail(p, "duplicate method '" + name + "'");
    if (c.kind == RelaxationKind::NonMarkovianWideBand && needs_markovian(*method)) {
      fail(p, "'" + name + "' is unsupported for relaxation kind nonmarkovian (Markovian only)");
    }
    if (*method == Method::LandauerContinuum) {
      const bool right_ok = is_flat_band(c.right) ||
                            (std::holds_alternative<ProportionalSpec>(c.right) && is_flat_band(c.left));
      if (!is_flat_band(c.left) || !right_ok) {
        fail(p, "landauer_continuum needs flat bands (or a right side proportional to a flat left band)");
      }
    }
    c.methods.push_back(*method);
  }

  if (const auto s = n["sweep"]) {
    allow_keys(s, "run.sweep", {"parameter", "values"});
    SweepSpec sw;
    if (!s["parameter"]) fail("run.sweep.parameter", "required");
    const auto name = read_string(s["parameter"], "run.sweep.parameter");
    if (name == "gamma_scale") {
      sw.parameter = SweepParameter::GammaScale;
    } else if (name == "bias_delta") {
      sw.parameter = SweepParameter::BiasDelta;
    } else if (name == "n_modes") {
      sw.parameter = SweepParameter::NModes;
      if (!has_band(c)) fail("run.sweep.parameter", "n_modes needs a band reservoir");
    } else {
      fail("run.sweep.parameter", "must be gamma_scale, bias_delta or n_modes");
    }
    const auto v = s["values"];
    if (!v || !v.IsSequence() || v.size() == 0) fail("run.sweep.values", "needs a non-empty list");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto p = "run.sweep.values[" + std::to_string(i) + "]";
      double x;
      if (sw.parameter == SweepParameter::NModes) {
        x = static_cast<double>(read_count(v[i], p));
      } else {
        x = read_double(v[i], p);
      }
      if (sw.parameter == SweepParameter::GammaScale && !(x > 0.0)) fail(p, "must be > 0");
      sw.values.push_back(x);
    }
    c.sweep = std::move(sw);
  }

  if (const auto q = n["quadrature"]) {
    const std::string qp = "run.quadrature";
    allow_keys(q, qp, {"abs_tol", "rel_tol", "max_subdivisions", "window_padding_factor"});
    auto& spec = c.quadrature;
    spec.abs_tol = optional_double(q, qp, "abs_tol", spec.abs_tol);
    spec.rel_tol = optional_double(q, qp, "rel_tol", spec.rel_tol);
    if (q["max_subdivisions"]) {
      spec.max_subdivisions =
          static_cast<long>(read_count(q["max_subdivisions"], join(qp, "max_subdivisions")));
    }
    spec.window_padding_factor =
        optional_double(q, qp, "window_padding_factor", spec.window_padding_factor);
    if (!(spec.abs_tol > 0.0)) fail(join(qp, "abs_tol"), "must be > 0");
    if (!(spec.rel_tol > 0.0)) fail(join(qp, "rel_tol"), "must be > 0");
    if (!(spec.window_padding_factor > 0.0)) fail(join(qp, "window_padding_factor"), "must be > 0");
  }
}

// Junction assembly -------------------------------------------------------------

Eigen::MatrixXcd system_matrix(const SystemSpec& s) {
  if (const auto* p = std::get_if<SingleLevelPreset>(&s)) {
    return Eigen::MatrixXcd::Constant(1, 1, cplx(p->epsilon, 0.0));
  }
  const auto& h = std::get<DenseHamiltonian>(s);
  const auto n = static_cast<Eigen::Index>(h.size);
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h.entries[std::size_t(i * n + j)];
  }
  return m;
}

Reservoir build_side(Side side, const ReservoirSpec& spec, Eigen::Index n_system,
                     std::optional<std::size_t> n_modes) {
  if (const auto* b = std::get_if<BandSpec>(&spec)) {
    const auto profile = b->flat ? BandProfile::flat(b->gamma0, b->omega_min, b->omega_max)
                                 : BandProfile::tabulated(b->omega_min, b->omega_max, b->samples);
    return discretize_band(side, profile, n_modes.value_or(b->n_modes), b->scheme, b->gamma_rule,
                           static_cast<Eigen::Index>(b->site), n_system);
  }
  const auto& modes = std::get<ExplicitModes>(spec).modes;
  std::vector<ReservoirMode> out;
  out.reserve(modes.size());
  for (const auto& m : modes) {
    Eigen::VectorXcd v(n_system);
    for (Eigen::Index i = 0; i < n_system; ++i) v[i] = m.coupling[std::size_t(i)];
    out.emplace_back(m.omega, m.gamma, std::move(v));
  }
  return Reservoir(side, std::move(out));
}

// Dump --------------------------------------------------------------------------

void emit_complex(YAML::Emitter& out, cplx z) {
  out << YAML::Flow << YAML::BeginSeq << format_double(z.real()) << format_double(z.imag())
      << YAML::EndSeq;
}

void emit_reservoir(YAML::Emitter& out, const ReservoirSpec& spec) {
  out << YAML::BeginMap;
  if (const auto* p = std::get_if<ProportionalSpec>(&spec)) {
    out << YAML::Key << "proportional" << YAML::Value << YAML::BeginMap << YAML::Key << "lambda"
        << YAML::Value << format_double(p->lambda) << YAML::EndMap;
  } else if (const auto* b = std::get_if<BandSpec>(&spec)) {
    out << YAML::Key << "band" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "profile" << YAML::Value << (b->flat ? "flat" : "tabulated");
    if (b->flat) {
      out << YAML::Key << "gamma0" << YAML::Value << format_double(b->gamma0);
    } else {
      out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double x : b->samples) out << format_double(x);
      out << YAML::EndSeq;
    }
    out << YAML::Key << "range" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << format_double(b->omega_min) << format_double(b->omega_max) << YAML::EndSeq;
    out << YAML::Key << "n_modes" << YAML::Value << b->n_modes;
    out << YAML::Key << "scheme" << YAML::Value
        << (b->scheme == BandScheme::Uniform ? "uniform" : "gauss");
    out << YAML::Key << "gamma_rule" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "kind" << YAML::Value
        << (b->gamma_rule.kind == GammaRule::Kind::Constant ? "constant" : "spacing")
        << YAML::Key << "c" << YAML::Value << format_double(b->gamma_rule.c) << YAML::EndMap;
    out << YAML::Key << "site" << YAML::Value << b->site;
    out << YAML::EndMap;
  } else {
    out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
    for (const auto& m : std::get<ExplicitModes>(spec).modes) {
      out << YAML::BeginMap;
      out << YAML::Key << "omega" << YAML::Value << format_double(m.omega);
      out << YAML::Key << "gamma" << YAML::Value << format_double(m.gamma);
      out << YAML::Key << "coupling" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& z : m.coupling) emit_complex(out, z);
      out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw Error(ErrorCode::Parse, "scenario must be a YAML mapping");

  ScenarioConfig c;
  try {
    allow_keys(root, "", {"scenario", "system", "reservoirs", "bias", "relaxation", "run", "output"});
    if (root["scenario"]) {
      c.scenario = read_string(root["scenario"], "scenario");
      if (c.scenario.empty()) fail("scenario", "must not be empty");
    }
    c.system = parse_system(root["system"]);
    const auto n_system = system_size(c.system);

    const auto res = root["reservoirs"];
    if (!res) fail("reservoirs", "required");
    allow_keys(res, "reservoirs", {"left", "right"});
    c.left = parse_reservoir(res["left"], "reservoirs.left", n_system, false);
    c.right = parse_reservoir(res["right"], "reservoirs.right", n_system, true);

    const auto bias = root["bias"];
    if (!bias) fail("bias", "required");
    allow_keys(bias, "bias", {"mu_L", "mu_R", "T_L", "T_R"});
    c.mu_left = require_double(bias, "bias", "mu_L");
    c.mu_right = require_double(bias, "bias", "mu_R");
    c.t_left = optional_double(bias, "bias", "T_L", 0.0);
    c.t_right = optional_double(bias, "bias", "T_R", 0.0);
    if (c.t_left < 0.0) fail("bias.T_L", "must be >= 0");
    if (c.t_right < 0.0) fail("bias.T_R", "must be >= 0");

    if (const auto rel = root["relaxation"]) {
      allow_keys(rel, "relaxation", {"kind"});
      const auto kind = rel["kind"] ? read_string(rel["kind"], "relaxation.kind") : "markovian";
      if (kind == "markovian") {
        c.kind = RelaxationKind::Markovian;
      } else if (kind == "nonmarkovian") {
        c.kind = RelaxationKind::NonMarkovianWideBand;
      } else {
        fail("relaxation.kind", "must be markovian or nonmarkovian");
      }
    }

    parse_run(root["run"], c);

    if (const auto o = root["output"]) {
      allow_keys(o, "output", {"path", "format"});
      if (o["path"]) c.output_path = read_string(o["path"], "output.path");
      if (o["format"]) c.output_format = read_string(o["format"], "output.format");
      if (c.output_format != "csv") fail("output.format", "only csv is supported");
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }

  // Remaining constructor checks (band profile shape and the like).
  try {
    (void)build_junction(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::Validation, std::string("reservoirs: ") + e.what());
  }
  return c;
}

std::string dump_config(const ScenarioConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "scenario" << YAML::Value << YAML::DoubleQuoted << c.scenario;

  out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  if (const auto* p = std::get_if<SingleLevelPreset>(&c.system)) {
    out << YAML::Key << "preset" << YAML::Value << "single_level";
    out << YAML::Key << "epsilon" << YAML::Value << format_double(p->epsilon);
  } else {
    out << YAML::Key << "hamiltonian" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& z : std::get<DenseHamiltonian>(c.system).entries) emit_complex(out, z);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "reservoirs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "left" << YAML::Value;
  emit_reservoir(out, c.left);
  out << YAML::Key << "right" << YAML::Value;
  emit_reservoir(out, c.right);
  out << YAML::EndMap;

  out << YAML::Key << "bias" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mu_L" << YAML::Value << format_double(c.mu_left);
  out << YAML::Key << "mu_R" << YAML::Value << format_double(c.mu_right);
  out << YAML::Key << "T_L" << YAML::Value << format_double(c.t_left);
  out << YAML::Key << "T_R" << YAML::Value << format_double(c.t_right);
  out << YAML::EndMap;

  out << YAML::Key << "relaxation" << YAML::Value << YAML::BeginMap << YAML::Key << "kind"
      << YAML::Value << (c.kind == RelaxationKind::Markovian ? "markovian" : "nonmarkovian")
      << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "methods" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (Method m : c.methods) out << std::string(to_string(m));
  out << YAML::EndSeq;
  if (c.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "parameter" << YAML::Value << std::string(to_string(c.sweep->parameter));
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : c.sweep->values) out << format_double(x);
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::Key << "quadrature" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "abs_tol" << YAML::Value << format_double(c.quadrature.abs_tol);
  out << YAML::Key << "rel_tol" << YAML::Value << format_double(c.quadrature.rel_tol);
  out << YAML::Key << "max_subdivisions" << YAML::Value << c.quadrature.max_subdivisions;
  out << YAML::Key << "window_padding_factor" << YAML::Value
      << format_double(c.quadrature.window_padding_factor);
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << c.output_path;
  out << YAML::Key << "format" << YAML::Value << c.output_format;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

JunctionModel build_junction(const ScenarioConfig& c, double gamma_scale,
                             std::optional<std::size_t> n_modes) {
  const Eigen::MatrixXcd h = system_matrix(c.system);
  const auto n = h.rows();
  Reservoir left = build_side(Side::Left, c.left, n, n_modes);
  Reservoir right = std::holds_alternative<ProportionalSpec>(c.right)
                        ? make_proportional_right(left, std::get<ProportionalSpec>(c.right).lambda)
                        : build_side(Side::Right, c.right, n, n_modes);
  JunctionModel j(h, std::move(left), std::move(right), c.kind);
  return gamma_scale == 1.0 ? j : j.with_gamma_scale(gamma_scale);
}

BiasSpec build_bias(const ScenarioConfig& c, std::optional<double> bias_delta) {
  if (!bias_delta) return BiasSpec(c.mu_left, c.mu_right, c.t_left, c.t_right);
  const double mid = 0.5 * (c.mu_left + c.mu_right);
  return BiasSpec(mid + 0.5 * *bias_delta, mid - 0.5 * *bias_delta, c.t_left, c.t_right);
}

std::optional<ContinuumJunction> build_continuum(const ScenarioConfig& c) {
  const auto* left = std::get_if<BandSpec>(&c.left);
  if (!left || !left->flat) return std::nullopt;
  double g_right;
  std::size_t site_right;
  if (const auto* p = std::get_if<ProportionalSpec>(&c.right)) {
    g_right = p->lambda * left->gamma0;
    site_right = left->site;
  } else if (const auto* b = std::get_if<BandSpec>(&c.right); b && b->flat) {
    g_right = b->gamma0;
    site_right = b->site;
  } else {
    return std::nullopt;
  }
  ContinuumJunction out;
  out.system_hamiltonian = system_matrix(c.system);
  const auto n = out.system_hamiltonian.rows();
  out.gamma_left = Eigen::MatrixXcd::Zero(n, n);
  out.gamma_right = Eigen::MatrixXcd::Zero(n, n);
  out.gamma_left(Eigen::Index(left->site), Eigen::Index(left->site)) = left->gamma0;
  out.gamma_right(Eigen::Index(site_right), Eigen::Index(site_right)) = g_right;
  return out;
}

std::vector<ResultRow> run_scenario(const ScenarioConfig& c, unsigned threads) {
  const std::vector<std::optional<double>> points =
      c.sweep ? std::vector<std::optional<double>>(c.sweep->values.begin(), c.sweep->values.end())
              : std::vector<std::optional<double>>{std::nullopt};
  const std::size_t n_methods = c.methods.size();
  std::vector<ResultRow> rows(points.size() * n_methods);
  const auto continuum = build_continuum(c);
  const double anomaly_threshold = 10.0 * c.quadrature.abs_tol;

  auto run_point = [&](std::size_t ip) {
    const auto value = points[ip];
    ResultRow* out = &rows[ip * n_methods];
    for (std::size_t im = 0; im < n_methods; ++im) {
      out[im].scenario = c.scenario;
      out[im].method = c.methods[im];
      if (c.sweep) out[im].param_name = std::string(to_string(c.sweep->parameter));
      out[im].param_value = value;
    }
    auto mark_error = [](ResultRow& r, std::string code, std::string message) {
      r.error = true;
      r.current = std::nan("");
      r.abs_error = std::nan("");
      r.n_eval = 0;
      r.diagnostics.push_back(std::move(code));
      r.message = std::move(message);
    };

    std::optional<JunctionModel> junction;
    std::optional<BiasSpec> bias;
    try {
      const auto param = c.sweep ? c.sweep->parameter : SweepParameter::GammaScale;
      const double scale = value && param == SweepParameter::GammaScale ? *value : 1.0;
      std::optional<std::size_t> n_modes;
      if (value && param == SweepParameter::NModes) n_modes = static_cast<std::size_t>(*value);
      std::optional<double> delta;
      if (value && param == SweepParameter::BiasDelta) delta = *value;
      junction.emplace(build_junction(c, scale, n_modes));
      bias.emplace(build_bias(c, delta));
    } catch (const Error& e) {
      for (std::size_t im = 0; im < n_methods; ++im) {
        mark_error(out[im], std::string(to_string(e.code())), e.what());
      }
      return;
    }
    const bool zero_bias = bias->mu_left() == bias->mu_right() && bias->t_left() == bias->t_right();

    for (std::size_t im = 0; im < n_methods; ++im) {
      ResultRow& r = out[im];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto res = evaluate_method(r.method, *junction, *bias, c.quadrature, continuum);
        r.current = res.value;
        r.abs_error = res.abs_error_estimate;
        r.n_eval = res.n_evaluations;
        for (const auto& d : res.diagnostics) r.diagnostics.push_back(d);
        if (zero_bias && std::abs(res.value) > anomaly_threshold) {
          r.diagnostics.emplace_back("zero_bias_anomaly");
        }
      } catch (const Error& e) {
        mark_error(r, std::string(to_string(e.code())), e.what());
      } catch (const std::exception& e) {
        mark_error(r, "internal_error", e.what());
      }
      r.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1u), points.size());
  if (workers <= 1) {
    for (std::size_t ip = 0; ip < points.size(); ++ip) run_point(ip);
    return rows;
  }
  // Each point writes only its own slice of `rows`, so ordering is fixed.
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t ip = next++; ip < points.size(); ip = next++) run_point(ip);
    });
  }
  pool.clear();
  return rows;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    std::string diag;
    for (const auto& d : r.diagnostics) {
      if (!diag.empty()) diag += ';';
      diag += d;
    }
    out << csv_field(r.scenario) << ',' << r.param_name << ','
        << (r.param_value ? format_double(*r.param_value) : std::string()) << ','
        << to_string(r.method) << ',' << format_double(r.current) << ','
        << format_double(r.abs_error) << ',' << r.n_eval << ',' << format_double(r.wall_time_s)
        << ',' << diag << '\n';
  }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_csv(rows, f);
  f.flush();
  if (!f) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace erqt
