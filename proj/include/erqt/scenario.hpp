#pragma once

// Scenario files: a YAML document describing the junction, bias, relaxation
// kind, requested methods and an optional one-parameter sweep. The grammar is
// documented in docs/config-format.md.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "erqt/current.hpp"
#include "erqt/model.hpp"
#include "erqt/quadrature.hpp"
#include "erqt/result.hpp"

namespace erqt {

struct SingleLevelPreset {
  double epsilon = 0.0;
  bool operator==(const SingleLevelPreset&) const = default;
};

struct DenseHamiltonian {
  std::size_t size = 0;
  std::vector<cplx> entries;  // row-major, size * size
  bool operator==(const DenseHamiltonian&) const = default;
};

using SystemSpec = std::variant<SingleLevelPreset, DenseHamiltonian>;

struct ModeSpec {
  double omega = 0.0;
  double gamma = 0.0;
  std::vector<cplx> coupling;
  bool operator==(const ModeSpec&) const = default;
};

struct ExplicitModes {
  std::vector<ModeSpec> modes;
  bool operator==(const ExplicitModes&) const = default;
};

/// Right reservoir only: copy of the left one with couplings scaled by sqrt(lambda).
struct ProportionalSpec {
  double lambda = 1.0;
  bool operator==(const ProportionalSpec&) const = default;
};

struct BandSpec {
  bool flat = true;
  double gamma0 = 0.0;          // flat profile value
  std::vector<double> samples;  // tabulated profile, uniform over the range
  double omega_min = 0.0;
  double omega_max = 0.0;
  std::size_t n_modes = 0;
  BandScheme scheme = BandScheme::Uniform;
  GammaRule gamma_rule;
  std::size_t site = 0;
  bool operator==(const BandSpec&) const = default;
};

using ReservoirSpec = std::variant<ExplicitModes, ProportionalSpec, BandSpec>;

enum class SweepParameter { GammaScale, BiasDelta, NModes };

std::string_view to_string(SweepParameter p);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::GammaScale;
  std::vector<double> values;
  bool operator==(const SweepSpec&) const = default;
};

struct ScenarioConfig {
  std::string scenario = "scenario";
  SystemSpec system;
  ReservoirSpec left;
  ReservoirSpec right;
  double mu_left = 0.0, mu_right = 0.0, t_left = 0.0, t_right = 0.0;
  RelaxationKind kind = RelaxationKind::Markovian;
  std::vector<Method> methods;
  std::optional<SweepSpec> sweep;
  QuadratureSpec quadrature;
  std::string output_path;  // empty: standard output
  std::string output_format = "csv";

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates a scenario. Throws Error(Parse) with a line number on
/// malformed YAML and Error(Validation) naming the key path otherwise.
ScenarioConfig parse_config(const std::string& text);

/// Normalized YAML with every default made explicit.
std::string dump_config(const ScenarioConfig& config);

/// Junction at one sweep point; `gamma_scale` and `n_modes` override the file.
JunctionModel build_junction(const ScenarioConfig& config, double gamma_scale = 1.0,
                             std::optional<std::size_t> n_modes = std::nullopt);
BiasSpec build_bias(const ScenarioConfig& config, std::optional<double> bias_delta = std::nullopt);
/// Continuum leads for landauer_continuum, when both sides are flat bands.
std::optional<ContinuumJunction> build_continuum(const ScenarioConfig& config);

struct ResultRow {
  std::string scenario;
  std::string param_name;             // empty without a sweep
  std::optional<double> param_value;  // empty without a sweep
  Method method = Method::General;
  double current = 0.0;
  double abs_error = 0.0;
  long n_eval = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> diagnostics;
  bool error = false;
  std::string message;  // error text, not part of the CSV
};

/// One row per (sweep value x method), in declared order. Sweep points may be
/// evaluated on up to `threads` workers.
std::vector<ResultRow> run_scenario(const ScenarioConfig& config, unsigned threads = 1);

inline constexpr const char* kCsvHeader =
    "scenario,param_name,param_value,method,current,abs_error,n_eval,wall_time_s,diagnostics";

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
/// Writes `rows` to `path`; throws Error(Io) naming the path on failure.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Shortest round-trip representation with 17 significant digits.
std::string format_double(double x);

}  // namespace erqt
