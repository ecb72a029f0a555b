#pragma once

// Steady-state current through a junction with finite extended reservoirs.
//
// Frequency-integral routes (general Meir-Wingreen form, non-interacting
// trace form, proportional-coupling integral) share one integration layout:
// the whole real axis, pre-split at the window returned by auto_window, at
// sharp Fermi edges and at narrow resonances, with the tails beyond the window
// mapped onto finite panels. Closed forms (analytic proportional-coupling
// sum, weak/strong relaxation asymptotics, large-gamma occupancy identity)
// report a zero error estimate.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "erqt/error.hpp"
#include "erqt/greens.hpp"
#include "erqt/model.hpp"
#include "erqt/quadrature.hpp"
#include "erqt/result.hpp"

namespace erqt {

/// [min omega_k - d, max omega_k + d] with d = padding * max(gamma_max, T_max),
/// widened to contain both chemical potentials and the spectrum of H_S.
/// Lorentzian tails outside the window carry O(gamma / d) of their weight; the
/// integrators still cover them through the mapped tail panels.
std::pair<double, double> auto_window(const JunctionModel& junction, const BiasSpec& bias,
                                      const QuadratureSpec& spec);

/// Split points used by the integral routes: window ends, low-temperature
/// chemical potentials, narrow reservoir modes and narrow poles of G^r.
std::vector<double> integration_breakpoints(const JunctionModel& junction, const BiasSpec& bias,
                                            std::pair<double, double> window);

CurrentResult current_general(const JunctionModel& junction, const BiasSpec& bias,
                              const QuadratureSpec& spec = {});

CurrentResult current_noninteracting(const JunctionModel& junction, const BiasSpec& bias,
                                     const QuadratureSpec& spec = {});

/// (f_L - f_R) tr[Gamma_L G^r Gamma_R G^a] form; non-Markovian kind only.
CurrentResult current_noninteracting_factored(const JunctionModel& junction, const BiasSpec& bias,
                                              const QuadratureSpec& spec = {});

/// Proportional coupling, either kind. An empty provider means the built-in
/// non-interacting G^r.
CurrentResult current_pc_integral(const JunctionModel& junction, const BiasSpec& bias,
                                  const QuadratureSpec& spec = {},
                                  const GreensProvider& provider = {});

/// Closed-form proportional-coupling current for Markovian relaxation:
/// I = -2 lambda/(1+lambda) sum_k (f~L - f~R) v_k^dagger Im G^r(w_k + i g_k/2) v_k,
/// with Im X = (X - X^dagger) / 2i.
CurrentResult current_pc_analytic(const JunctionModel& junction, const BiasSpec& bias,
                                  const GreensProvider& provider = {});

CurrentResult current_weak_gamma(const JunctionModel& junction, const BiasSpec& bias);
CurrentResult current_strong_gamma(const JunctionModel& junction, const BiasSpec& bias);

/// Large-gamma identity I = I_L - I_R with
/// I_a = 2 sum_{k in a} (f~_k |v_k|^2 - v_k^dagger n v_k) / gamma_k,
/// n = diag(system occupations). Proportional coupling not required.
CurrentResult current_occupancy_large_gamma(const JunctionModel& junction, const BiasSpec& bias,
                                            const Eigen::VectorXd& system_occupations);

// Continuum (relaxation-free, infinite reservoir) reference ------------------

/// Wide-band continuum leads: Sigma^r = -i (Gamma_L + Gamma_R) / 2, constant.
struct ContinuumJunction {
  Eigen::MatrixXcd system_hamiltonian;
  Eigen::MatrixXcd gamma_left;
  Eigen::MatrixXcd gamma_right;
};

using Transmission = std::function<double(double)>;

/// tr[Gamma_L G^r Gamma_R G^a] of the continuum junction.
Transmission continuum_transmission(const ContinuumJunction& junction);

/// Real parts of the continuum G^r poles, useful as quadrature breakpoints.
std::vector<double> continuum_resonances(const ContinuumJunction& junction);

CurrentResult current_landauer_continuum(const Transmission& transmission, const BiasSpec& bias,
                                         const QuadratureSpec& spec = {},
                                         std::span<const double> breakpoints = {});

// Method dispatch and sweeps -------------------------------------------------

/// Runs one named method. LandauerContinuum needs `continuum`.
CurrentResult evaluate_method(Method method, const JunctionModel& junction, const BiasSpec& bias,
                              const QuadratureSpec& spec = {},
                              const std::optional<ContinuumJunction>& continuum = std::nullopt);

struct MethodOutcome {
  Method method = Method::General;
  std::optional<CurrentResult> result;
  std::optional<ErrorCode> error;
  std::string message;
};

struct SweepRow {
  double parameter = 0.0;
  std::vector<MethodOutcome> outcomes;  // in requested method order
};

struct SweepResult {
  std::string parameter_name;
  std::vector<SweepRow> rows;  // in grid order
};

/// Evaluates `methods` with every relaxation rate scaled by each grid value.
/// Failures are recorded per outcome and never abort the sweep.
SweepResult kramers_sweep(const JunctionModel& junction, const BiasSpec& bias,
                          std::span<const double> gamma_scales, std::span<const Method> methods,
                          const QuadratureSpec& spec = {});

/// Runs `method`, converting library errors into an outcome record.
MethodOutcome try_method(Method method, const JunctionModel& junction, const BiasSpec& bias,
                         const QuadratureSpec& spec,
                         const std::optional<ContinuumJunction>& continuum = std::nullopt);

}  // namespace erqt
