#include "erqt/current.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "erqt/steadystate.hpp"

namespace erqt {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kInvTwoPi = 0.5 / std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Fermi edges and reservoir modes narrower than this fraction of the window
// get their own breakpoint.
constexpr double kNarrowEdge = 1e-4;
// Poles of G^r closer than this fraction of the window to the real axis.
constexpr double kNarrowPole = 1e-3;

double require_proportional(const JunctionModel& junction) {
  const auto report = check_proportionality(junction);
  if (!report.is_proportional) {
    throw Error(ErrorCode::NotProportional,
                "this current formula requires proportional coupling (Gamma_R = lambda Gamma_L)");
  }
  return report.lambda;
}

void require_markovian(const JunctionModel& junction, std::string_view what) {
  if (junction.kind() != RelaxationKind::Markovian) {
    std::ostringstream os;
    os << what << " is defined for Markovian relaxation only";
    throw Error(ErrorCode::UnsupportedKind, os.str());
  }
}

CurrentResult quadrature_result(Method method, const QuadratureResult<cplx>& q,
                                const QuadratureSpec& spec, std::pair<double, double> window) {
  CurrentResult r;
  r.method = method;
  r.value = q.value.real();
  r.abs_error_estimate = q.abs_error;
  r.n_evaluations = q.n_evaluations;
  r.window = window;
  // The integrands are real analytically; a sizeable imaginary part flags trouble.
  if (std::abs(q.value.imag()) > 10.0 * (spec.abs_tol + q.abs_error)) {
    r.diagnostics.emplace_back("quadrature_warn");
  }
  return r;
}

template <class F>
CurrentResult integrate_current(Method method, const JunctionModel& junction, const BiasSpec& bias,
                                const QuadratureSpec& spec, F&& integrand) {
  const auto window = auto_window(junction, bias, spec);
  const auto cuts = integration_breakpoints(junction, bias, window);
  const auto q = integrate_adaptive(integrand, -kInf, kInf, spec, cuts);
  return quadrature_result(method, q, spec, window);
}

// Delta Gamma~ without the per-call proportionality check.
Eigen::MatrixXcd delta_gamma_tilde_unchecked(const JunctionModel& junction, double omega,
                                             const BiasSpec& bias) {
  const auto n = junction.system_size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& m : junction.left().modes()) {
    const double df = f_tilde(m, omega, Side::Left, bias, junction.kind()) -
                      f_tilde(m, omega, Side::Right, bias, junction.kind());
    if (df == 0.0) continue;
    out.noalias() += (df * mode_lorentzian(m, omega)) * (m.coupling() * m.coupling().adjoint());
  }
  return out;
}

void append_unique(std::vector<double>& points, double x, double resolution) {
  for (double p : points) {
    if (std::abs(p - x) <= resolution) return;
  }
  points.push_back(x);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::General: return "general";
    case Method::NonInteracting: return "noninteracting";
    case Method::PcIntegral: return "pc_integral";
    case Method::PcAnalytic: return "pc_analytic";
    case Method::WeakGamma: return "weak_gamma";
    case Method::StrongGamma: return "strong_gamma";
    case Method::LandauerContinuum: return "landauer_continuum";
    case Method::OccupancyLargeGamma: return "occupancy_large_gamma";
    case Method::Lyapunov: return "lyapunov";
  }
  return "unknown";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {
      Method::General,     Method::NonInteracting,    Method::PcIntegral,
      Method::PcAnalytic,  Method::WeakGamma,         Method::StrongGamma,
      Method::LandauerContinuum, Method::OccupancyLargeGamma, Method::Lyapunov};
  return methods;
}

std::optional<Method> method_from_string(std::string_view name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::pair<double, double> auto_window(const JunctionModel& junction, const BiasSpec& bias,
                                      const QuadratureSpec& spec) {
  double lo = std::min(bias.mu_left(), bias.mu_right());
  double hi = std::max(bias.mu_left(), bias.mu_right());
  double gamma_max = 0.0;
  for (Side side : {Side::Left, Side::Right}) {
    for (const auto& m : junction.reservoir(side).modes()) {
      lo = std::min(lo, m.omega());
      hi = std::max(hi, m.omega());
      gamma_max = std::max(gamma_max, m.gamma());
    }
  }
  const Eigen::VectorXd levels =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(junction.system_hamiltonian(),
                                                      Eigen::EigenvaluesOnly)
          .eigenvalues();
  lo = std::min(lo, levels.minCoeff());
  hi = std::max(hi, levels.maxCoeff());
  const double pad =
      spec.window_padding_factor * std::max({gamma_max, bias.t_left(), bias.t_right()});
  lo -= pad;
  hi += pad;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

std::vector<double> integration_breakpoints(const JunctionModel& junction, const BiasSpec& bias,
                                            std::pair<double, double> window) {
  const double width = window.second - window.first;
  const double resolution = 1e-12 * width;
  std::vector<double> points{window.first, window.second};
  for (Side side : {Side::Left, Side::Right}) {
    if (bias.temperature(side) < kNarrowEdge * width) append_unique(points, bias.mu(side), resolution);
    for (const auto& m : junction.reservoir(side).modes()) {
      if (m.gamma() < kNarrowEdge * width) append_unique(points, m.omega(), resolution);
    }
  }
  const Eigen::VectorXcd poles = retarded_poles(junction);
  for (Eigen::Index p = 0; p < poles.size(); ++p) {
    if (std::abs(poles[p].imag()) < kNarrowPole * width) {
      append_unique(points, poles[p].real(), resolution);
    }
  }
  std::sort(points.begin(), points.end());
  return points;
}

CurrentResult current_general(const JunctionModel& junction, const BiasSpec& bias,
                              const QuadratureSpec& spec) {
  auto integrand = [&](double w) -> cplx {
    const Eigen::MatrixXcd gr = system_gr(junction, w);
    const Eigen::MatrixXcd ga = gr.adjoint();
    const auto sd = spectral_densities(junction, w, bias);
    const Eigen::MatrixXcd gl = kI * (gr * (sd.gamma_tilde_left + sd.gamma_tilde_right) * ga);
    const cplx tr = ((sd.gamma_left - sd.gamma_right) * gl).trace() +
                    ((sd.gamma_tilde_left - sd.gamma_tilde_right) * (gr - ga)).trace();
    return 0.5 * kI * kInvTwoPi * tr;
  };
  return integrate_current(Method::General, junction, bias, spec, integrand);
}

CurrentResult current_noninteracting(const JunctionModel& junction, const BiasSpec& bias,
                                     const QuadratureSpec& spec) {
  auto integrand = [&](double w) -> cplx {
    const Eigen::MatrixXcd gr = system_gr(junction, w);
    const Eigen::MatrixXcd ga = gr.adjoint();
    const auto sd = spectral_densities(junction, w, bias);
    const cplx tr = (sd.gamma_tilde_left * ga * sd.gamma_right * gr).trace() -
                    (sd.gamma_left * gr * sd.gamma_tilde_right * ga).trace();
    return kInvTwoPi * tr;
  };
  return integrate_current(Method::NonInteracting, junction, bias, spec, integrand);
}

CurrentResult current_noninteracting_factored(const JunctionModel& junction, const BiasSpec& bias,
                                              const QuadratureSpec& spec) {
  if (junction.kind() != RelaxationKind::NonMarkovianWideBand) {
    throw Error(ErrorCode::UnsupportedKind,
                "the Fermi-factored trace form needs non-Markovian relaxation");
  }
  auto integrand = [&](double w) -> cplx {
    const double df = fermi(w, bias.mu_left(), bias.t_left()) - fermi(w, bias.mu_right(), bias.t_right());
    if (df == 0.0) return 0.0;
    const Eigen::MatrixXcd gr = system_gr(junction, w);
    const auto sd = spectral_densities(junction, w, bias);
    return kInvTwoPi * df * (sd.gamma_left * gr * sd.gamma_right * gr.adjoint()).trace();
  };
  return integrate_current(Method::NonInteracting, junction, bias, spec, integrand);
}

CurrentResult current_pc_integral(const JunctionModel& junction, const BiasSpec& bias,
                                  const QuadratureSpec& spec, const GreensProvider& provider) {
  const double lambda = require_proportional(junction);
  const double x = lambda / (1.0 + lambda);
  if (x == 0.0) {
    CurrentResult r;
    r.method = Method::PcIntegral;
    r.window = auto_window(junction, bias, spec);
    return r;
  }
  const GreensProvider gr_of = provider ? provider : noninteracting_provider(junction);
  auto integrand = [&](double w) -> cplx {
    const Eigen::MatrixXcd dgt = delta_gamma_tilde_unchecked(junction, w, bias);
    if (dgt.isZero(0.0)) return 0.0;
    const Eigen::MatrixXcd gr = gr_of(cplx(w, 0.0));
    return kI * x * kInvTwoPi * (dgt * (gr - gr.adjoint())).trace();
  };
  return integrate_current(Method::PcIntegral, junction, bias, spec, integrand);
}

CurrentResult current_pc_analytic(const JunctionModel& junction, const BiasSpec& bias,
                                  const GreensProvider& provider) {
  const double lambda = require_proportional(junction);
  require_markovian(junction, "the closed-form proportional-coupling current");
  const GreensProvider gr_of = provider ? provider : noninteracting_provider(junction);
  double sum = 0.0;
  long evaluations = 0;
  for (const auto& m : junction.left().modes()) {
    const double df = f_tilde(m, m.omega(), Side::Left, bias, junction.kind()) -
                      f_tilde(m, m.omega(), Side::Right, bias, junction.kind());
    if (df == 0.0 || m.coupling().squaredNorm() == 0.0) continue;
    const Eigen::MatrixXcd g = gr_of(cplx(m.omega(), 0.5 * m.gamma()));
    ++evaluations;
    const Eigen::MatrixXcd im = (g - g.adjoint()) / (2.0 * kI);
    sum += df * (m.coupling().adjoint() * im * m.coupling())(0, 0).real();
  }
  CurrentResult r;
  r.method = Method::PcAnalytic;
  r.value = -2.0 * lambda / (1.0 + lambda) * sum;
  r.n_evaluations = evaluations;
  return r;
}

CurrentResult current_weak_gamma(const JunctionModel& junction, const BiasSpec& bias) {
  const double lambda = require_proportional(junction);
  require_markovian(junction, "the weak-relaxation current");
  double sum = 0.0;
  for (const auto& m : junction.left().modes()) {
    sum += m.gamma() * (f_tilde(m, m.omega(), Side::Left, bias, junction.kind()) -
                        f_tilde(m, m.omega(), Side::Right, bias, junction.kind()));
  }
  CurrentResult r;
  r.method = Method::WeakGamma;
  r.value = 2.0 * lambda / ((1.0 + lambda) * (1.0 + lambda)) * sum;
  return r;
}

CurrentResult current_strong_gamma(const JunctionModel& junction, const BiasSpec& bias) {
  const double lambda = require_proportional(junction);
  require_markovian(junction, "the strong-relaxation current");
  double sum = 0.0;
  for (const auto& m : junction.left().modes()) {
    const double df = f_tilde(m, m.omega(), Side::Left, bias, junction.kind()) -
                      f_tilde(m, m.omega(), Side::Right, bias, junction.kind());
    sum += df * m.coupling().squaredNorm() / m.gamma();
  }
  CurrentResult r;
  r.method = Method::StrongGamma;
  r.value = 4.0 * lambda / (1.0 + lambda) * sum;
  return r;
}

CurrentResult current_occupancy_large_gamma(const JunctionModel& junction, const BiasSpec& bias,
                                            const Eigen::VectorXd& system_occupations) {
  require_markovian(junction, "the large-gamma occupancy identity");
  if (system_occupations.size() != junction.system_size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one occupation per system site");
  }
  for (Eigen::Index i = 0; i < system_occupations.size(); ++i) {
    const double n = system_occupations[i];
    if (!(n >= -1e-10 && n <= 1.0 + 1e-10)) {
      std::ostringstream os;
      os << "occupation " << i << " = " << n << " lies outside [0, 1]";
      throw Error(ErrorCode::InvalidOccupancy, os.str());
    }
  }
  auto side_current = [&](Side side) {
    double sum = 0.0;
    for (const auto& m : junction.reservoir(side).modes()) {
      const double f = f_tilde(m, m.omega(), side, bias, junction.kind());
      const double vv = m.coupling().squaredNorm();
      const double vnv = (m.coupling().cwiseAbs2().array() * system_occupations.array()).sum();
      sum += (f * vv - vnv) / m.gamma();
    }
    return 2.0 * sum;
  };
  CurrentResult r;
  r.method = Method::OccupancyLargeGamma;
  r.value = side_current(Side::Left) - side_current(Side::Right);
  return r;
}

Transmission continuum_transmission(const ContinuumJunction& junction) {
  const auto n = junction.system_hamiltonian.rows();
  if (junction.system_hamiltonian.cols() != n || junction.gamma_left.rows() != n ||
      junction.gamma_left.cols() != n || junction.gamma_right.rows() != n ||
      junction.gamma_right.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "continuum junction matrices must share one size");
  }
  const Eigen::MatrixXcd sigma = -0.5 * kI * (junction.gamma_left + junction.gamma_right);
  return [junction, sigma, n](double w) {
    const Eigen::MatrixXcd m =
        w * Eigen::MatrixXcd::Identity(n, n) - junction.system_hamiltonian - sigma;
    const Eigen::MatrixXcd gr = m.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    return (junction.gamma_left * gr * junction.gamma_right * gr.adjoint()).trace().real();
  };
}

std::vector<double> continuum_resonances(const ContinuumJunction& junction) {
  const Eigen::MatrixXcd m =
      junction.system_hamiltonian - 0.5 * kI * (junction.gamma_left + junction.gamma_right);
  const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(m, false).eigenvalues();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev[i].real());
  std::sort(out.begin(), out.end());
  return out;
}

CurrentResult current_landauer_continuum(const Transmission& transmission, const BiasSpec& bias,
                                         const QuadratureSpec& spec,
                                         std::span<const double> breakpoints) {
  auto integrand = [&](double w) -> double {
    const double df = fermi(w, bias.mu_left(), bias.t_left()) - fermi(w, bias.mu_right(), bias.t_right());
    return df == 0.0 ? 0.0 : kInvTwoPi * df * transmission(w);
  };
  const double mu_lo = std::min(bias.mu_left(), bias.mu_right());
  const double mu_hi = std::max(bias.mu_left(), bias.mu_right());
  const double t_max = std::max(bias.t_left(), bias.t_right());
  const double pad = spec.window_padding_factor * t_max;
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  cuts.push_back(bias.mu_left());
  cuts.push_back(bias.mu_right());

  QuadratureResult<double> q;
  CurrentResult r;
  r.method = Method::LandauerContinuum;
  if (t_max == 0.0) {
    // Fermi difference vanishes identically outside the bias window.
    q = integrate_adaptive(integrand, mu_lo, mu_hi, spec, cuts);
    r.window = std::pair{mu_lo, mu_hi};
  } else {
    cuts.push_back(mu_lo - pad);
    cuts.push_back(mu_hi + pad);
    q = integrate_adaptive(integrand, -kInf, kInf, spec, cuts);
    r.window = std::pair{mu_lo - pad, mu_hi + pad};
  }
  r.value = q.value;
  r.abs_error_estimate = q.abs_error;
  r.n_evaluations = q.n_evaluations;
  return r;
}

CurrentResult evaluate_method(Method method, const JunctionModel& junction, const BiasSpec& bias,
                              const QuadratureSpec& spec,
                              const std::optional<ContinuumJunction>& continuum) {
  switch (method) {
    case Method::General: return current_general(junction, bias, spec);
    case Method::NonInteracting: return current_noninteracting(junction, bias, spec);
    case Method::PcIntegral: return current_pc_integral(junction, bias, spec);
    case Method::PcAnalytic: return current_pc_analytic(junction, bias);
    case Method::WeakGamma: return current_weak_gamma(junction, bias);
    case Method::StrongGamma: return current_strong_gamma(junction, bias);
    case Method::LandauerContinuum: {
      if (!continuum) {
        throw Error(ErrorCode::InvalidParameter,
                    "landauer_continuum needs a continuum description of the leads");
      }
      const auto res = continuum_resonances(*continuum);
      return current_landauer_continuum(continuum_transmission(*continuum), bias, spec, res);
    }
    case Method::OccupancyLargeGamma: {
      require_markovian(junction, "the large-gamma occupancy identity");
      const auto c = solve_steady_c(assemble_dynamics(junction, bias));
      return current_occupancy_large_gamma(junction, bias, system_occupations(c));
    }
    case Method::Lyapunov: return current_lyapunov(junction, bias);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown method");
}

MethodOutcome try_method(Method method, const JunctionModel& junction, const BiasSpec& bias,
                         const QuadratureSpec& spec,
                         const std::optional<ContinuumJunction>& continuum) {
  MethodOutcome out;
  out.method = method;
  try {
    out.result = evaluate_method(method, junction, bias, spec, continuum);
  } catch (const Error& e) {
    out.error = e.code();
    out.message = e.what();
  }
  return out;
}

SweepResult kramers_sweep(const JunctionModel& junction, const BiasSpec& bias,
                          std::span<const double> gamma_scales, std::span<const Method> methods,
                          const QuadratureSpec& spec) {
  SweepResult out;
  out.parameter_name = "gamma_scale";
  out.rows.reserve(gamma_scales.size());
  for (double s : gamma_scales) {
    SweepRow row;
    row.parameter = s;
    try {
      const JunctionModel scaled = junction.with_gamma_scale(s);
      for (Method m : methods) row.outcomes.push_back(try_method(m, scaled, bias, spec));
    } catch (const Error& e) {
      for (Method m : methods) row.outcomes.push_back({m, std::nullopt, e.code(), e.what()});
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace erqt
