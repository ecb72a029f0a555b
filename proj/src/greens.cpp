#include "erqt/greens.hpp"

#include <sstream>

#include "erqt/error.hpp"
#include "erqt/steadystate.hpp"

namespace erqt {

namespace {

constexpr cplx kI{0.0, 1.0};

// Reciprocal condition estimate below which (z - H - Sigma) counts as singular.
constexpr double kSingularRcond = 1e-14;

}  // namespace

cplx mode_gr(const ReservoirMode& mode, cplx z) {
  return 1.0 / (z - mode.omega() + kI * (0.5 * mode.gamma()));
}

cplx mode_ga(const ReservoirMode& mode, cplx z) {
  return 1.0 / (z - mode.omega() - kI * (0.5 * mode.gamma()));
}

double mode_lorentzian(const ReservoirMode& mode, double omega) {
  const double d = omega - mode.omega();
  const double g = mode.gamma();
  return g / (d * d + 0.25 * g * g);
}

cplx mode_glesser(const ReservoirMode& mode, double omega, Side side, const BiasSpec& bias,
                  RelaxationKind kind) {
  return kI * (f_tilde(mode, omega, side, bias, kind) * mode_lorentzian(mode, omega));
}

Eigen::MatrixXcd self_energy_r(const Reservoir& reservoir, Eigen::Index n_system, cplx z) {
  Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(n_system, n_system);
  for (const auto& m : reservoir.modes()) {
    sigma.noalias() += mode_gr(m, z) * (m.coupling() * m.coupling().adjoint());
  }
  return sigma;
}

Eigen::MatrixXcd self_energy_r(const JunctionModel& junction, cplx z) {
  const auto n = junction.system_size();
  return self_energy_r(junction.left(), n, z) + self_energy_r(junction.right(), n, z);
}

Eigen::MatrixXcd self_energy_r_proportional(const JunctionModel& junction, double lambda, cplx z) {
  return (1.0 + lambda) * self_energy_r(junction.left(), junction.system_size(), z);
}

Eigen::MatrixXcd system_gr(const JunctionModel& junction, cplx z) {
  const auto n = junction.system_size();
  Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - junction.system_hamiltonian() -
                       self_energy_r(junction, z);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > kSingularRcond)) {
    std::ostringstream os;
    os << "z - H_S - Sigma^r(z) is singular at z = " << z << " (rcond " << rcond << ")";
    throw Error(ErrorCode::SingularMatrix, os.str());
  }
  return lu.solve(Eigen::MatrixXcd::Identity(n, n));
}

Eigen::MatrixXcd system_ga(const JunctionModel& junction, cplx z) {
  return system_gr(junction, std::conj(z)).adjoint();
}

GreensProvider noninteracting_provider(const JunctionModel& junction) {
  return [junction](cplx z) { return system_gr(junction, z); };
}

SpectralDensityPair spectral_densities(const JunctionModel& junction, double omega,
                                       const BiasSpec& bias) {
  const auto n = junction.system_size();
  SpectralDensityPair out{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n),
                          Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n)};
  for (Side side : {Side::Left, Side::Right}) {
    auto& g = side == Side::Left ? out.gamma_left : out.gamma_right;
    auto& gt = side == Side::Left ? out.gamma_tilde_left : out.gamma_tilde_right;
    for (const auto& m : junction.reservoir(side).modes()) {
      const Eigen::MatrixXcd vv = m.coupling() * m.coupling().adjoint();
      const double lor = mode_lorentzian(m, omega);
      g.noalias() += lor * vv;
      gt.noalias() += (lor * f_tilde(m, omega, side, bias, junction.kind())) * vv;
    }
  }
  return out;
}

Eigen::MatrixXcd system_glesser(const JunctionModel& junction, double omega, const BiasSpec& bias) {
  const Eigen::MatrixXcd gr = system_gr(junction, omega);
  const auto sd = spectral_densities(junction, omega, bias);
  return kI * (gr * (sd.gamma_tilde_left + sd.gamma_tilde_right) * gr.adjoint());
}

Eigen::MatrixXcd delta_gamma_tilde(const JunctionModel& junction, double omega,
                                   const BiasSpec& bias) {
  if (!check_proportionality(junction).is_proportional) {
    throw Error(ErrorCode::NotProportional, "Delta Gamma~ requires proportional coupling");
  }
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

Eigen::VectorXcd retarded_poles(const JunctionModel& junction) {
  const SiteLayout layout(junction);
  const Eigen::MatrixXcd h = full_hamiltonian(junction);
  Eigen::MatrixXcd m = h;
  for (Eigen::Index p = 0; p < layout.total(); ++p) {
    m(p, p) -= kI * (0.5 * layout.gamma(p));
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues();
}

}  // namespace erqt
