#pragma once

// Frequency-domain objects of the wide-band extended-reservoir junction:
// isolated-mode Green's functions, reservoir self-energies, the system
// retarded/advanced/lesser Green's functions and the (weighted) spectral
// densities. Conventions: g^r_k(z) = 1 / (z - omega_k + i gamma_k / 2) and
// G^r(z) = (z - H_S - Sigma^r(z))^{-1}; every matrix is N_S x N_S.

#include <functional>

#include <Eigen/Dense>

#include "erqt/model.hpp"

namespace erqt {

/// Maps a complex frequency z (Im z >= 0 for retarded use) to G^r(z).
/// Providers must satisfy G^a(z) = G^r(conj z)^dagger.
using GreensProvider = std::function<Eigen::MatrixXcd(cplx)>;

struct SpectralDensityPair {
  Eigen::MatrixXcd gamma_left;
  Eigen::MatrixXcd gamma_right;
  Eigen::MatrixXcd gamma_tilde_left;
  Eigen::MatrixXcd gamma_tilde_right;
};

cplx mode_gr(const ReservoirMode& mode, cplx z);
cplx mode_ga(const ReservoirMode& mode, cplx z);

/// Purely imaginary, Im >= 0: i gamma f~ / ((w - w_k)^2 + gamma^2 / 4).
cplx mode_glesser(const ReservoirMode& mode, double omega, Side side, const BiasSpec& bias,
                  RelaxationKind kind);

/// Lorentzian gamma_k / ((w - w_k)^2 + gamma_k^2 / 4) = i (g^r - g^a) on the real axis.
double mode_lorentzian(const ReservoirMode& mode, double omega);

Eigen::MatrixXcd self_energy_r(const JunctionModel& junction, cplx z);
/// Contribution of one reservoir only.
Eigen::MatrixXcd self_energy_r(const Reservoir& reservoir, Eigen::Index n_system, cplx z);
/// (1 + lambda) times the left-only sum. Caller guarantees proportional coupling.
Eigen::MatrixXcd self_energy_r_proportional(const JunctionModel& junction, double lambda, cplx z);

Eigen::MatrixXcd system_gr(const JunctionModel& junction, cplx z);
Eigen::MatrixXcd system_ga(const JunctionModel& junction, cplx z);

/// Built-in provider: non-interacting G^r of `junction` (copied).
GreensProvider noninteracting_provider(const JunctionModel& junction);

SpectralDensityPair spectral_densities(const JunctionModel& junction, double omega,
                                       const BiasSpec& bias);

/// Keldysh closure G^< = i G^r (Gamma~_L + Gamma~_R) G^a.
Eigen::MatrixXcd system_glesser(const JunctionModel& junction, double omega, const BiasSpec& bias);

/// Delta Gamma~(w) = sum over left modes of (f~_L - f~_R) v v^dagger times the
/// mode Lorentzian. Throws NotProportional unless the junction is proportional.
Eigen::MatrixXcd delta_gamma_tilde(const JunctionModel& junction, double omega,
                                   const BiasSpec& bias);

/// Poles of G^r in the lower half plane: eigenvalues of the full single-particle
/// Hamiltonian with each reservoir level shifted by -i gamma_k / 2.
Eigen::VectorXcd retarded_poles(const JunctionModel& junction);

}  // namespace erqt
