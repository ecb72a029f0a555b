#pragma once

// Junction data model. Natural units throughout: hbar = e = 1, temperatures
// are k_B T, and every energy, rate and temperature shares one unit. Currents
// come out in e * (energy unit) / hbar.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace erqt {

using cplx = std::complex<double>;

enum class Side { Left, Right };

enum class RelaxationKind { Markovian, NonMarkovianWideBand };

/// One extended-reservoir mode. `coupling()[i]` is the hopping amplitude that
/// multiplies c_i^dagger c_k in the Hamiltonian (system site i, mode k).
class ReservoirMode {
 public:
  ReservoirMode(double omega, double gamma, Eigen::VectorXcd coupling);

  double omega() const { return omega_; }
  double gamma() const { return gamma_; }
  const Eigen::VectorXcd& coupling() const { return coupling_; }

 private:
  double omega_;
  double gamma_;
  Eigen::VectorXcd coupling_;
};

class Reservoir {
 public:
  Reservoir(Side label, std::vector<ReservoirMode> modes);

  Side label() const { return label_; }
  const std::vector<ReservoirMode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }

 private:
  Side label_;
  std::vector<ReservoirMode> modes_;
};

/// Chemical potentials and temperatures of the two reservoirs. T = 0 selects
/// the exact step occupation.
class BiasSpec {
 public:
  BiasSpec(double mu_left, double mu_right, double t_left, double t_right);

  double mu(Side side) const { return side == Side::Left ? mu_l_ : mu_r_; }
  double temperature(Side side) const { return side == Side::Left ? t_l_ : t_r_; }
  double mu_left() const { return mu_l_; }
  double mu_right() const { return mu_r_; }
  double t_left() const { return t_l_; }
  double t_right() const { return t_r_; }

  /// Same bias seen from the mirrored junction.
  BiasSpec swapped() const { return {mu_r_, mu_l_, t_r_, t_l_}; }

 private:
  double mu_l_, mu_r_, t_l_, t_r_;
};

class JunctionModel {
 public:
  JunctionModel(Eigen::MatrixXcd system_hamiltonian, Reservoir left, Reservoir right,
                RelaxationKind kind);

  const Eigen::MatrixXcd& system_hamiltonian() const { return h_s_; }
  const Reservoir& left() const { return left_; }
  const Reservoir& right() const { return right_; }
  const Reservoir& reservoir(Side side) const { return side == Side::Left ? left_ : right_; }
  RelaxationKind kind() const { return kind_; }
  Eigen::Index system_size() const { return h_s_.rows(); }
  std::size_t mode_count() const { return left_.size() + right_.size(); }

  /// Mirror image: reservoirs exchanged, labels updated.
  JunctionModel swapped() const;
  /// Every relaxation rate multiplied by `scale` (> 0).
  JunctionModel with_gamma_scale(double scale) const;
  JunctionModel with_kind(RelaxationKind kind) const;

 private:
  Eigen::MatrixXcd h_s_;
  Reservoir left_;
  Reservoir right_;
  RelaxationKind kind_;
};

struct ProportionalityReport {
  bool is_proportional = false;
  double lambda = 0.0;  // meaningful only when is_proportional
};

double fermi(double omega, double mu, double temperature);

/// Occupation weight attached to a mode: f(omega_k) for Markovian relaxation,
/// f(omega) for the non-Markovian wide-band kind.
double f_tilde(const ReservoirMode& mode, double omega, Side side, const BiasSpec& bias,
               RelaxationKind kind);

Reservoir make_proportional_right(const Reservoir& left, double lambda);

ProportionalityReport check_proportionality(const JunctionModel& junction);

// Continuum band discretization ----------------------------------------------

/// Continuum coupling density Gamma(omega) >= 0 on [omega_min, omega_max],
/// either flat or tabulated on a uniform grid (linear interpolation).
class BandProfile {
 public:
  static BandProfile flat(double gamma0, double omega_min, double omega_max);
  static BandProfile tabulated(double omega_min, double omega_max, std::vector<double> samples);

  double operator()(double omega) const;
  double omega_min() const { return lo_; }
  double omega_max() const { return hi_; }
  bool is_flat() const { return samples_.size() == 1; }
  const std::vector<double>& samples() const { return samples_; }

 private:
  BandProfile(double lo, double hi, std::vector<double> samples);

  double lo_, hi_;
  std::vector<double> samples_;
};

enum class BandScheme { Uniform, MidpointGauss };

struct GammaRule {
  enum class Kind { Constant, SpacingProportional };
  Kind kind = Kind::Constant;
  double c = 0.0;  // gamma_k = c, or gamma_k = c * delta_omega_k

  bool operator==(const GammaRule&) const = default;
};

/// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// Modes at the grid points of `scheme` with |v_k|^2 = Gamma(omega_k) dw_k / 2pi,
/// coupled only to system site `site` of an `n_system`-site junction.
Reservoir discretize_band(Side label, const BandProfile& profile, std::size_t n_modes,
                          BandScheme scheme, GammaRule gamma_rule, Eigen::Index site,
                          Eigen::Index n_system);

}  // namespace erqt
