#include "erqt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "erqt/error.hpp"

namespace erqt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidBias: return "invalid_bias";
    case ErrorCode::InvalidParameter: return "invalid_parameter";
    case ErrorCode::NotProportional: return "not_proportional";
    case ErrorCode::UnsupportedKind: return "unsupported_kind";
    case ErrorCode::SingularMatrix: return "singular_matrix";
    case ErrorCode::QuadratureFailure: return "quadrature_failure";
    case ErrorCode::UndampedSubspace: return "undamped_subspace";
    case ErrorCode::InvalidOccupancy: return "invalid_occupancy";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::StepSize: return "step_size";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::Io: return "io_error";
  }
  return "error";
}

namespace {

// Mixed relative/absolute comparison for mode energies and rates.
bool nearly_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

constexpr double kProportionalityTol = 1e-10;
constexpr double kHermiticityTol = 1e-12;

}  // namespace

ReservoirMode::ReservoirMode(double omega, double gamma, Eigen::VectorXcd coupling)
    : omega_(omega), gamma_(gamma), coupling_(std::move(coupling)) {
  if (!std::isfinite(omega_)) throw Error(ErrorCode::InvalidParameter, "mode omega must be finite");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw Error(ErrorCode::InvalidParameter, "mode gamma must be finite and > 0");
  }
  if (!coupling_.allFinite()) {
    throw Error(ErrorCode::InvalidParameter, "mode coupling must be finite");
  }
}

Reservoir::Reservoir(Side label, std::vector<ReservoirMode> modes)
    : label_(label), modes_(std::move(modes)) {}

BiasSpec::BiasSpec(double mu_left, double mu_right, double t_left, double t_right)
    : mu_l_(mu_left), mu_r_(mu_right), t_l_(t_left), t_r_(t_right) {
  if (!std::isfinite(mu_l_) || !std::isfinite(mu_r_)) {
    throw Error(ErrorCode::InvalidBias, "chemical potentials must be finite");
  }
  if (!(t_l_ >= 0.0) || !(t_r_ >= 0.0) || !std::isfinite(t_l_) || !std::isfinite(t_r_)) {
    throw Error(ErrorCode::InvalidBias, "temperatures must be finite and >= 0");
  }
}

JunctionModel::JunctionModel(Eigen::MatrixXcd system_hamiltonian, Reservoir left, Reservoir right,
                             RelaxationKind kind)
    : h_s_(std::move(system_hamiltonian)),
      left_(std::move(left)),
      right_(std::move(right)),
      kind_(kind) {
  if (h_s_.rows() != h_s_.cols() || h_s_.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "system Hamiltonian must be square and nonempty");
  }
  if (!h_s_.allFinite()) throw Error(ErrorCode::InvalidParameter, "system Hamiltonian not finite");
  const double scale = h_s_.cwiseAbs().maxCoeff();
  const double asym = (h_s_ - h_s_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermiticityTol * scale) {
    std::ostringstream os;
    os << "system Hamiltonian is not Hermitian (max |H - H^dagger| = " << asym << ")";
    throw Error(ErrorCode::InvalidParameter, os.str());
  }
  // Symmetrize away the tolerated round-off so downstream code sees exact Hermiticity.
  h_s_ = (0.5 * (h_s_ + h_s_.adjoint())).eval();
  if (left_.label() != Side::Left || right_.label() != Side::Right) {
    throw Error(ErrorCode::InvalidParameter, "reservoir labels must be (Left, Right)");
  }
  for (const Reservoir* r : {&left_, &right_}) {
    for (std::size_t k = 0; k < r->size(); ++k) {
      if (r->modes()[k].coupling().size() != h_s_.rows()) {
        std::ostringstream os;
        os << (r->label() == Side::Left ? "left" : "right") << " mode " << k
           << ": coupling length " << r->modes()[k].coupling().size() << " != system size "
           << h_s_.rows();
        throw Error(ErrorCode::DimensionMismatch, os.str());
      }
    }
  }
}

JunctionModel JunctionModel::swapped() const {
  return JunctionModel(h_s_, Reservoir(Side::Left, right_.modes()),
                       Reservoir(Side::Right, left_.modes()), kind_);
}

JunctionModel JunctionModel::with_gamma_scale(double scale) const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidParameter, "gamma scale must be finite and > 0");
  }
  auto scaled = [scale](const Reservoir& r) {
    std::vector<ReservoirMode> modes;
    modes.reserve(r.size());
    for (const auto& m : r.modes()) modes.emplace_back(m.omega(), m.gamma() * scale, m.coupling());
    return Reservoir(r.label(), std::move(modes));
  };
  return JunctionModel(h_s_, scaled(left_), scaled(right_), kind_);
}

JunctionModel JunctionModel::with_kind(RelaxationKind kind) const {
  return JunctionModel(h_s_, left_, right_, kind);
}

double fermi(double omega, double mu, double temperature) {
  if (!(temperature >= 0.0)) throw Error(ErrorCode::InvalidBias, "temperature must be >= 0");
  const double x = omega - mu;
  if (temperature == 0.0) {
    if (x < 0.0) return 1.0;
    if (x > 0.0) return 0.0;
    return 0.5;
  }
  const double y = x / temperature;
  if (y > 0.0) {
    const double e = std::exp(-y);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(y));
}

double f_tilde(const ReservoirMode& mode, double omega, Side side, const BiasSpec& bias,
               RelaxationKind kind) {
  const double at = kind == RelaxationKind::Markovian ? mode.omega() : omega;
  return fermi(at, bias.mu(side), bias.temperature(side));
}

Reservoir make_proportional_right(const Reservoir& left, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidParameter, "lambda must be finite and >= 0");
  }
  const double s = std::sqrt(lambda);
  std::vector<ReservoirMode> modes;
  modes.reserve(left.size());
  for (const auto& m : left.modes()) modes.emplace_back(m.omega(), m.gamma(), s * m.coupling());
  return Reservoir(Side::Right, std::move(modes));
}

ProportionalityReport check_proportionality(const JunctionModel& junction) {
  const auto& l = junction.left().modes();
  const auto& r = junction.right().modes();
  if (l.size() != r.size()) return {};
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (!nearly_equal(l[k].omega(), r[k].omega(), kProportionalityTol) ||
        !nearly_equal(l[k].gamma(), r[k].gamma(), kProportionalityTol)) {
      return {};
    }
  }

  // lambda from the first mode whose left coupling is nonzero.
  double lambda = -1.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    const double nl = l[k].coupling().squaredNorm();
    if (nl > 0.0) {
      lambda = r[k].coupling().squaredNorm() / nl;
      break;
    }
  }
  if (lambda < 0.0) {
    // No left coupling at all: proportional only if the right side is dark too.
    for (const auto& m : r) {
      if (m.coupling().squaredNorm() > 0.0) return {};
    }
    return {true, 1.0};
  }

  const double s = std::sqrt(lambda);
  for (std::size_t k = 0; k < l.size(); ++k) {
    const Eigen::VectorXcd expected = s * l[k].coupling();
    const double scale = std::max(expected.norm(), r[k].coupling().norm());
    if ((r[k].coupling() - expected).norm() > kProportionalityTol * scale) return {};
  }
  return {true, lambda};
}

BandProfile::BandProfile(double lo, double hi, std::vector<double> samples)
    : lo_(lo), hi_(hi), samples_(std::move(samples)) {
  if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_)) {
    throw Error(ErrorCode::InvalidParameter, "band range must satisfy omega_min < omega_max");
  }
  if (samples_.empty()) throw Error(ErrorCode::InvalidParameter, "band profile has no samples");
  for (double s : samples_) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::InvalidParameter, "band profile must be finite and nonnegative");
    }
  }
}

BandProfile BandProfile::flat(double gamma0, double omega_min, double omega_max) {
  return BandProfile(omega_min, omega_max, {gamma0});
}

BandProfile BandProfile::tabulated(double omega_min, double omega_max, std::vector<double> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InvalidParameter, "tabulated profile needs at least two samples");
  }
  return BandProfile(omega_min, omega_max, std::move(samples));
}

double BandProfile::operator()(double omega) const {
  if (omega < lo_ || omega > hi_) return 0.0;
  if (samples_.size() == 1) return samples_.front();
  const double pos = (omega - lo_) / (hi_ - lo_) * static_cast<double>(samples_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * samples_[i] + t * samples_[i + 1];
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  if (n == 0) return;
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n, starting from the usual cosine estimate of the i-th root.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p_prev = 1.0, p = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p_next = ((2.0 * dk - 1.0) * x * p - (dk - 1.0) * p_prev) / dk;
        p_prev = p;
        p = p_next;
      }
      dp = dn * (x * p - p_prev) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

Reservoir discretize_band(Side label, const BandProfile& profile, std::size_t n_modes,
                          BandScheme scheme, GammaRule gamma_rule, Eigen::Index site,
                          Eigen::Index n_system) {
  if (n_modes == 0) throw Error(ErrorCode::InvalidParameter, "band needs at least one mode");
  if (site < 0 || site >= n_system) {
    throw Error(ErrorCode::InvalidParameter, "band coupling site out of range");
  }
  if (!(gamma_rule.c > 0.0)) throw Error(ErrorCode::InvalidParameter, "gamma rule constant must be > 0");

  const double lo = profile.omega_min();
  const double hi = profile.omega_max();
  std::vector<double> grid(n_modes), width(n_modes);
  if (scheme == BandScheme::Uniform) {
    const double dw = (hi - lo) / static_cast<double>(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
      grid[k] = lo + (static_cast<double>(k) + 0.5) * dw;
      width[k] = dw;
    }
  } else {
    std::vector<double> x, w;
    gauss_legendre(n_modes, x, w);
    const double half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < n_modes; ++k) {
      grid[k] = lo + half * (x[k] + 1.0);
      width[k] = half * w[k];
    }
  }

  std::vector<ReservoirMode> modes;
  modes.reserve(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_system);
    v[site] = std::sqrt(profile(grid[k]) * width[k] / (2.0 * std::numbers::pi));
    const double gamma =
        gamma_rule.kind == GammaRule::Kind::Constant ? gamma_rule.c : gamma_rule.c * width[k];
    modes.emplace_back(grid[k], gamma, std::move(v));
  }
  return Reservoir(label, std::move(modes));
}

}  // namespace erqt
