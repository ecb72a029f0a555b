#pragma once

// Seeded random junctions for property tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "erqt/model.hpp"

namespace erqt::testing {

struct RandomJunctionShape {
  int max_sites = 4;
  int max_modes = 40;
  double omega_span = 2.0;  // omega_k uniform in [-span, span]
  double gamma_min = 0.05;
  double gamma_max = 0.8;
  double coupling_scale = 0.3;
};

inline Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  }
  return 0.5 * (m + m.adjoint());
}

inline Reservoir random_reservoir(std::mt19937_64& rng, Side side, int n_system, int n_modes,
                                  const RandomJunctionShape& shape) {
  std::uniform_real_distribution<double> w(-shape.omega_span, shape.omega_span);
  std::uniform_real_distribution<double> lg(std::log(shape.gamma_min), std::log(shape.gamma_max));
  std::normal_distribution<double> g(0.0, shape.coupling_scale / std::sqrt(double(n_modes)));
  std::vector<ReservoirMode> modes;
  for (int k = 0; k < n_modes; ++k) {
    Eigen::VectorXcd v(n_system);
    for (int i = 0; i < n_system; ++i) v[i] = {g(rng), g(rng)};
    const double omega = w(rng);
    const double gamma = std::exp(lg(rng));
    modes.emplace_back(omega, gamma, v);
  }
  return Reservoir(side, std::move(modes));
}

inline JunctionModel random_junction(std::mt19937_64& rng, bool proportional, RelaxationKind kind,
                                     const RandomJunctionShape& shape = {}) {
  std::uniform_int_distribution<int> ns(1, shape.max_sites);
  std::uniform_int_distribution<int> nm(1, shape.max_modes);
  const int n = ns(rng);
  const Eigen::MatrixXcd h = random_hermitian(rng, n, 0.5);
  Reservoir left = random_reservoir(rng, Side::Left, n, nm(rng), shape);
  if (proportional) {
    std::uniform_real_distribution<double> lam(0.2, 3.0);
    Reservoir right = make_proportional_right(left, lam(rng));
    return JunctionModel(h, std::move(left), std::move(right), kind);
  }
  Reservoir right = random_reservoir(rng, Side::Right, n, nm(rng), shape);
  return JunctionModel(h, std::move(left), std::move(right), kind);
}

inline BiasSpec random_bias(std::mt19937_64& rng) {
  constexpr std::array<double, 3> temps = {0.0, 0.05, 0.5};
  std::uniform_real_distribution<double> mu(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const double mu_l = mu(rng), mu_r = mu(rng);
  const double t_l = temps[std::size_t(pick(rng))];
  const double t_r = temps[std::size_t(pick(rng))];
  return BiasSpec(mu_l, mu_r, t_l, t_r);
}

}  // namespace erqt::testing
