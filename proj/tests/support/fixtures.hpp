#pragma once

#include <Eigen/Dense>

#include "erqt/model.hpp"

namespace erqt::testing {

// Single level at 0, one mode per side at 0, proportional with lambda.
inline JunctionModel single_level(double gamma = 0.2, double v = 0.1, double lambda = 1.0,
                                  double eps = 0.0, double omega0 = 0.0,
                                  RelaxationKind kind = RelaxationKind::Markovian) {
  Eigen::MatrixXcd h(1, 1);
  h(0, 0) = eps;
  Eigen::VectorXcd c(1);
  c[0] = v;
  Reservoir left(Side::Left, {ReservoirMode(omega0, gamma, c)});
  Reservoir right = make_proportional_right(left, lambda);
  return JunctionModel(h, left, right, kind);
}

inline BiasSpec benchmark_bias() { return BiasSpec(0.5, -0.5, 0.0, 0.0); }

}  // namespace erqt::testing
