#pragma once

// Direct steady state of the single-particle (DLvN / Lindblad) correlation
// matrix equation. Sites are ordered [left modes, system sites, right modes].
//
// The stored matrix X has X(n, m) = <c_m^dagger c_n>, which evolves as
//   dX/dt = A X + X A^dagger + Q,   A = -i h - D / 2,
// with h the full single-particle Hamiltonian, D = diag(gamma_k) on reservoir
// rows and Q = diag(gamma_k f(omega_k)). The steady state solves the Lyapunov
// equation A X + X A^dagger + Q = 0.

#include <vector>

#include <Eigen/Dense>

#include "erqt/model.hpp"
#include "erqt/result.hpp"

namespace erqt {

/// Index bookkeeping for the [L, S, R] ordering.
class SiteLayout {
 public:
  explicit SiteLayout(const JunctionModel& junction);

  Eigen::Index n_left() const { return n_left_; }
  Eigen::Index n_system() const { return n_system_; }
  Eigen::Index n_right() const { return n_right_; }
  Eigen::Index total() const { return n_left_ + n_system_ + n_right_; }

  Eigen::Index system_offset() const { return n_left_; }
  Eigen::Index mode_index(Side side, std::size_t k) const;
  /// Relaxation rate on row p (0 for system sites).
  double gamma(Eigen::Index p) const { return gamma_[static_cast<std::size_t>(p)]; }

 private:
  Eigen::Index n_left_, n_system_, n_right_;
  std::vector<double> gamma_;
};

/// Full single-particle Hamiltonian h on [L, S, R].
Eigen::MatrixXcd full_hamiltonian(const JunctionModel& junction);

struct DynamicsOperator {
  Eigen::MatrixXcd a;   // -i h - D/2
  Eigen::VectorXd q;    // diagonal of Q
  Eigen::Index n_left = 0, n_system = 0, n_right = 0;

  Eigen::MatrixXd q_matrix() const { return q.asDiagonal(); }
};

DynamicsOperator assemble_dynamics(const JunctionModel& junction, const BiasSpec& bias);

struct CorrelationMatrix {
  Eigen::MatrixXcd x;  // x(n, m) = <c_m^dagger c_n>
  Eigen::Index n_left = 0, n_system = 0, n_right = 0;
  bool used_schur = false;
  double eigvec_condition = 0.0;  // 0 when the eigen route was skipped
  double residual = 0.0;          // max |A X + X A^dagger + Q|

  Eigen::Index size() const { return x.rows(); }
  /// <c_a^dagger c_b>
  cplx expectation(Eigen::Index a, Eigen::Index b) const { return x(b, a); }
};

struct SteadyStateOptions {
  double eigvec_condition_limit = 1e8;
  double residual_tol = 1e-10;  // relative to max |Q|
  bool force_schur = false;
};

CorrelationMatrix solve_steady_c(const DynamicsOperator& dyn, const SteadyStateOptions& options = {});

/// Bartels-Stewart style solve of A X + X A^dagger = -Q via the complex Schur form.
Eigen::MatrixXcd solve_lyapunov_schur(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q);
/// Same equation through the eigendecomposition of A; returns cond(V) through `condition`.
Eigen::MatrixXcd solve_lyapunov_eigen(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q,
                                      double& condition);

/// Particle current entering the system from `side`.
CurrentResult current_from_c(const JunctionModel& junction, const CorrelationMatrix& c, Side side);

/// Real diagonal of X, length N.
Eigen::VectorXd occupations(const CorrelationMatrix& c);
/// Diagonal restricted to system sites.
Eigen::VectorXd system_occupations(const CorrelationMatrix& c);

/// Smallest and largest eigenvalue of the Hermitian matrix X.
std::pair<double, double> eigenvalue_range(const CorrelationMatrix& c);

/// Fixed-step RK4 integration of dX/dt = A X + X A^dagger + Q.
CorrelationMatrix propagate_transient(const DynamicsOperator& dyn, const CorrelationMatrix& c0,
                                      double t_final, double dt);

/// assemble_dynamics + solve_steady_c + current_from_c(Left).
CurrentResult current_lyapunov(const JunctionModel& junction, const BiasSpec& bias);

}  // namespace erqt
