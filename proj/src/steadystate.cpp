#include "erqt/steadystate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "erqt/error.hpp"

namespace erqt {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kHurwitzRel = 1e-12;

double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd lyapunov_residual(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& x,
                                   const Eigen::VectorXd& q) {
  Eigen::MatrixXcd r = a * x + x * a.adjoint();
  r.diagonal() += q.cast<cplx>();
  return r;
}

void check_hurwitz(const Eigen::VectorXcd& eigenvalues, double a_norm) {
  const double eps = kHurwitzRel * std::max(a_norm, 1e-300);
  for (Eigen::Index p = 0; p < eigenvalues.size(); ++p) {
    if (!(eigenvalues[p].real() < -eps)) {
      std::ostringstream os;
      os << "dynamics operator has an undamped eigenvalue " << eigenvalues[p]
         << "; the steady state is not unique (a system level is decoupled from all damped modes)";
      throw Error(ErrorCode::UndampedSubspace, os.str());
    }
  }
}

}  // namespace

SiteLayout::SiteLayout(const JunctionModel& junction)
    : n_left_(static_cast<Eigen::Index>(junction.left().size())),
      n_system_(junction.system_size()),
      n_right_(static_cast<Eigen::Index>(junction.right().size())),
      gamma_(static_cast<std::size_t>(total()), 0.0) {
  for (std::size_t k = 0; k < junction.left().size(); ++k) {
    gamma_[static_cast<std::size_t>(mode_index(Side::Left, k))] = junction.left().modes()[k].gamma();
  }
  for (std::size_t k = 0; k < junction.right().size(); ++k) {
    gamma_[static_cast<std::size_t>(mode_index(Side::Right, k))] =
        junction.right().modes()[k].gamma();
  }
}

Eigen::Index SiteLayout::mode_index(Side side, std::size_t k) const {
  const auto kk = static_cast<Eigen::Index>(k);
  return side == Side::Left ? kk : n_left_ + n_system_ + kk;
}

Eigen::MatrixXcd full_hamiltonian(const JunctionModel& junction) {
  const SiteLayout layout(junction);
  const auto s0 = layout.system_offset();
  const auto ns = layout.n_system();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(layout.total(), layout.total());
  h.block(s0, s0, ns, ns) = junction.system_hamiltonian();
  for (Side side : {Side::Left, Side::Right}) {
    const auto& modes = junction.reservoir(side).modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto p = layout.mode_index(side, k);
      h(p, p) = modes[k].omega();
      // coupling()[i] multiplies c_i^dagger c_k.
      h.block(s0, p, ns, 1) = modes[k].coupling();
      h.block(p, s0, 1, ns) = modes[k].coupling().adjoint();
    }
  }
  return h;
}

DynamicsOperator assemble_dynamics(const JunctionModel& junction, const BiasSpec& bias) {
  if (junction.kind() != RelaxationKind::Markovian) {
    throw Error(ErrorCode::UnsupportedKind,
                "the correlation-matrix steady state exists only for Markovian relaxation");
  }
  const SiteLayout layout(junction);
  DynamicsOperator dyn;
  dyn.n_left = layout.n_left();
  dyn.n_system = layout.n_system();
  dyn.n_right = layout.n_right();
  dyn.a = -kI * full_hamiltonian(junction);
  dyn.q = Eigen::VectorXd::Zero(layout.total());
  for (Side side : {Side::Left, Side::Right}) {
    const auto& modes = junction.reservoir(side).modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto p = layout.mode_index(side, k);
      dyn.a(p, p) -= 0.5 * modes[k].gamma();
      // gamma_{k+} = gamma_k f(omega_k); gamma_{k-} enters only through gamma_k.
      dyn.q[p] = modes[k].gamma() * fermi(modes[k].omega(), bias.mu(side), bias.temperature(side));
    }
  }
  return dyn;
}

Eigen::MatrixXcd solve_lyapunov_schur(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q) {
  const auto n = a.rows();
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a);
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd& t = schur.matrixT();
  // T Y + Y T^dagger = F with F = -U^dagger Q U; column j depends on columns k > j.
  const Eigen::MatrixXcd f = -(u.adjoint() * q * u);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = f.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    Eigen::MatrixXcd shifted = t;
    shifted.diagonal().array() += std::conj(t(j, j));
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return u * y * u.adjoint();
}

namespace {

Eigen::MatrixXcd eigen_route(const Eigen::ComplexEigenSolver<Eigen::MatrixXcd>& es,
                             const Eigen::MatrixXcd& q, double& condition) {
  const Eigen::MatrixXcd& v = es.eigenvectors();
  const Eigen::VectorXcd& lam = es.eigenvalues();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(v);
  const auto& sv = svd.singularValues();
  condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;

  // In the eigenbasis Y = V^{-1} X V^{-dagger} decouples: Y_pq = -Q'_pq / (l_p + conj(l_q)).
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
  const Eigen::MatrixXcd w = lu.solve(q);
  Eigen::MatrixXcd qp = lu.solve(w.adjoint()).adjoint();
  const auto n = v.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      qp(row, col) /= -(lam[row] + std::conj(lam[col]));
    }
  }
  return v * qp * v.adjoint();
}

}  // namespace

Eigen::MatrixXcd solve_lyapunov_eigen(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& q,
                                      double& condition) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
  return eigen_route(es, q, condition);
}

CorrelationMatrix solve_steady_c(const DynamicsOperator& dyn, const SteadyStateOptions& options) {
  const auto n = dyn.a.rows();
  CorrelationMatrix out;
  out.n_left = dyn.n_left;
  out.n_system = dyn.n_system;
  out.n_right = dyn.n_right;
  if (n == 0) {
    out.x = Eigen::MatrixXcd::Zero(0, 0);
    return out;
  }

  const double a_norm = max_abs(dyn.a) * static_cast<double>(n);
  const Eigen::MatrixXcd q = dyn.q.cast<cplx>().asDiagonal();
  const double q_max = dyn.q.size() ? dyn.q.cwiseAbs().maxCoeff() : 0.0;
  const double tol = options.residual_tol * q_max;

  Eigen::MatrixXcd x;
  bool have = false;
  if (!options.force_schur) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dyn.a);
    check_hurwitz(es.eigenvalues(), a_norm);
    x = eigen_route(es, q, out.eigvec_condition);
    x = (0.5 * (x + x.adjoint())).eval();
    have = out.eigvec_condition <= options.eigvec_condition_limit &&
           max_abs(lyapunov_residual(dyn.a, x, dyn.q)) <= tol;
  }
  if (!have) {
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(dyn.a, false);
    check_hurwitz(schur.matrixT().diagonal(), a_norm);
    x = solve_lyapunov_schur(dyn.a, q);
    x = (0.5 * (x + x.adjoint())).eval();
    out.used_schur = true;
  }
  out.residual = max_abs(lyapunov_residual(dyn.a, x, dyn.q));
  if (out.residual > tol) {
    std::ostringstream os;
    os << "Lyapunov residual " << out.residual << " exceeds " << tol;
    throw Error(ErrorCode::SingularMatrix, os.str());
  }
  out.x = std::move(x);
  return out;
}

CurrentResult current_from_c(const JunctionModel& junction, const CorrelationMatrix& c, Side side) {
  const SiteLayout layout(junction);
  if (c.size() != layout.total() || c.n_left != layout.n_left() ||
      c.n_system != layout.n_system() || c.n_right != layout.n_right()) {
    throw Error(ErrorCode::DimensionMismatch, "correlation matrix does not match the junction layout");
  }
  const auto s0 = layout.system_offset();
  double sum = 0.0;
  const auto& modes = junction.reservoir(side).modes();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto p = layout.mode_index(side, k);
    for (Eigen::Index j = 0; j < layout.n_system(); ++j) {
      // v_kj multiplies c_k^dagger c_j.
      const cplx v_kj = std::conj(modes[k].coupling()[j]);
      sum += (v_kj * c.expectation(p, s0 + j)).imag();
    }
  }
  CurrentResult r;
  r.value = -2.0 * sum;
  r.method = Method::Lyapunov;
  if (c.used_schur) r.diagnostics.emplace_back("schur_fallback");
  return r;
}

Eigen::VectorXd occupations(const CorrelationMatrix& c) {
  const Eigen::VectorXcd d = c.x.diagonal();
  if (d.size() && d.imag().cwiseAbs().maxCoeff() >= 1e-12) {
    throw Error(ErrorCode::InvalidOccupancy, "correlation matrix has a complex diagonal");
  }
  return d.real();
}

Eigen::VectorXd system_occupations(const CorrelationMatrix& c) {
  return occupations(c).segment(c.n_left, c.n_system);
}

std::pair<double, double> eigenvalue_range(const CorrelationMatrix& c) {
  if (c.size() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c.x, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

CorrelationMatrix propagate_transient(const DynamicsOperator& dyn, const CorrelationMatrix& c0,
                                      double t_final, double dt) {
  if (c0.size() != dyn.a.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "initial correlation matrix has the wrong size");
  }
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw Error(ErrorCode::StepSize, "need dt > 0 and t_final >= 0");
  }
  const double a_norm =
      dyn.a.size() ? Eigen::BDCSVD<Eigen::MatrixXcd>(dyn.a).singularValues()[0] : 0.0;
  if (!(dt * a_norm < 0.1)) {
    std::ostringstream os;
    os << "dt * ||A|| = " << dt * a_norm << " violates the bound 0.1";
    throw Error(ErrorCode::StepSize, os.str());
  }

  const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
  const Eigen::MatrixXcd& a = dyn.a;
  const Eigen::MatrixXcd q = dyn.q.cast<cplx>().asDiagonal();
  auto rhs = [&](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
    return a * x + x * a.adjoint() + q;
  };

  CorrelationMatrix out = c0;
  Eigen::MatrixXcd x = c0.x;
  for (long s = 0; s < steps; ++s) {
    const Eigen::MatrixXcd k1 = rhs(x);
    const Eigen::MatrixXcd k2 = rhs(x + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = rhs(x + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x = (0.5 * (x + x.adjoint())).eval();
  }
  out.x = std::move(x);
  out.residual = max_abs(lyapunov_residual(dyn.a, out.x, dyn.q));
  return out;
}

CurrentResult current_lyapunov(const JunctionModel& junction, const BiasSpec& bias) {
  const auto c = solve_steady_c(assemble_dynamics(junction, bias));
  return current_from_c(junction, c, Side::Left);
}

}  // namespace erqt
