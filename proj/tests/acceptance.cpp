// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "erqt/current.hpp"
#include "erqt/greens.hpp"
#include "erqt/steadystate.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/random_junction.hpp"

using namespace erqt;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1. Benchmark triple agreement.
Verdict benchmark() {
  const auto t0 = Clock::now();
  const auto j = testing::single_level();
  const auto bias = testing::benchmark_bias();
  Verdict v;
  const double analytic = current_pc_analytic(j, bias).value;
  v.pass = std::abs(analytic - 0.05) <= 1e-15;
  double worst = 0.0;
  for (double x : {current_pc_integral(j, bias).value, current_noninteracting(j, bias).value,
                   current_general(j, bias).value, current_lyapunov(j, bias).value}) {
    worst = std::max(worst, rel(x, 0.05));
  }
  const double t = seconds_since(t0);
  v.pass = v.pass && worst <= 1e-6 && t < 1.0;
  v.detail = fmt("pc_analytic=%.17g worst rel dev=%.2e time=%.3fs", analytic, worst, t);
  return v;
}

// 2. Randomized cross-oracle on 200 junctions.
Verdict cross_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  const QuadratureSpec spec;
  constexpr double kZeroFloor = 1e-13;
  int failures = 0, invariant_failures = 0, comparisons = 0, zero_pairs = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 200; ++i) {
    const bool pc = i % 2 == 0;
    const auto j = testing::random_junction(rng, pc, RelaxationKind::Markovian);
    const auto bias = testing::random_bias(rng);
    std::vector<CurrentResult> results = {current_general(j, bias, spec),
                                          current_noninteracting(j, bias, spec)};
    if (pc) {
      results.push_back(current_pc_integral(j, bias, spec));
      results.push_back(current_pc_analytic(j, bias));
    }
    const auto dyn = assemble_dynamics(j, bias);
    const auto c = solve_steady_c(dyn);
    results.push_back(current_from_c(j, c, Side::Left));

    for (std::size_t a = 0; a < results.size(); ++a) {
      for (std::size_t b = a + 1; b < results.size(); ++b) {
        const double x = results[a].value, y = results[b].value;
        ++comparisons;
        // A relative bound is empty when the exact current vanishes; two roundoff-level
        // values count as agreeing, everything else is held to the stated tolerance.
        if (std::max(std::abs(x), std::abs(y)) < kZeroFloor) {
          ++zero_pairs;
          continue;
        }
        const double tol = std::max(1e-6 * std::max(std::abs(x), std::abs(y)),
                                    10.0 * (results[a].abs_error_estimate + results[b].abs_error_estimate));
        worst_ratio = std::max(worst_ratio, std::abs(x - y) / tol);
        if (std::abs(x - y) > tol) ++failures;
      }
    }
    const auto [lo, hi] = eigenvalue_range(c);
    const Eigen::MatrixXcd q = dyn.q.cast<cplx>().asDiagonal();
    const double res = (dyn.a * c.x + c.x * dyn.a.adjoint() + q).cwiseAbs().maxCoeff();
    if (res >= 1e-10 * dyn.q.cwiseAbs().maxCoeff() || lo < -1e-10 || hi > 1.0 + 1e-10) ++invariant_failures;
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = failures == 0 && invariant_failures == 0 && t < 300.0;
  v.detail = fmt("%d/%d pairwise failures (%d pairs of exact-zero currents), worst |diff|/tol=%.3f, "
                 "%d invariant failures, time=%.1fs",
                 failures, comparisons, zero_pairs, worst_ratio, invariant_failures, t);
  return v;
}

// 3. Kramers turnover and asymptotic endpoints.
Verdict kramers() {
  const auto t0 = Clock::now();
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(std::pow(10.0, -3.0 + 6.0 * i / 24.0));
  const std::vector<Method> methods = {Method::Lyapunov, Method::PcAnalytic, Method::WeakGamma,
                                       Method::StrongGamma};
  const auto sweep = kramers_sweep(testing::single_level(), testing::benchmark_bias(), grid, methods);
  std::vector<double> curve;
  bool complete = true;
  for (const auto& row : sweep.rows) {
    for (const auto& o : row.outcomes) complete = complete && o.result.has_value();
    if (!complete) break;
    curve.push_back(row.outcomes[0].result->value);
  }
  Verdict v;
  if (!complete) return {false, "a sweep point failed"};
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    if (curve[i] > curve[i - 1] && curve[i] > curve[i + 1]) ++maxima;
  }
  int sign_changes = 0;
  for (std::size_t i = 0; i + 2 < curve.size(); ++i) {
    if ((curve[i + 1] > curve[i]) != (curve[i + 2] > curve[i + 1])) ++sign_changes;
  }
  const auto& first = sweep.rows.front().outcomes;
  const auto& last = sweep.rows.back().outcomes;
  const double weak_dev = rel(first[0].result->value, first[2].result->value);
  const double strong_dev = rel(last[0].result->value, last[3].result->value);
  // Independent check of the asymptotic predictions themselves.
  const double weak_pred = rel(first[2].result->value, 0.2 * 1e-3 / 2.0);
  const double strong_pred = rel(last[3].result->value, 0.02 / (1e3 * 0.2));
  const double t = seconds_since(t0);
  v.pass = maxima == 1 && sign_changes == 1 && weak_dev < 0.02 && strong_dev < 0.02 &&
           weak_pred < 1e-12 && strong_pred < 1e-12 && t < 30.0;
  v.detail = fmt("maxima=%d weak dev=%.2e strong dev=%.2e time=%.3fs", maxima, weak_dev, strong_dev, t);
  return v;
}

// 4. Flat-band discretization converges to the continuum Landauer current.
Verdict landauer() {
  const auto t0 = Clock::now();
  const double w = 2.0, g0 = 0.05;
  const auto bias = testing::benchmark_bias();
  const QuadratureSpec spec;
  ContinuumJunction cj{Eigen::MatrixXcd::Zero(1, 1), Eigen::MatrixXcd::Constant(1, 1, g0),
                       Eigen::MatrixXcd::Constant(1, 1, g0)};
  const auto lan = current_landauer_continuum(continuum_transmission(cj), bias, spec, continuum_resonances(cj));
  const double closed = oracle::landauer_single_level(0.0, g0, g0, 0.5, -0.5);
  const bool closed_ok = std::abs(lan.value - closed) <=
                         std::max(lan.abs_error_estimate, spec.abs_tol + spec.rel_tol * std::abs(closed));
  std::vector<double> err;
  std::string trail;
  for (std::size_t n : {8u, 16u, 32u, 64u, 128u}) {
    Reservoir left = discretize_band(Side::Left, BandProfile::flat(g0, -w, w), n, BandScheme::Uniform,
                                     {GammaRule::Kind::SpacingProportional, 1.0}, 0, 1);
    Reservoir right = make_proportional_right(left, 1.0);
    const JunctionModel j(Eigen::MatrixXcd::Zero(1, 1), left, right, RelaxationKind::Markovian);
    err.push_back(rel(current_lyapunov(j, bias).value, lan.value));
    trail += fmt("%s%.3g", trail.empty() ? "" : ",", err.back());
  }
  int inversions = 0;
  for (std::size_t i = 0; i + 1 < err.size(); ++i) inversions += err[i + 1] > err[i];
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = closed_ok && inversions <= 1 && err.back() < 0.03 && t < 120.0;
  v.detail = fmt("I_Landauer=%.12g (closed form %.12g) rel errors N=8..128: %s inversions=%d time=%.2fs",
                 lan.value, closed, trail.c_str(), inversions, t);
  return v;
}

// 5. Identity suites.
Verdict identities() {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-2.0, 2.0), lg(-3.0, 0.5);
  const double temps[] = {0.0, 0.05, 0.5};
  int lesser_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXcd c(1);
    c[0] = {u(rng), u(rng)};
    const ReservoirMode m(u(rng), std::pow(10.0, lg(rng)), c);
    const BiasSpec b(u(rng), u(rng), temps[i % 3], temps[(i / 3) % 3]);
    const auto kind = i % 2 ? RelaxationKind::Markovian : RelaxationKind::NonMarkovianWideBand;
    const Side side = (i / 2) % 2 ? Side::Left : Side::Right;
    const double w = u(rng);
    const cplx gl = mode_glesser(m, w, side, b, kind);
    const cplx ref = -f_tilde(m, w, side, b, kind) * (mode_gr(m, w) - mode_ga(m, w));
    if (std::abs(gl - ref) > 1e-14 * std::abs(gl)) ++lesser_fail;
  }

  int spectral_fail = 0;
  for (int i = 0; i < 100; ++i) {
    const auto kind = i % 2 ? RelaxationKind::Markovian : RelaxationKind::NonMarkovianWideBand;
    const auto j = testing::random_junction(rng, i % 3 == 0, kind);
    const double w = u(rng);
    const auto sd = spectral_densities(j, w, testing::random_bias(rng));
    const Eigen::MatrixXcd gr = system_gr(j, w), ga = system_ga(j, w);
    const Eigen::MatrixXcd lhs = (gr - ga) + cplx(0, 1) * gr * (sd.gamma_left + sd.gamma_right) * ga;
    if (lhs.cwiseAbs().maxCoeff() > 1e-10 * gr.cwiseAbs().maxCoeff()) ++spectral_fail;
  }

  const QuadratureSpec spec;
  int equilibrium_fail = 0;
  double worst_eq = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto j = testing::random_junction(rng, false, RelaxationKind::NonMarkovianWideBand);
    const double mu = 0.5 * u(rng), t = temps[i % 3];
    const double x = current_general(j, BiasSpec(mu, mu, t, t), spec).value;
    worst_eq = std::max(worst_eq, std::abs(x));
    if (std::abs(x) >= 10 * spec.abs_tol) ++equilibrium_fail;
  }

  QuadratureSpec tight;
  tight.abs_tol = 1e-14;
  tight.rel_tol = 1e-12;
  tight.max_subdivisions = 20000;
  int swap_fail = 0;
  for (int i = 0; i < 10; ++i) {
    const auto j = testing::random_junction(rng, true, RelaxationKind::Markovian);
    const auto bias = testing::random_bias(rng);
    const auto js = j.swapped();
    const auto bs = bias.swapped();
    for (Method m : {Method::General, Method::NonInteracting, Method::PcIntegral, Method::PcAnalytic,
                     Method::WeakGamma, Method::StrongGamma, Method::Lyapunov}) {
      const double a = evaluate_method(m, j, bias, tight).value;
      const double b = evaluate_method(m, js, bs, tight).value;
      if (std::abs(a + b) > 1e-10 * std::max(std::abs(a), 1e-6)) ++swap_fail;
    }
  }
  Verdict v;
  v.pass = lesser_fail == 0 && spectral_fail == 0 && equilibrium_fail == 0 && swap_fail == 0;
  v.detail = fmt("lesser %d/1000, spectral %d/100, equilibrium %d/20 (max |I|=%.1e), swap %d/70 failures",
                 lesser_fail, spectral_fail, equilibrium_fail, worst_eq, swap_fail);
  return v;
}

// 6. Large-gamma occupancy identity trend.
Verdict occupancy() {
  const auto bias = testing::benchmark_bias();
  auto deviation = [&](double s) {
    const auto j = testing::single_level().with_gamma_scale(s);
    const auto c = solve_steady_c(assemble_dynamics(j, bias));
    const double lyap = current_from_c(j, c, Side::Left).value;
    const double occ = current_occupancy_large_gamma(j, bias, system_occupations(c)).value;
    return std::abs(lyap - occ) / std::abs(lyap);
  };
  const double d2 = deviation(1e2), d3 = deviation(1e3);
  Verdict v;
  v.pass = d2 / d3 >= 10.0;
  v.detail = fmt("relative deviation s=1e2: %.3e, s=1e3: %.3e, ratio %.1f", d2, d3, d2 / d3);
  return v;
}

// 7. Two CLI runs produce identical CSVs apart from wall time.
std::vector<std::string> strip_wall_time(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() > 7) fields[7].clear();
    std::string joined;
    for (const auto& x : fields) joined += x + ',';
    out.push_back(joined);
  }
  return out;
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "erqt_acceptance";
  fs::create_directories(dir);
  const std::string config = std::string(ERQT_SOURCE_DIR) + "/configs/benchmark.yaml";
  std::vector<std::string> runs;
  for (int i = 0; i < 2; ++i) {
    const auto out = (dir / ("run" + std::to_string(i) + ".csv")).string();
    const std::string cmd = std::string("\"") + ERQT_BINARY + "\" run \"" + config + "\" --output \"" + out + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "erqt run exited nonzero"};
    runs.push_back(out);
  }
  const auto a = strip_wall_time(runs[0]), b = strip_wall_time(runs[1]);
  Verdict v;
  v.pass = a.size() > 1 && a == b;
  v.detail = fmt("%zu lines compared, %s", a.size(), a == b ? "identical" : "different");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"benchmark triple agreement", benchmark},
      {"randomized cross-oracle", cross_oracle},
      {"Kramers turnover and asymptotics", kramers},
      {"Landauer convergence", landauer},
      {"identity suites", identities},
      {"large-gamma occupancy trend", occupancy},
      {"determinism of erqt run", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
