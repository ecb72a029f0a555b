#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "erqt/quadrature.hpp"

using namespace erqt;

namespace {

double lorentzian(double w, double g) { return g / (w * w + 0.25 * g * g); }

}  // namespace

TEST_CASE("unit Lorentzian over +-200 gamma") {
  const double g = 0.2;
  const QuadratureSpec spec;
  const auto r = integrate_adaptive([&](double w) { return lorentzian(w, g); }, -200 * g, 200 * g, spec);
  const double exact = 4.0 * std::atan(400.0);  // 2pi (1 - O(1e-3))
  CHECK(std::abs(r.value - exact) <= std::max(r.abs_error, 1e-12));
  CHECK(std::abs(r.value / (2 * std::numbers::pi) - 1.0) < 2e-3);
  CHECK(r.n_evaluations % 21 == 0);
}

TEST_CASE("whole real axis with mapped tails") {
  const double g = 0.2;
  const auto r = integrate_adaptive([&](double w) { return lorentzian(w - 0.3, g); },
                                    -std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::infinity(), QuadratureSpec{});
  CHECK(r.value == doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));
  CHECK(r.abs_error <= 1e-8 * 2 * std::numbers::pi);
}

TEST_CASE("zero integrand") {
  const auto r = integrate_adaptive([](double) { return 0.0; }, -1.0, 1.0, QuadratureSpec{});
  CHECK(r.value == 0.0);
  CHECK(r.abs_error == 0.0);
  CHECK(r.n_evaluations == 21);
}

TEST_CASE("additivity across a split point") {
  auto f = [](double w) { return std::exp(-w * w) * std::cos(3 * w) + lorentzian(w - 0.7, 0.05); };
  const QuadratureSpec spec;
  const auto whole = integrate_adaptive(f, -3.0, 4.0, spec);
  const auto a = integrate_adaptive(f, -3.0, 0.1, spec);
  const auto b = integrate_adaptive(f, 0.1, 4.0, spec);
  CHECK(std::abs(whole.value - (a.value + b.value)) <=
        whole.abs_error + a.abs_error + b.abs_error + 1e-14);
}

TEST_CASE("breakpoints resolve a step exactly") {
  // Step at 0.3: split there, each side is polynomial.
  auto f = [](double w) { return w < 0.3 ? 1.0 + w * w : 0.0; };
  const std::vector<double> cuts = {0.3};
  const auto r = integrate_adaptive(f, -1.0, 1.0, QuadratureSpec{}, cuts);
  const double exact = 1.3 + (0.027 + 1.0) / 3.0;
  CHECK(r.value == doctest::Approx(exact).epsilon(1e-14));
  CHECK(r.n_evaluations == 42);
}

TEST_CASE("complex integrands") {
  auto f = [](double w) { return std::complex<double>(1.0, 0.0) / std::complex<double>(w, 0.1); };
  const auto r = integrate_adaptive(f, -1.0, 1.0, QuadratureSpec{});
  // int dw / (w + i eta) = -2i atan(1/eta).
  CHECK(std::abs(r.value - std::complex<double>(0.0, -2.0 * std::atan(10.0))) < 1e-9);
}

TEST_CASE("failure modes") {
  QuadratureSpec tight;
  tight.max_subdivisions = 3;
  tight.abs_tol = 1e-15;
  tight.rel_tol = 1e-15;
  try {
    integrate_adaptive([](double w) { return lorentzian(w, 1e-4); }, -1.0, 1.0, tight);
    FAIL("expected a quadrature error");
  } catch (const QuadratureError& e) {
    CHECK(e.code() == ErrorCode::QuadratureFailure);
    CHECK(e.best_error() > 0.0);
  }
  CHECK_THROWS_AS(integrate_adaptive([](double) { return std::nan(""); }, 0.0, 1.0, QuadratureSpec{}),
                  QuadratureError);
  QuadratureSpec bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, bad), Error);
}

TEST_CASE("results are bit-reproducible") {
  auto f = [](double w) { return lorentzian(w - 0.11, 0.03) * std::tanh(w); };
  const std::vector<double> cuts = {-0.4, 0.2};
  const auto a = integrate_adaptive(f, -5.0, 5.0, QuadratureSpec{}, cuts);
  const auto b = integrate_adaptive(f, -5.0, 5.0, QuadratureSpec{}, cuts);
  CHECK(a.value == b.value);
  CHECK(a.abs_error == b.abs_error);
  CHECK(a.n_evaluations == b.n_evaluations);
}
