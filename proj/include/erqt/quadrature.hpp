#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) integration over a finite or
// infinite interval. Semi-infinite pieces are mapped onto [0, 1) by
// w = a + s t / (1 - t); the interval is pre-split at caller-supplied
// breakpoints (Fermi steps, narrow resonances). The panel with the largest
// error estimate is bisected until the summed estimate falls below
// max(abs_tol, rel_tol |I|). Evaluation order is fixed, so results are
// bit-for-bit reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <type_traits>
#include <vector>

#include "erqt/error.hpp"

namespace erqt {

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  long max_subdivisions = 2000;
  double window_padding_factor = 20.0;

  bool operator==(const QuadratureSpec&) const = default;
};

template <class T>
struct QuadratureResult {
  T value{};
  double abs_error = 0.0;
  long n_evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(std::complex<double> x) { return std::abs(x); }

enum class MapKind { Identity, UpperTail, LowerTail };

struct Segment {
  MapKind kind;
  double anchor;  // finite end for tails
  double scale;   // tail length scale
};

template <class T>
struct Panel {
  double a, b;
  std::size_t segment;
  T value;
  double error;
};

template <class T, class F>
Panel<T> gauss_kronrod(F& f, const Segment& seg, double a, double b, std::size_t segment_index) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto eval = [&](double t) -> T {
    switch (seg.kind) {
      case MapKind::Identity:
        return f(t);
      case MapKind::UpperTail: {
        const double u = 1.0 - t;
        return f(seg.anchor + seg.scale * t / u) * (seg.scale / (u * u));
      }
      case MapKind::LowerTail: {
        const double u = 1.0 - t;
        return f(seg.anchor - seg.scale * t / u) * (seg.scale / (u * u));
      }
    }
    return T{};
  };

  std::array<T, 10> f1{}, f2{};
  const T fc = eval(center);
  T res_k = fc * kKronrodWeights[10];
  T res_g{};
  double res_abs = magnitude(fc) * kKronrodWeights[10];
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    f1[j] = eval(center - dx);
    f2[j] = eval(center + dx);
    res_k += kKronrodWeights[j] * (f1[j] + f2[j]);
    res_abs += kKronrodWeights[j] * (magnitude(f1[j]) + magnitude(f2[j]));
    if (j % 2 == 1) res_g += kGaussWeights[j / 2] * (f1[j] + f2[j]);
  }
  const T mean = res_k * 0.5;
  double res_asc = kKronrodWeights[10] * magnitude(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    res_asc += kKronrodWeights[j] * (magnitude(f1[j] - mean) + magnitude(f2[j] - mean));
  }
  const double ahalf = std::abs(half);
  res_abs *= ahalf;
  res_asc *= ahalf;
  double err = magnitude((res_k - res_g) * half);
  // Error scaling as in QUADPACK's qk21.
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
  return {a, b, segment_index, res_k * half, err};
}

}  // namespace detail

/// Integrates `f` over [lo, hi]; either end may be infinite. Breakpoints inside
/// the interval start separate panels.
template <class F>
auto integrate_adaptive(F&& f, double lo, double hi, const QuadratureSpec& spec,
                        std::span<const double> breakpoints = {})
    -> QuadratureResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  using detail::MapKind;
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "quadrature tolerances must be > 0");
  }
  QuadratureResult<T> out;
  if (!(hi > lo)) return out;

  // Finite split points, sorted and strictly inside (lo, hi).
  std::vector<double> cuts;
  for (double x : breakpoints) {
    if (std::isfinite(x) && x > lo && x < hi) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf && cuts.empty()) cuts.push_back(0.0);

  std::vector<double> nodes;
  if (!lo_inf) nodes.push_back(lo);
  nodes.insert(nodes.end(), cuts.begin(), cuts.end());
  if (!hi_inf) nodes.push_back(hi);
  const double span_finite = nodes.back() - nodes.front();
  const double tail_scale = span_finite > 0.0 ? 0.5 * span_finite : 1.0;

  std::vector<detail::Segment> segments;
  std::vector<std::pair<double, double>> ranges;
  if (lo_inf) {
    segments.push_back({MapKind::LowerTail, nodes.front(), tail_scale});
    ranges.emplace_back(0.0, 1.0);
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i + 1] > nodes[i]) {
      segments.push_back({MapKind::Identity, 0.0, 0.0});
      ranges.emplace_back(nodes[i], nodes[i + 1]);
    }
  }
  if (hi_inf) {
    segments.push_back({MapKind::UpperTail, nodes.back(), tail_scale});
    ranges.emplace_back(0.0, 1.0);
  }

  auto by_error = [](const detail::Panel<T>& x, const detail::Panel<T>& y) { return x.error < y.error; };
  std::vector<detail::Panel<T>> heap;
  heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + segments.size() + 2);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    heap.push_back(detail::gauss_kronrod<T>(f, segments[s], ranges[s].first, ranges[s].second, s));
    out.n_evaluations += 21;
  }
  std::make_heap(heap.begin(), heap.end(), by_error);

  auto totals = [&heap]() {
    T v{};
    double e = 0.0;
    for (const auto& p : heap) {
      v += p.value;
      e += p.error;
    }
    return std::pair<T, double>{v, e};
  };

  auto [value, error] = totals();
  for (;;) {
    if (!std::isfinite(error) || !std::isfinite(detail::magnitude(value))) {
      throw QuadratureError("integrand is not finite on the integration window",
                            detail::magnitude(value), error);
    }
    if (error <= std::max(spec.abs_tol, spec.rel_tol * detail::magnitude(value))) break;
    if (static_cast<long>(heap.size()) >= spec.max_subdivisions) {
      std::ostringstream os;
      os << "adaptive quadrature did not converge within " << spec.max_subdivisions
         << " panels (estimate " << detail::magnitude(value) << " +- " << error << ")";
      throw QuadratureError(os.str(), detail::magnitude(value), error);
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const auto worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("panel width reached machine precision", detail::magnitude(value), error);
    }
    const auto& seg = segments[worst.segment];
    heap.push_back(detail::gauss_kronrod<T>(f, seg, worst.a, mid, worst.segment));
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(detail::gauss_kronrod<T>(f, seg, mid, worst.b, worst.segment));
    std::push_heap(heap.begin(), heap.end(), by_error);
    out.n_evaluations += 42;
    std::tie(value, error) = totals();
  }

  // Sum in position order for a reproducible final value.
  std::sort(heap.begin(), heap.end(), [](const auto& x, const auto& y) {
    return x.segment != y.segment ? x.segment < y.segment : x.a < y.a;
  });
  std::tie(out.value, out.abs_error) = totals();
  return out;
}

}  // namespace erqt
