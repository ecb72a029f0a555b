#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace erqt {

enum class Method {
  General,
  NonInteracting,
  PcIntegral,
  PcAnalytic,
  WeakGamma,
  StrongGamma,
  LandauerContinuum,
  OccupancyLargeGamma,
  Lyapunov,
};

std::string_view to_string(Method method);
std::optional<Method> method_from_string(std::string_view name);
const std::vector<Method>& all_methods();

/// Steady-state current in units of e * energy / hbar. Positive means
/// particles flow from the left reservoir into the system.
struct CurrentResult {
  double value = 0.0;
  Method method = Method::General;
  double abs_error_estimate = 0.0;  // 0 for closed forms
  long n_evaluations = 0;
  std::optional<std::pair<double, double>> window;  // quadrature routes only
  std::vector<std::string> diagnostics;
};

}  // namespace erqt
