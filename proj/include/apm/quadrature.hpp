#pragma once

#include <cstddef>
#include <functional>

namespace apm {

struct QuadratureOptions {
  double relative_tolerance = 1e-9;
  int max_depth = 48;
  std::size_t max_evaluations = 4'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

// Adaptive Simpson on [a, b]. Throws QuadratureError (carrying the achieved
// relative tolerance) when the tolerance cannot be met within the caps.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options = {});

}  // namespace apm
