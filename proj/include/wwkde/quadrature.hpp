#pragma once

#include <functional>
#include <span>

namespace wwkde {

// Composite trapezoid rule over equispaced function values.
double trapezoid(std::span<const double> values, double spacing);

// Adaptive Simpson integration of f over [a, b] with absolute tolerance.
// Throws std::runtime_error with diagnostics if the recursion depth is
// exhausted before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 50);

}  // namespace wwkde
