#pragma once

#include <functional>

namespace wavelab::quadrature {

// Adaptive Simpson on [a, b] with relative tolerance; depth-capped.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth = 48);

}  // namespace wavelab::quadrature
