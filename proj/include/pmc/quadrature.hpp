#pragma once

#include <functional>

namespace pmc {

// Adaptive Simpson rule with absolute tolerance `tol`, floored at the round-off
// level of each panel.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 50);

}  // namespace pmc
