#pragma once

#include <functional>
#include <span>

namespace cohomfield {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;     // accumulated error estimate
    int subdivisions = 0;   // bisections performed
    bool converged = false;
};

using Fn1 = std::function<double(double)>;

// Single G7/K15 panel; err is the QUADPACK-style (200|G-K|)^{3/2} estimate.
double gk15_panel(const Fn1& f, double a, double b, double& err);

// Adaptive bisection on a worklist, worst interval first.  Node abscissae are
// interior, so endpoint singularities are never evaluated directly.
QuadResult integrate_adaptive(const Fn1& f, double a, double b, double rel_tol,
                              double abs_tol, int max_subdiv);

// Same, with the interval pre-split at the given interior points.
QuadResult integrate_adaptive_split(const Fn1& f, double a, double b,
                                    std::span<const double> splits, double rel_tol,
                                    double abs_tol, int max_subdiv);

} // namespace cohomfield
