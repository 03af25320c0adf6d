#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cohomfield/chart.hpp"
#include "cohomfield/flow.hpp"
#include "cohomfield/scenarios.hpp"

namespace cohomfield {

// Seed data for the method of characteristics: the transversal leaf G = b and
// the solution value along it as a function of the F-coordinate.
struct SeedData {
    double b_seed = 0.0;
    std::function<double(double)> phi; // phi(F)
};

enum class CellStatus { Value, NearSeparatrix, Unreachable };

struct ResidualStats {
    double max = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

struct SolutionGrid {
    Rect box;
    int nx = 0, ny = 0;
    std::vector<double> values;       // row-major, j*nx + i
    std::vector<CellStatus> status;
    double mask_distance = 1e-3;
    double masked_fraction = 0.0;
    double unreachable_fraction = 0.0;

    double x_at(int i) const { return box.x0 + box.width() * i / (nx - 1.0); }
    double y_at(int j) const { return box.y0 + box.height() * j / (ny - 1.0); }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
};

struct SolverConfig {
    IntegratorConfig integrator{};
    double mask_distance = 1e-3; // chart distance to {a} x (b1,b2) below which cells are masked
    double t_max = 60.0;
    double residual_h = 1e-4;
    bool parallel = true;
};

// f at a single point by flowing to the seed transversal along +-xi with the
// mode-appropriate integrand (g for L_xi f = g; g * L_xi G for L_{xi'_F} f = g,
// which avoids evaluating the rescaled field near its degeneracies).
std::optional<double> solve_at_point(const Scenario& s, const ScalarField& g, Mode mode,
                                     const SeedData& seed, Vec2 p, const SolverConfig& cfg);

SolutionGrid solve_on_grid(const Scenario& s, const ScalarField& g, Mode mode,
                           const SeedData& seed, Rect box, int nx, int ny,
                           const SolverConfig& cfg = {});

// Serial reference implementation of the same kernel (used by tests and the
// benchmark; results are identical entry by entry).
SolutionGrid solve_on_grid_serial(const Scenario& s, const ScalarField& g, Mode mode,
                                  const SeedData& seed, Rect box, int nx, int ny,
                                  SolverConfig cfg = {});

// Residual by flow differencing: [f(Phi^h p) - f(p)]/h - gbar(p) with both
// values re-solved at tightened tolerance.
ResidualStats residual_check(const Scenario& s, const SolutionGrid& grid, const ScalarField& g,
                             Mode mode, const SeedData& seed, double h = 1e-4,
                             const SolverConfig& cfg = {});

// Contact-rate measurement eta_1(eta_2) between the two transversals of a
// pair.  Offsets are taken along the source transversal leaf (arc length,
// into V), the flow is followed to the target transversal, and the arrival
// offset is measured the same way.  `reversed` starts from t1 instead of t2.
struct ContactEstimate {
    double alpha_hat = 0.0;
    double fit_r2 = 0.0;
    std::size_t used = 0;
    std::vector<double> eta_src, eta_dst;
};

ContactEstimate contact_exponent(const Scenario& s, const ChartMap& map,
                                 const SeparatrixPair& pair, std::span<const double> etas,
                                 bool reversed = false, const SolverConfig& cfg = {});

// Holder-exponent estimate of a pulled-back chart function along a segment
// crossing a separatrix: successive one-sided differencing up to probe_max,
// then a log-log fit of the first non-polynomial remainder.
struct PullbackRegularity {
    double gamma_hat = 0.0;
    bool at_least = false; // true: smooth to probe order, gamma_hat >= probe_max
    double fit_r2 = 0.0;
};

struct Segment {
    Vec2 p0, p1;
    Vec2 at(double t) const { return {p0.x + (p1.x - p0.x) * t, p0.y + (p1.y - p0.y) * t}; }
};

PullbackRegularity pullback_regularity(const Scenario& s, const ScalarFn& f_hat, Segment seg,
                                       int probe_max = 5);

} // namespace cohomfield
