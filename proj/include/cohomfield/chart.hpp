#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cohomfield/flow.hpp"
#include "cohomfield/scenarios.hpp"
#include "cohomfield/types.hpp"

namespace cohomfield {

// Forward map p -> (F(p), G(p)).
Vec2 to_chart(const ScalarField& F, const ScalarField& G, Vec2 p);
Vec2 to_chart(const Scenario& s, Vec2 p);

struct FromChartOptions {
    // Convergence: residual norm <= max(rel_tol * scale, abs_floor); the
    // caller sets `scale` (distance to a singular chart point, say) when the
    // default max(1, |target|) is too loose.
    double rel_tol = 1e-12;
    double abs_floor = 1e-280;
    std::optional<double> scale;
    int max_iter = 120;
    int max_halvings = 60;
};

// Numerical inverse of the normal chart on a rectangle known to lie in the
// image.  The seed cache is built by flowing from the anchor along xi
// (changes only G) and along xi'_G (changes only F), so construction needs no
// prior inverse.
class ChartMap {
public:
    ChartMap(const Scenario& scenario, Rect region, Vec2 anchor, int nx = 64, int ny = 64,
             const IntegratorConfig& cfg = {});

    Vec2 from_chart(double xp, double yp, const FromChartOptions& opts = {}) const;

    const Rect& region() const { return region_; }
    // Nearest valid cache seed; exposed for warm-started callers.
    Vec2 seed_near(double xp, double yp) const;
    double cache_valid_fraction() const;
    const Scenario& scenario() const { return *scenario_; }

private:
    const Scenario* scenario_;
    Rect region_;
    Vec2 anchor_;
    int nx_, ny_;
    std::vector<Vec2> cache_; // plane points; NaN marks unreachable cells
    std::vector<bool> cache_ok_;

    void build(const IntegratorConfig& cfg);
};

// Damped Newton inversion of (F,G) from an explicit seed; building block for
// ChartMap and for warm-started sweeps.  Throws NoConvergence / OutsideImage.
Vec2 invert_chart(const Scenario& s, Vec2 target_chart, Vec2 seed,
                  const FromChartOptions& opts = {});

// Pushed-forward right-hand side at a chart point: mode XiPrime returns
// g(inverse point); mode Xi returns (g / L_xi G)(inverse point).
double pushforward_rhs(const Scenario& s, const ChartMap& map, const ScalarField& g, Mode mode,
                       double xp, double yp, const FromChartOptions& opts = {});

// Reusable chart-side evaluator with a warm-started seed (per instance; use
// one per thread).  Falls back to the cache when the previous point is far.
class PushforwardEvaluator {
public:
    PushforwardEvaluator(const Scenario& s, const ChartMap& map, const ScalarField& g, Mode mode,
                         std::optional<Vec2> singular_center = std::nullopt);
    double operator()(double xp, double yp);

private:
    const Scenario* s_;
    const ChartMap* map_;
    const ScalarField* g_;
    Mode mode_;
    std::optional<Vec2> center_;
    std::optional<Vec2> last_plane_;
    std::optional<Vec2> last_chart_;
};

struct DeltaProbe {
    double delta = 0.0;
    bool crossed_b = false;
    bool crossed_b2 = false;
    Vec2 at_b{};
    Vec2 at_b2{};
    TerminalEvent terminal = TerminalEvent::TimeLimit;
};

struct InseparableReport {
    std::vector<DeltaProbe> probes;
    bool all_crossed = false;
    bool converging = false;    // successive b2-crossings form a Cauchy sequence
    double final_gap = 0.0;     // distance between the last two b2-crossings
};

// Theorem-NC-style check: leaves at chart offset delta into V must cross both
// G = b and G = b2, and the b2-crossings must accumulate on s2.
InseparableReport verify_inseparable(const Scenario& s, const ChartMap& map,
                                     const SeparatrixPair& pair, std::span<const double> deltas,
                                     const IntegratorConfig& cfg = {});

} // namespace cohomfield
