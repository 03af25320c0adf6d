#pragma once

#include <span>
#include <vector>

#include "cohomfield/field.hpp"
#include "cohomfield/types.hpp"

namespace cohomfield {

struct IntegratorConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double h_min = 1e-14;
    double safety = 0.9;
    double wall_guard_s = 5.0; // per-trajectory wall clock guard -> TimeLimit
    int max_steps = 2000000;
};

enum class TerminalEvent { TimeLimit, BoxExit, EventHit, StepFailure };

enum class Direction { Any, Up, Down };

// Crossing of monitor(x,y) = target along the trajectory.
struct CrossingEvent {
    ScalarFn monitor;
    double target = 0.0;
    Direction direction = Direction::Any;
};

struct TrajectorySample {
    double t, x, y, I;
};

struct Trajectory {
    std::vector<TrajectorySample> samples; // accepted steps, t strictly monotone
    TerminalEvent terminal = TerminalEvent::TimeLimit;
    int event_index = -1; // which event fired when terminal == EventHit

    const TrajectorySample& back() const { return samples.back(); }
};

// Adaptive embedded Runge-Kutta 4(5), Dormand-Prince pair, with an augmented
// quadrature state I' = integrand(x,y) and first-crossing event detection
// refined on cubic Hermite dense output to |monitor - target| < 1e-12.
// Integration runs forward in internal time; callers flow backward by negating
// the field (and reading I as the integral along the reversed motion).
Trajectory integrate(const VecField& field, const ScalarFn* integrand, Vec2 p0,
                     double t_max, const Rect& box, std::span<const CrossingEvent> events,
                     const IntegratorConfig& cfg = {});

struct CrossResult {
    bool hit = false;
    Vec2 p{};
    double t = 0.0;
    double I = 0.0;
    TerminalEvent terminal = TerminalEvent::TimeLimit;
};

// First crossing of the event; hit == false carries the terminal reason.
CrossResult cross_transversal(const VecField& field, const ScalarFn* integrand, Vec2 p0,
                              const CrossingEvent& event, double t_max, const Rect& box,
                              const IntegratorConfig& cfg = {});

} // namespace cohomfield
