#include "cohomfield/flow.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

namespace cohomfield {

namespace {

constexpr double kEventTol = 1e-12;

struct State {
    double x, y, I;
};

struct Deriv {
    double x, y, I;
};

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

class Stepper {
public:
    Stepper(const VecField& field, const ScalarFn* integrand)
        : field_(field), integrand_(integrand) {}

    Deriv eval(const State& s) const {
        const Vec2 v = field_.at(s.x, s.y);
        const double w = integrand_ ? (*integrand_)(s.x, s.y) : 0.0;
        return {v.x, v.y, w};
    }

    // One attempted step; fills the 4th/5th order error and the new state.
    // k1 in, k7 out (FSAL).
    void step(const State& s, const Deriv& k1, double h, State& out, Deriv& k7,
              double& err_norm, const IntegratorConfig& cfg) const {
        auto adv = [&](double ax1, double ax2, double ax3, double ax4, double ax5,
                       const Deriv* ks) {
            State t = s;
            const double coef[5] = {ax1, ax2, ax3, ax4, ax5};
            for (int i = 0; i < 5; ++i) {
                t.x += h * coef[i] * ks[i].x;
                t.y += h * coef[i] * ks[i].y;
                t.I += h * coef[i] * ks[i].I;
            }
            return t;
        };
        Deriv k[7];
        k[0] = k1;
        k[1] = eval(adv(a21, 0, 0, 0, 0, k));
        k[2] = eval(adv(a31, a32, 0, 0, 0, k));
        k[3] = eval(adv(a41, a42, a43, 0, 0, k));
        k[4] = eval(adv(a51, a52, a53, a54, 0, k));
        k[5] = eval(adv(a61, a62, a63, a64, a65, k));

        out = s;
        out.x += h * (b1 * k[0].x + b3 * k[2].x + b4 * k[3].x + b5 * k[4].x + b6 * k[5].x);
        out.y += h * (b1 * k[0].y + b3 * k[2].y + b4 * k[3].y + b5 * k[4].y + b6 * k[5].y);
        out.I += h * (b1 * k[0].I + b3 * k[2].I + b4 * k[3].I + b5 * k[4].I + b6 * k[5].I);
        k[6] = eval(out);
        k7 = k[6];

        const double ex =
            h * (e1 * k[0].x + e3 * k[2].x + e4 * k[3].x + e5 * k[4].x + e6 * k[5].x + e7 * k[6].x);
        const double ey =
            h * (e1 * k[0].y + e3 * k[2].y + e4 * k[3].y + e5 * k[4].y + e6 * k[5].y + e7 * k[6].y);
        const double eI =
            h * (e1 * k[0].I + e3 * k[2].I + e4 * k[3].I + e5 * k[4].I + e6 * k[5].I + e7 * k[6].I);

        auto comp = [&](double e, double v0, double v1) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(v0), std::abs(v1));
            return (e / sc) * (e / sc);
        };
        err_norm = std::sqrt((comp(ex, s.x, out.x) + comp(ey, s.y, out.y) +
                              comp(eI, s.I, out.I)) /
                             3.0);
    }

private:
    const VecField& field_;
    const ScalarFn* integrand_;
};

// Cubic Hermite interpolation over an accepted step.
struct DenseSegment {
    double t0, t1;
    State s0, s1;
    Deriv d0, d1;

    State at(double t) const {
        const double h = t1 - t0;
        const double u = (t - t0) / h;
        const double u2 = u * u, u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
        auto mix = [&](double p0, double m0, double p1, double m1) {
            return h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1;
        };
        return {mix(s0.x, d0.x, s1.x, d1.x), mix(s0.y, d0.y, s1.y, d1.y),
                mix(s0.I, d0.I, s1.I, d1.I)};
    }
};

bool direction_ok(Direction dir, double before, double after) {
    switch (dir) {
        case Direction::Any: return true;
        case Direction::Up: return before < after;
        case Direction::Down: return before > after;
    }
    return true;
}

} // namespace

Trajectory integrate(const VecField& field, const ScalarFn* integrand, Vec2 p0,
                     double t_max, const Rect& box, std::span<const CrossingEvent> events,
                     const IntegratorConfig& cfg) {
    Trajectory traj;
    Stepper stepper(field, integrand);
    State s{p0.x, p0.y, 0.0};
    double t = 0.0;
    traj.samples.push_back({t, s.x, s.y, s.I});

    // A start exactly on an event counts as an immediate hit only when the
    // motion leaves it in the requested direction.
    {
        Deriv d0 = stepper.eval(s);
        for (std::size_t ie = 0; ie < events.size(); ++ie) {
            const auto& ev = events[ie];
            const double m = ev.monitor(s.x, s.y) - ev.target;
            if (std::abs(m) <= kEventTol) {
                const double mdot = ev.monitor(s.x + 1e-9 * d0.x, s.y + 1e-9 * d0.y) - ev.target;
                if (direction_ok(ev.direction, 0.0, mdot) || ev.direction == Direction::Any) {
                    traj.terminal = TerminalEvent::EventHit;
                    traj.event_index = static_cast<int>(ie);
                    return traj;
                }
            }
        }
    }

    const auto wall_start = std::chrono::steady_clock::now();
    std::vector<double> m_prev(events.size());
    for (std::size_t ie = 0; ie < events.size(); ++ie)
        m_prev[ie] = events[ie].monitor(s.x, s.y) - events[ie].target;

    Deriv k1 = stepper.eval(s);
    double h = std::min(t_max * 1e-3, 1e-2 / (1.0 + std::hypot(k1.x, k1.y)));
    h = std::max(h, cfg.h_min);

    for (int step = 0; step < cfg.max_steps; ++step) {
        if (t >= t_max) {
            traj.terminal = TerminalEvent::TimeLimit;
            return traj;
        }
        if ((step & 0xff) == 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count() >
                cfg.wall_guard_s) {
            traj.terminal = TerminalEvent::TimeLimit;
            return traj;
        }
        h = std::min(h, t_max - t);

        State snew;
        Deriv k7;
        double err;
        bool ok = true;
        try {
            stepper.step(s, k1, h, snew, k7, err, cfg);
        } catch (const Error&) {
            ok = false; // domain fault inside a trial step: treat as too large
            err = 1e10;
        }
        if (!ok || !std::isfinite(err) || err > 1.0) {
            const double shrink = ok && std::isfinite(err)
                                      ? std::max(0.2, cfg.safety * std::pow(err, -0.2))
                                      : 0.2;
            h *= shrink;
            if (h < cfg.h_min) {
                traj.terminal = TerminalEvent::StepFailure;
                return traj;
            }
            continue;
        }

        DenseSegment seg{t, t + h, s, snew, k1, k7};

        // First event crossing inside this step wins.
        double best_theta = 2.0;
        int best_event = -1;
        for (std::size_t ie = 0; ie < events.size(); ++ie) {
            const auto& ev = events[ie];
            const double m1 = ev.monitor(snew.x, snew.y) - ev.target;
            const double m0 = m_prev[ie];
            const bool crossed = (m0 < 0.0 && m1 >= 0.0) || (m0 > 0.0 && m1 <= 0.0);
            if (crossed && direction_ok(ev.direction, m0, m1)) {
                // bisection on the dense output
                double lo = 0.0, hi = 1.0, mlo = m0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const State sm = seg.at(t + mid * h);
                    const double mm = ev.monitor(sm.x, sm.y) - ev.target;
                    if (std::abs(mm) < kEventTol && hi - lo < 1e-12) {
                        lo = hi = mid;
                        break;
                    }
                    if ((mlo < 0.0) == (mm < 0.0)) {
                        lo = mid;
                        mlo = mm;
                    } else {
                        hi = mid;
                    }
                }
                const double theta = 0.5 * (lo + hi);
                if (theta < best_theta) {
                    best_theta = theta;
                    best_event = static_cast<int>(ie);
                }
            }
        }
        if (best_event >= 0) {
            const double t_hit = t + best_theta * h;
            const State sh = seg.at(t_hit);
            traj.samples.push_back({t_hit, sh.x, sh.y, sh.I});
            traj.terminal = TerminalEvent::EventHit;
            traj.event_index = best_event;
            return traj;
        }

        if (!box.contains({snew.x, snew.y})) {
            traj.samples.push_back({t + h, snew.x, snew.y, snew.I});
            traj.terminal = TerminalEvent::BoxExit;
            return traj;
        }

        t += h;
        s = snew;
        k1 = k7;
        traj.samples.push_back({t, s.x, s.y, s.I});
        for (std::size_t ie = 0; ie < events.size(); ++ie)
            m_prev[ie] = events[ie].monitor(s.x, s.y) - events[ie].target;

        const double grow = err > 0.0 ? cfg.safety * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        h = std::max(h, cfg.h_min);
    }
    traj.terminal = TerminalEvent::TimeLimit;
    return traj;
}

CrossResult cross_transversal(const VecField& field, const ScalarFn* integrand, Vec2 p0,
                              const CrossingEvent& event, double t_max, const Rect& box,
                              const IntegratorConfig& cfg) {
    const CrossingEvent evs[1] = {event};
    Trajectory traj = integrate(field, integrand, p0, t_max, box, evs, cfg);
    CrossResult r;
    r.terminal = traj.terminal;
    const auto& last = traj.back();
    r.p = {last.x, last.y};
    r.t = last.t;
    r.I = last.I;
    r.hit = traj.terminal == TerminalEvent::EventHit;
    return r;
}

} // namespace cohomfield
