#include "cohomfield/solver.hpp"

#include <algorithm>
#include <cmath>

#include "cohomfield/errors.hpp"
#include "cohomfield/fit.hpp"

namespace cohomfield {

namespace {

double chart_distance_to_pairs(const Scenario& s, Vec2 chart) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : s.pairs) {
        const double dx = chart.x - p.a;
        double dy = 0.0;
        if (chart.y < p.b1)
            dy = p.b1 - chart.y;
        else if (chart.y > p.b2)
            dy = chart.y - p.b2;
        best = std::min(best, std::hypot(dx, dy));
    }
    return best;
}

// Mode-appropriate integrand along the xi flow: d f/dt = gbar.
ScalarFn make_gbar(const Scenario& s, const ScalarField& g, Mode mode) {
    if (mode == Mode::Xi) return [&g](double x, double y) { return g.value(x, y); };
    const PlaneVectorField xi = s.xi;
    const ScalarField G = s.G;
    return [&g, xi, G](double x, double y) {
        const DualValue d = G.dual(x, y);
        const double lg = xi.p.value(x, y) * d.dx + xi.q.value(x, y) * d.dy;
        return g.value(x, y) * lg;
    };
}

} // namespace

std::optional<double> solve_at_point(const Scenario& s, const ScalarField& g, Mode mode,
                                     const SeedData& seed, Vec2 p, const SolverConfig& cfg) {
    const double fp = s.F.value(p.x, p.y);
    const double gp = s.G.value(p.x, p.y);
    if (std::abs(gp - seed.b_seed) <= 1e-12) return seed.phi(fp);

    const double lg = lie_derivative(s.xi, s.G, p);
    // Flow toward the seed leaf: +xi when G moves the right way, else -xi.
    const double dir = (seed.b_seed - gp) * lg > 0.0 ? 1.0 : -1.0;
    const VecField v{[&s, dir](double x, double y) {
                         const Vec2 w = s.xi.at(x, y);
                         return Vec2{dir * w.x, dir * w.y};
                     },
                     std::nullopt};
    const ScalarFn gbar = make_gbar(s, g, mode);
    const ScalarFn integrand = [&](double x, double y) { return gbar(x, y); };
    const ScalarFn monG = [&s](double x, double y) { return s.G.value(x, y); };
    const CrossingEvent ev{monG, seed.b_seed, Direction::Any};

    const CrossResult c =
        cross_transversal(v, &integrand, p, ev, cfg.t_max, s.flow_box(), cfg.integrator);
    if (!c.hit) return std::nullopt;
    const double f_seed = seed.phi(fp); // F is constant along the flow
    // Flowing forward along xi means the seed lies ahead: f(p) = phi - I.
    return dir > 0.0 ? f_seed - c.I : f_seed + c.I;
}

namespace {

SolutionGrid solve_grid_impl(const Scenario& s, const ScalarField& g, Mode mode,
                             const SeedData& seed, Rect box, int nx, int ny,
                             const SolverConfig& cfg) {
    SolutionGrid grid;
    grid.box = box;
    grid.nx = nx;
    grid.ny = ny;
    grid.mask_distance = cfg.mask_distance;
    grid.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    grid.status.assign(static_cast<std::size_t>(nx) * ny, CellStatus::Unreachable);

    const int total = nx * ny;
#pragma omp parallel for schedule(dynamic, 8) if (cfg.parallel)
    for (int cell = 0; cell < total; ++cell) {
        const int i = cell % nx;
        const int j = cell / nx;
        const Vec2 p{grid.x_at(i), grid.y_at(j)};
        try {
            const Vec2 cp = s.chart_point(p);
            if (chart_distance_to_pairs(s, cp) < cfg.mask_distance) {
                grid.status[cell] = CellStatus::NearSeparatrix;
                continue;
            }
            const std::optional<double> f = solve_at_point(s, g, mode, seed, p, cfg);
            if (f) {
                grid.values[cell] = *f;
                grid.status[cell] = CellStatus::Value;
            }
        } catch (const Error&) {
            grid.status[cell] = CellStatus::Unreachable;
        }
    }

    std::size_t masked = 0, unreachable = 0;
    for (const CellStatus st : grid.status) {
        masked += st == CellStatus::NearSeparatrix;
        unreachable += st == CellStatus::Unreachable;
    }
    grid.masked_fraction = static_cast<double>(masked) / total;
    grid.unreachable_fraction = static_cast<double>(unreachable) / total;
    return grid;
}

} // namespace

SolutionGrid solve_on_grid(const Scenario& s, const ScalarField& g, Mode mode,
                           const SeedData& seed, Rect box, int nx, int ny,
                           const SolverConfig& cfg) {
    if (nx < 2 || ny < 2) throw ValidationError("grid must be at least 2x2");
    return solve_grid_impl(s, g, mode, seed, box, nx, ny, cfg);
}

SolutionGrid solve_on_grid_serial(const Scenario& s, const ScalarField& g, Mode mode,
                                  const SeedData& seed, Rect box, int nx, int ny,
                                  SolverConfig cfg) {
    if (nx < 2 || ny < 2) throw ValidationError("grid must be at least 2x2");
    cfg.parallel = false;
    return solve_grid_impl(s, g, mode, seed, box, nx, ny, cfg);
}

ResidualStats residual_check(const Scenario& s, const SolutionGrid& grid, const ScalarField& g,
                             Mode mode, const SeedData& seed, double h, const SolverConfig& cfg) {
    SolverConfig tight = cfg;
    tight.integrator.abs_tol = std::min(cfg.integrator.abs_tol, 1e-12);
    tight.integrator.rel_tol = std::min(cfg.integrator.rel_tol, 1e-12);
    const ScalarFn gbar = make_gbar(s, g, mode);
    const VecField xi = as_vecfield(s.xi);

    ResidualStats stats;
    double sum = 0.0;
    const int total = grid.nx * grid.ny;
#pragma omp parallel for schedule(dynamic, 8) if (cfg.parallel)
    for (int cell = 0; cell < total; ++cell) {
        if (grid.status[cell] != CellStatus::Value) continue;
        const int i = cell % grid.nx;
        const int j = cell / grid.nx;
        const Vec2 p{grid.x_at(i), grid.y_at(j)};
        try {
            // One short accurate step of the flow, then two tight re-solves.
            const Trajectory step =
                integrate(xi, nullptr, p, h, s.flow_box(), {}, tight.integrator);
            if (step.terminal != TerminalEvent::TimeLimit) continue;
            const Vec2 ph{step.back().x, step.back().y};
            const std::optional<double> f0 = solve_at_point(s, g, mode, seed, p, tight);
            const std::optional<double> f1 = solve_at_point(s, g, mode, seed, ph, tight);
            if (!f0 || !f1) continue;
            const double r = std::abs((*f1 - *f0) / h - gbar(p.x, p.y));
#pragma omp critical
            {
                stats.max = std::max(stats.max, r);
                sum += r;
                ++stats.count;
            }
        } catch (const Error&) {
        }
    }
    stats.mean = stats.count ? sum / stats.count : 0.0;
    return stats;
}

// ---------------------------------------------------------------------------
// Contact exponent
// ---------------------------------------------------------------------------

namespace {

// Unit-speed motion along the transversal leaf through p (tangent to xi'_G;
// G is constant and F strictly monotone along it).
VecField unit_transversal(const DerivedFields& der, double sign) {
    return {[der, sign](double x, double y) {
                const Vec2 v = der.xi_g.at(x, y);
                const double n = norm(v);
                if (n < 1e-300) throw DegenerateTransversal("transversal direction vanished");
                return Vec2{sign * v.x / n, sign * v.y / n};
            },
            std::nullopt};
}

} // namespace

ContactEstimate contact_exponent(const Scenario& s, const ChartMap& map,
                                 const SeparatrixPair& pair, std::span<const double> etas,
                                 bool reversed, const SolverConfig& cfg) {
    const DerivedFields der = derived_fields(s.xi, s.F, s.G, s.box);
    const Rect bounds = s.flow_box();
    const ScalarFn monF = [&s](double x, double y) { return s.F.value(x, y); };
    const ScalarFn monG = [&s](double x, double y) { return s.G.value(x, y); };

    const double b_src = reversed ? pair.b1 : pair.b2;
    const double b_dst = reversed ? pair.b2 : pair.b1;

    // Intersection points s_i ∩ t_i; regular chart points even on F = a.
    const Vec2 q_src = map.from_chart(pair.a, b_src);
    const Vec2 q_dst = map.from_chart(pair.a, b_dst);

    // dF/ds > 0 along +xi'_G, so Left-side V needs the -direction.
    const double into = pair.side == Side::Left ? -1.0 : 1.0;
    const VecField walk = unit_transversal(der, into);

    const int flow_dir = (b_dst - b_src) * der.omega_sign > 0.0 ? 1 : -1;
    const VecField flow{[&s, flow_dir](double x, double y) {
                            const Vec2 v = s.xi.at(x, y);
                            return Vec2{flow_dir * v.x, flow_dir * v.y};
                        },
                        std::nullopt};

    ContactEstimate est;
    for (double eta : etas) {
        if (eta <= 0.0) continue;
        try {
            // Offset along the source transversal by arc length eta.
            const Trajectory off = integrate(walk, nullptr, q_src, eta, bounds, {}, cfg.integrator);
            if (off.terminal != TerminalEvent::TimeLimit) continue;
            const Vec2 start{off.back().x, off.back().y};

            const CrossingEvent ev{monG, b_dst, Direction::Any};
            const CrossResult c =
                cross_transversal(flow, nullptr, start, ev, cfg.t_max * 4.0, bounds, cfg.integrator);
            if (!c.hit) continue;

            // Arrival offset: arc length along the target leaf to F = F(c).
            const double f_target = s.F.value(c.p.x, c.p.y);
            const CrossingEvent evF{monF, f_target, Direction::Any};
            const CrossResult arc = cross_transversal(walk, nullptr, q_dst, evF,
                                                      10.0 * (1.0 + eta), bounds, cfg.integrator);
            if (!arc.hit) continue;
            const double eta_dst = arc.t;
            if (eta > 1e-10 && eta_dst > 1e-10) {
                est.eta_src.push_back(eta);
                est.eta_dst.push_back(eta_dst);
            }
        } catch (const Error&) {
        }
    }

    if (est.eta_src.size() < 6)
        throw TooFewSamples("contact exponent fit needs >= 6 samples, got " +
                            std::to_string(est.eta_src.size()));
    std::vector<double> lx(est.eta_src.size()), ly(est.eta_src.size());
    for (std::size_t i = 0; i < est.eta_src.size(); ++i) {
        lx[i] = std::log(est.eta_src[i]);
        ly[i] = std::log(est.eta_dst[i]);
    }
    const LineFit f = fit_line(lx, ly);
    est.alpha_hat = f.slope;
    est.fit_r2 = f.r2;
    est.used = est.eta_src.size();
    return est;
}

// ---------------------------------------------------------------------------
// Pullback regularity
// ---------------------------------------------------------------------------

PullbackRegularity pullback_regularity(const Scenario& s, const ScalarFn& f_hat, Segment seg,
                                       int probe_max) {
    auto sample = [&](double t) {
        const Vec2 p = seg.at(t);
        const Vec2 c = s.chart_point(p);
        return f_hat(c.x, c.y);
    };

    // Locate the separatrix crossing: F - a changes sign along the segment.
    // The pair whose a-value brackets is chosen from the scenario's pairs.
    double t_star = 0.5;
    {
        bool found = false;
        for (const auto& pair : s.pairs) {
            double lo = 0.0, hi = 1.0;
            auto fval = [&](double t) {
                const Vec2 p = seg.at(t);
                return s.F.value(p.x, p.y) - pair.a;
            };
            if (fval(lo) * fval(hi) > 0.0) continue;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (fval(lo) * fval(mid) <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            t_star = 0.5 * (lo + hi);
            found = true;
            break;
        }
        if (!found)
            throw ValidationError("segment does not cross any declared separatrix level");
    }

    PullbackRegularity out;
    const double span = std::min(t_star, 1.0 - t_star);
    const double h0 = span / 10.0;
    const int n_scales = 9;
    const double offset = 0.37139; // keeps stencils off the kink

    for (int m = 1; m <= probe_max; ++m) {
        std::vector<double> coef(m + 1);
        coef[0] = 1.0;
        for (int i = 1; i <= m; ++i) coef[i] = coef[i - 1] * (m - i + 1) / i;

        std::vector<double> lnh, lnD;
        double fmax = 0.0;
        for (int k = 0; k < n_scales; ++k) {
            const double h = h0 * std::pow(0.5, k);
            double best = 0.0;
            for (double side : {1.0, -1.0}) {
                double acc = 0.0;
                for (int i = 0; i <= m; ++i) {
                    const double v = sample(t_star + side * (offset + i) * h);
                    fmax = std::max(fmax, std::abs(v));
                    acc += ((m - i) % 2 == 0 ? 1.0 : -1.0) * coef[i] * v;
                }
                best = std::max(best, std::abs(acc));
            }
            const double noise = std::pow(2.0, m) * 1e-14 * (1.0 + fmax);
            if (best > 8.0 * noise) {
                lnh.push_back(std::log(h));
                lnD.push_back(std::log(best));
            }
        }
        if (lnh.size() < 4) {
            // Differences vanish within noise at this order: smooth to here.
            out.gamma_hat = probe_max;
            out.at_least = true;
            out.fit_r2 = 1.0;
            return out;
        }
        const LineFit f = fit_line(lnh, lnD);
        if (f.slope <= m - 0.3) {
            // Saturated below the differencing order: this is the exponent.
            out.gamma_hat = f.slope;
            out.fit_r2 = f.r2;
            if (f.r2 < 0.99)
                throw Error("pullback exponent fit is indeterminate (R^2 = " +
                            std::to_string(f.r2) + ")");
            return out;
        }
    }
    out.gamma_hat = probe_max;
    out.at_least = true;
    out.fit_r2 = 1.0;
    return out;
}

} // namespace cohomfield
