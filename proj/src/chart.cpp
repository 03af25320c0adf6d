#include "cohomfield/chart.hpp"

#include <algorithm>
#include <cmath>

#include "cohomfield/errors.hpp"

namespace cohomfield {

Vec2 to_chart(const ScalarField& F, const ScalarField& G, Vec2 p) {
    return {F.value(p.x, p.y), G.value(p.x, p.y)};
}

Vec2 to_chart(const Scenario& s, Vec2 p) { return to_chart(s.F, s.G, p); }

namespace {

struct NewtonOutcome {
    bool converged = false;
    Vec2 p{};
    double residual = 0.0;
    bool left_box = false;
};

double residual_norm(const Scenario& s, Vec2 p, Vec2 target) {
    return std::hypot(s.F.value(p.x, p.y) - target.x, s.G.value(p.x, p.y) - target.y);
}

NewtonOutcome newton(const Scenario& s, Vec2 target, Vec2 p, const FromChartOptions& opts) {
    const Rect bounds = s.flow_box();
    const double scale = opts.scale.value_or(std::max(1.0, norm(target)));
    const double tol = std::max(opts.rel_tol * scale, opts.abs_floor);

    NewtonOutcome out;
    double r = residual_norm(s, p, target);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (r <= tol) {
            out.converged = true;
            out.p = p;
            out.residual = r;
            return out;
        }
        const DualValue f = s.F.dual(p.x, p.y);
        const DualValue g = s.G.dual(p.x, p.y);
        const double det = f.dx * g.dy - f.dy * g.dx;
        if (det == 0.0 || !std::isfinite(det)) break;
        const double rx = f.value - target.x, ry = g.value - target.y;
        const Vec2 step{-(g.dy * rx - f.dy * ry) / det, -(-g.dx * rx + f.dx * ry) / det};

        // Halve until the residual norm decreases.
        double lam = 1.0;
        bool improved = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            const Vec2 cand = p + lam * step;
            if (bounds.contains(cand)) {
                double rc;
                try {
                    rc = residual_norm(s, cand, target);
                } catch (const Error&) {
                    rc = std::numeric_limits<double>::infinity();
                }
                if (rc < r) {
                    p = cand;
                    r = rc;
                    improved = true;
                    break;
                }
            } else if (h == 0 && !bounds.contains(cand)) {
                out.left_box = true;
            }
            lam *= 0.5;
        }
        if (!improved) break;
    }
    out.p = p;
    out.residual = r;
    out.converged = r <= tol;
    return out;
}

} // namespace

Vec2 invert_chart(const Scenario& s, Vec2 target, Vec2 seed, const FromChartOptions& opts) {
    if (s.image_predicate && !s.image_predicate(target.x, target.y))
        throw OutsideImage("chart point (" + std::to_string(target.x) + ", " +
                           std::to_string(target.y) + ") is outside the chart image: " +
                           s.image_text);

    NewtonOutcome direct = newton(s, target, seed, opts);
    if (direct.converged) return direct.p;

    // Continuation along a chart-space path of intermediate targets.
    Vec2 from_chart_pt = to_chart(s, seed);
    Vec2 cur = seed;
    double t = 0.0;
    double step = 0.5;
    bool exited = false;
    int budget = 400;
    while (t < 1.0 && budget-- > 0) {
        const double tn = std::min(1.0, t + step);
        const Vec2 mid{from_chart_pt.x + (target.x - from_chart_pt.x) * tn,
                       from_chart_pt.y + (target.y - from_chart_pt.y) * tn};
        FromChartOptions local = opts;
        if (tn < 1.0) local.scale.reset();
        NewtonOutcome o = newton(s, mid, cur, local);
        if (o.converged) {
            cur = o.p;
            t = tn;
            step = std::min(0.5, step * 2.0);
        } else {
            exited = exited || o.left_box;
            step *= 0.5;
            if (step < 1e-6) break;
        }
    }
    if (t >= 1.0) return cur;
    if (exited || !s.flow_box().contains(cur))
        throw OutsideImage("continuation toward (" + std::to_string(target.x) + ", " +
                           std::to_string(target.y) + ") exits the domain box");
    NewtonOutcome last = newton(s, target, cur, opts);
    if (last.converged) return last.p;
    throw NoConvergence("chart inversion stagnated at (" + std::to_string(target.x) + ", " +
                        std::to_string(target.y) + ")", last.residual);
}

// ---------------------------------------------------------------------------
// ChartMap
// ---------------------------------------------------------------------------

ChartMap::ChartMap(const Scenario& scenario, Rect region, Vec2 anchor, int nx, int ny,
                   const IntegratorConfig& cfg)
    : scenario_(&scenario), region_(region), anchor_(anchor), nx_(nx), ny_(ny) {
    cache_.assign(static_cast<std::size_t>(nx_) * ny_, Vec2{});
    cache_ok_.assign(static_cast<std::size_t>(nx_) * ny_, false);
    build(cfg);
}

void ChartMap::build(const IntegratorConfig& cfg) {
    const Scenario& s = *scenario_;
    const DerivedFields der = derived_fields(s.xi, s.F, s.G, s.box);
    const Rect bounds = s.flow_box();
    const VecField xi = as_vecfield(s.xi);

    auto col_x = [&](int i) { return region_.x0 + region_.width() * i / (nx_ - 1.0); };
    auto row_y = [&](int j) { return region_.y0 + region_.height() * j / (ny_ - 1.0); };

    const ScalarFn monF = [&s](double x, double y) { return s.F.value(x, y); };
    const ScalarFn monG = [&s](double x, double y) { return s.G.value(x, y); };

    // March along xi'_G (F changes at unit rate, G constant) to reach each
    // column's F-level on the anchor's G-leaf, then along +-xi to each row.
    const Vec2 ca = to_chart(s, anchor_);
    std::vector<std::optional<Vec2>> col_base(nx_);

    auto march_columns = [&](int begin, int end, int dir) {
        Vec2 cur = anchor_;
        for (int i = begin; i != end; i += dir) {
            const double fx = col_x(i);
            const double have = s.F.value(cur.x, cur.y);
            if (std::abs(have - fx) > 1e-12) {
                const double span = fx - have;
                const VecField g_dir{[&der, span](double x, double y) {
                                         Vec2 v = der.xi_g.at(x, y);
                                         return span > 0 ? v : Vec2{-v.x, -v.y};
                                     },
                                     std::nullopt};
                CrossingEvent ev{monF, fx, Direction::Any};
                const CrossResult c =
                    cross_transversal(g_dir, nullptr, cur, ev, std::abs(span) * 4.0 + 1.0, bounds, cfg);
                if (!c.hit) {
                    col_base[i] = std::nullopt;
                    continue; // later columns may still be reachable from anchor? no: stop
                }
                cur = c.p;
            }
            col_base[i] = cur;
        }
    };
    // nearest column to the anchor, then sweep outward both ways
    int ia = 0;
    for (int i = 1; i < nx_; ++i)
        if (std::abs(col_x(i) - ca.x) < std::abs(col_x(ia) - ca.x)) ia = i;
    march_columns(ia, -1, -1);
    march_columns(ia, nx_, +1);

    const int lg_sign = der.omega_sign;
    for (int i = 0; i < nx_; ++i) {
        if (!col_base[i]) continue;
        auto march_rows = [&](int jb, int je, int dir) {
            Vec2 cur = *col_base[i];
            for (int j = jb; j != je; j += dir) {
                const double gy = row_y(j);
                const double have = s.G.value(cur.x, cur.y);
                if (std::abs(have - gy) > 1e-12) {
                    const double want_up = gy > have ? 1.0 : -1.0;
                    const double flow_sign = want_up * lg_sign;
                    const VecField f_dir{[&xi, flow_sign](double x, double y) {
                                             Vec2 v = xi.at(x, y);
                                             return Vec2{flow_sign * v.x, flow_sign * v.y};
                                         },
                                         std::nullopt};
                    CrossingEvent ev{monG, gy, Direction::Any};
                    const CrossResult c =
                        cross_transversal(f_dir, nullptr, cur, ev, 200.0, bounds, cfg);
                    if (!c.hit) break;
                    cur = c.p;
                }
                const std::size_t idx = static_cast<std::size_t>(j) * nx_ + i;
                cache_[idx] = cur;
                cache_ok_[idx] = true;
            }
        };
        int ja = 0;
        const double gb = s.G.value(col_base[i]->x, col_base[i]->y);
        for (int j = 1; j < ny_; ++j)
            if (std::abs(row_y(j) - gb) < std::abs(row_y(ja) - gb)) ja = j;
        march_rows(ja, -1, -1);
        march_rows(ja, ny_, +1);
    }
}

double ChartMap::cache_valid_fraction() const {
    std::size_t ok = 0;
    for (bool b : cache_ok_) ok += b;
    return cache_ok_.empty() ? 0.0 : static_cast<double>(ok) / cache_ok_.size();
}

Vec2 ChartMap::seed_near(double xp, double yp) const {
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    const int i0 = clampi(static_cast<int>(std::lround((xp - region_.x0) / region_.width() * (nx_ - 1))),
                          0, nx_ - 1);
    const int j0 = clampi(static_cast<int>(std::lround((yp - region_.y0) / region_.height() * (ny_ - 1))),
                          0, ny_ - 1);
    // widening ring search for a valid cell
    for (int radius = 0; radius < std::max(nx_, ny_); ++radius) {
        for (int dj = -radius; dj <= radius; ++dj) {
            for (int di = -radius; di <= radius; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != radius) continue;
                const int i = i0 + di, j = j0 + dj;
                if (i < 0 || i >= nx_ || j < 0 || j >= ny_) continue;
                const std::size_t idx = static_cast<std::size_t>(j) * nx_ + i;
                if (cache_ok_[idx]) return cache_[idx];
            }
        }
    }
    return anchor_;
}

Vec2 ChartMap::from_chart(double xp, double yp, const FromChartOptions& opts) const {
    return invert_chart(*scenario_, {xp, yp}, seed_near(xp, yp), opts);
}

// ---------------------------------------------------------------------------
// Pushforward of the right-hand side
// ---------------------------------------------------------------------------

namespace {

double rhs_at_plane_point(const Scenario& s, const ScalarField& g, Mode mode, Vec2 p) {
    const double gv = g.value(p.x, p.y);
    if (mode == Mode::XiPrime) return gv;
    const double lg = lie_derivative(s.xi, s.G, p);
    if (std::abs(lg) < 1e-14)
        throw DegenerateTransversal("L_xi G below 1e-14 at the inverted point");
    return gv / lg;
}

} // namespace

double pushforward_rhs(const Scenario& s, const ChartMap& map, const ScalarField& g, Mode mode,
                       double xp, double yp, const FromChartOptions& opts) {
    const Vec2 p = map.from_chart(xp, yp, opts);
    return rhs_at_plane_point(s, g, mode, p);
}

PushforwardEvaluator::PushforwardEvaluator(const Scenario& s, const ChartMap& map,
                                           const ScalarField& g, Mode mode,
                                           std::optional<Vec2> singular_center)
    : s_(&s), map_(&map), g_(&g), mode_(mode), center_(singular_center) {}

double PushforwardEvaluator::operator()(double xp, double yp) {
    FromChartOptions opts;
    if (center_) opts.scale = std::max(std::hypot(xp - center_->x, yp - center_->y), 1e-280);
    Vec2 seed;
    if (last_plane_ && last_chart_ &&
        std::hypot(xp - last_chart_->x, yp - last_chart_->y) < 0.25 * (1.0 + norm(*last_chart_))) {
        seed = *last_plane_;
    } else {
        seed = map_->seed_near(xp, yp);
    }
    Vec2 p;
    try {
        p = invert_chart(*s_, {xp, yp}, seed, opts);
    } catch (const NoConvergence&) {
        p = invert_chart(*s_, {xp, yp}, map_->seed_near(xp, yp), opts);
    }
    last_plane_ = p;
    last_chart_ = Vec2{xp, yp};
    return rhs_at_plane_point(*s_, *g_, mode_, p);
}

// ---------------------------------------------------------------------------
// verify_inseparable
// ---------------------------------------------------------------------------

InseparableReport verify_inseparable(const Scenario& s, const ChartMap& map,
                                     const SeparatrixPair& pair, std::span<const double> deltas,
                                     const IntegratorConfig& cfg) {
    InseparableReport rep;
    const VecField xi = as_vecfield(s.xi);
    const Rect bounds = s.flow_box();
    const ScalarFn monG = [&s](double x, double y) { return s.G.value(x, y); };

    // Orientation toward increasing G.
    const double lg_anchor = lie_derivative(s.xi, s.G, pair.anchor);
    const double flow_sign = lg_anchor > 0.0 ? 1.0 : -1.0;
    const VecField up{[&xi, flow_sign](double x, double y) {
                          const Vec2 v = xi.at(x, y);
                          return Vec2{flow_sign * v.x, flow_sign * v.y};
                      },
                      std::nullopt};

    bool all = true;
    for (double delta : deltas) {
        if (delta == 0.0) throw OnSeparatrix("delta = 0 starts on the separatrix itself");
        DeltaProbe probe;
        probe.delta = delta;
        const double xp = pair.a + pair.into_v() * std::abs(delta);
        Vec2 p;
        try {
            p = map.from_chart(xp, pair.b1);
        } catch (const Error&) {
            probe.terminal = TerminalEvent::StepFailure;
            rep.probes.push_back(probe);
            all = false;
            continue;
        }
        CrossingEvent ev_b{monG, pair.b, Direction::Any};
        const CrossResult c1 = cross_transversal(up, nullptr, p, ev_b, 1000.0, bounds, cfg);
        probe.terminal = c1.terminal;
        if (c1.hit) {
            probe.crossed_b = true;
            probe.at_b = c1.p;
            CrossingEvent ev_b2{monG, pair.b2, Direction::Any};
            const CrossResult c2 = cross_transversal(up, nullptr, c1.p, ev_b2, 1000.0, bounds, cfg);
            probe.terminal = c2.terminal;
            if (c2.hit) {
                probe.crossed_b2 = true;
                probe.at_b2 = c2.p;
            }
        }
        all = all && probe.crossed_b && probe.crossed_b2;
        rep.probes.push_back(probe);
    }
    rep.all_crossed = all && !rep.probes.empty();

    // Limiting behavior: the b2 crossings must settle down (they accumulate
    // on s2 as delta -> 0).
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < rep.probes.size(); ++i) {
        if (rep.probes[i].crossed_b2 && rep.probes[i + 1].crossed_b2)
            gaps.push_back(norm(rep.probes[i + 1].at_b2 - rep.probes[i].at_b2));
    }
    if (!gaps.empty()) {
        rep.final_gap = gaps.back();
        bool dec = true;
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
            if (gaps[i + 1] > gaps[i] * 1.1 + 1e-12) dec = false;
        rep.converging = dec;
    }
    return rep;
}

} // namespace cohomfield
