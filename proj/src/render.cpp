#include "cohomfield/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "cohomfield/chart.hpp"
#include "cohomfield/errors.hpp"
#include "cohomfield/flow.hpp"

namespace cohomfield {

namespace {

struct Mapper {
    Rect box;
    int w, h;
    double px(double x) const { return (x - box.x0) / box.width() * (w - 40) + 20; }
    double py(double y) const { return (box.y1 - y) / box.height() * (h - 40) + 20; }
};

std::string polyline(const Mapper& m, const std::vector<Vec2>& pts, const char* style) {
    if (pts.size() < 2) return "";
    std::ostringstream out;
    out << "<polyline fill=\"none\" " << style << " points=\"";
    char buf[64];
    for (const Vec2& p : pts) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", m.px(p.x), m.py(p.y));
        out << buf;
    }
    out << "\"/>\n";
    return out.str();
}

// Integrate both directions from p0, clipping to the box; downsampled to keep
// files small.
std::vector<Vec2> leaf_polyline(const VecField& v, Vec2 p0, const Rect& box,
                                const IntegratorConfig& cfg, double t_max) {
    auto run = [&](double sign) {
        const VecField dir{[&v, sign](double x, double y) {
                               const Vec2 w = v.at(x, y);
                               return Vec2{sign * w.x, sign * w.y};
                           },
                           std::nullopt};
        return integrate(dir, nullptr, p0, t_max, box, {}, cfg);
    };
    const Trajectory fwd = run(1.0);
    const Trajectory bwd = run(-1.0);
    std::vector<Vec2> pts;
    for (std::size_t i = bwd.samples.size(); i-- > 0;) pts.push_back({bwd.samples[i].x, bwd.samples[i].y});
    for (std::size_t i = 1; i < fwd.samples.size(); ++i) pts.push_back({fwd.samples[i].x, fwd.samples[i].y});
    if (pts.size() > 400) {
        std::vector<Vec2> thin;
        const double stride = pts.size() / 400.0;
        for (double k = 0; k < pts.size(); k += stride) thin.push_back(pts[static_cast<std::size_t>(k)]);
        thin.push_back(pts.back());
        return thin;
    }
    return pts;
}

} // namespace

std::string render_svg(const Scenario& s, const RenderOptions& opts) {
    const Mapper m{s.box, opts.width, opts.height};
    IntegratorConfig icfg;
    icfg.abs_tol = icfg.rel_tol = 1e-8; // plotting accuracy
    icfg.wall_guard_s = 2.0;
    const VecField xi = as_vecfield(s.xi);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
        << opts.height << "\" viewBox=\"0 0 " << opts.width << " " << opts.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    std::optional<DerivedFields> der;
    std::optional<ChartMap> map;
    if (!s.pairs.empty()) {
        der = derived_fields(s.xi, s.F, s.G, s.box);
        const auto& pr = s.pairs.front();
        const double w = 0.75;
        Rect region;
        if (pr.side == Side::Left)
            region = {pr.a - w, pr.a - w / 64.0, pr.b1, pr.b2};
        else
            region = {pr.a + w / 64.0, pr.a + w, pr.b1, pr.b2};
        map.emplace(s, region, pr.anchor, 16, 16, icfg);
    }

    // Thin leaves of the F-foliation at seeded chart levels.
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> level(0.05, 1.4);
    if (map) {
        const auto& pr = s.pairs.front();
        const double gb = s.G.value(pr.anchor.x, pr.anchor.y);
        for (int k = 0; k < opts.leaves; ++k) {
            for (double sign : {pr.into_v(), -pr.into_v()}) {
                const double xp = pr.a + sign * level(rng);
                if (s.image_predicate && !s.image_predicate(xp, gb)) continue;
                try {
                    const Vec2 p0 = map->from_chart(xp, gb);
                    svg << polyline(m, leaf_polyline(xi, p0, s.box, icfg, 80.0),
                                    "stroke=\"#888888\" stroke-width=\"0.8\"");
                } catch (const Error&) {
                    // unreachable level: skip quietly (not a styled leaf)
                }
            }
        }
    }

    // Dashed transversal leaves at b, b1, b2 for every pair.
    if (map) {
        for (const auto& pr : s.pairs) {
            for (double bv : {pr.b, pr.b1, pr.b2}) {
                const double xp = pr.a + pr.into_v() * 0.5;
                Vec2 p0;
                try {
                    p0 = map->from_chart(xp, bv);
                } catch (const Error& e) {
                    throw Error(std::string("transversal leaf unreachable: ") + e.what());
                }
                svg << polyline(m, leaf_polyline(der->xi_g, p0, s.box, icfg, 40.0),
                                "stroke=\"#2060c0\" stroke-width=\"0.9\" stroke-dasharray=\"5 4\"");
            }
        }
    }

    // Thick separatrices: the points s_i ∩ t_i are regular chart points.
    if (map) {
        std::vector<Vec2> done;
        for (const auto& pr : s.pairs) {
            for (double bv : {pr.b1, pr.b2}) {
                Vec2 p0;
                try {
                    p0 = map->from_chart(pr.a, bv);
                } catch (const Error& e) {
                    throw Error(std::string("separatrix point unreachable: ") + e.what());
                }
                bool dup = false;
                for (const Vec2& q : done)
                    if (norm(q - p0) < 1e-6) dup = true;
                if (dup) continue;
                done.push_back(p0);
                svg << polyline(m, leaf_polyline(xi, p0, s.box, icfg, 80.0),
                                "stroke=\"#c03020\" stroke-width=\"2.5\"");
            }
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace cohomfield
