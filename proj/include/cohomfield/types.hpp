#pragma once

#include <cmath>
#include <functional>
#include <string>

namespace cohomfield {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Rect {
    double x0 = -1.0, x1 = 1.0;
    double y0 = -1.0, y1 = 1.0;

    bool contains(Vec2 p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    Rect inflated(double factor) const {
        const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
        const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
        return {cx - hw, cx + hw, cy - hh, cy + hh};
    }
};

enum class Side { Left, Right };

// Which equation a right-hand side g refers to: L_xi f = g or L_{xi'_F} f = g.
enum class Mode { Xi, XiPrime };

// Three-valued verdict; numerical classifiers refuse to decide at boundaries.
enum class Tri { False_, True_, Indeterminate };

inline const char* to_string(Tri t) {
    switch (t) {
        case Tri::False_: return "false";
        case Tri::True_: return "true";
        default: return "indeterminate";
    }
}

// Scalar function of plane (or chart) coordinates.
using ScalarFn = std::function<double(double, double)>;

// A separatrix pair in normal-chart data: s1, s2 share the F-value `a`,
// the separating transversal leaf is G = b, and the leaves G = b1, G = b2
// cut s1 and s2 respectively (b1 < b < b2).  `side` says whether the
// common saturated region V lies in {F < a} or {F > a}; `anchor` is a
// plane point inside V used to seed chart inversions.
struct SeparatrixPair {
    double a = 0.0;
    double b = 0.0;
    double b1 = -1.0;
    double b2 = 1.0;
    Side side = Side::Left;
    Vec2 anchor{};

    // Signed offset direction: chart x' = a + into_v() * delta lies in V.
    double into_v() const { return side == Side::Left ? -1.0 : 1.0; }
};

} // namespace cohomfield
