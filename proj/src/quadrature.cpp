#include "cohomfield/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cohomfield {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK constants).
constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
};
constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
};
constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
};

struct Interval {
    double a, b, value, error;
};

} // namespace

double gk15_panel(const Fn1& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const double fc = f(c);
    double k15 = wgk[7] * fc;
    double g7 = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * xgk[i];
        const double pair = f(c - dx) + f(c + dx);
        k15 += wgk[i] * pair;
        if (i % 2 == 1) g7 += wg[i / 2] * pair;
    }
    k15 *= h;
    g7 *= h;

    err = 200.0 * std::abs(k15 - g7);
    err *= std::sqrt(err);
    err = std::min(err, std::abs(k15 - g7) * 200.0);
    return k15;
}

QuadResult integrate_adaptive_split(const Fn1& f, double a, double b,
                                    std::span<const double> splits, double rel_tol,
                                    double abs_tol, int max_subdiv) {
    std::vector<double> knots;
    knots.push_back(a);
    for (double s : splits)
        if (s > a && s < b) knots.push_back(s);
    knots.push_back(b);
    std::sort(knots.begin(), knots.end());

    std::vector<Interval> work;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        Interval iv{knots[i], knots[i + 1], 0.0, 0.0};
        iv.value = gk15_panel(f, iv.a, iv.b, iv.error);
        work.push_back(iv);
    }

    QuadResult res;
    for (int iter = 0; iter < max_subdiv; ++iter) {
        double total = 0.0, toterr = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < work.size(); ++i) {
            total += work[i].value;
            toterr += work[i].error;
            if (work[i].error > work[worst].error) worst = i;
        }
        const double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (toterr <= tol) {
            res.value = total;
            res.error = toterr;
            res.subdivisions = iter;
            res.converged = true;
            return res;
        }
        const Interval w = work[worst];
        const double mid = 0.5 * (w.a + w.b);
        if (mid <= w.a || mid >= w.b) break; // interval at rounding limit
        Interval left{w.a, mid, 0.0, 0.0}, right{mid, w.b, 0.0, 0.0};
        left.value = gk15_panel(f, left.a, left.b, left.error);
        right.value = gk15_panel(f, right.a, right.b, right.error);
        work[worst] = left;
        work.push_back(right);
        res.subdivisions = iter + 1;
    }

    double total = 0.0, toterr = 0.0;
    for (const auto& iv : work) {
        total += iv.value;
        toterr += iv.error;
    }
    res.value = total;
    res.error = toterr;
    res.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(total));
    return res;
}

QuadResult integrate_adaptive(const Fn1& f, double a, double b, double rel_tol,
                              double abs_tol, int max_subdiv) {
    return integrate_adaptive_split(f, a, b, {}, rel_tol, abs_tol, max_subdiv);
}

} // namespace cohomfield
