#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace cohomfield {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y = slope*x + intercept with R^2.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    LineFit f;
    const std::size_t n = xs.size() < ys.size() ? xs.size() : ys.size();
    f.n = n;
    if (n < 2) return f;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

} // namespace cohomfield
