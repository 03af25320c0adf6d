#include <doctest.h>

#include <cmath>

#include "cohomfield/quadrature.hpp"

using namespace cohomfield;

TEST_CASE("gk15 panel is exact on low-degree polynomials") {
    double err;
    const double v = gk15_panel([](double t) { return 3 * t * t - t + 2; }, -1.0, 2.0, err);
    // antiderivative t^3 - t^2/2 + 2t
    const double exact = (8.0 - 2.0 + 4.0) - (-1.0 - 0.5 - 2.0);
    CHECK(v == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("adaptive quadrature handles an integrable endpoint-adjacent spike") {
    // int_{-1}^{1} (d^2+t^2)^{-1/2} dt = 2 asinh(1/d)
    for (double d : {1e-2, 1e-5, 1e-8}) {
        const double splits[1] = {0.0};
        const QuadResult q = integrate_adaptive_split(
            [d](double t) { return 1.0 / std::sqrt(d * d + t * t); }, -1.0, 1.0, splits, 1e-10,
            1e-13, 2000);
        REQUIRE(q.converged);
        CHECK(q.value == doctest::Approx(2.0 * std::asinh(1.0 / d)).epsilon(1e-9));
    }
}

TEST_CASE("adaptive quadrature reports failure when the budget is too small") {
    const QuadResult q = integrate_adaptive(
        [](double t) { return 1.0 / std::sqrt(1e-14 + t * t); }, -1.0, 1.0, 1e-12, 1e-15, 4);
    CHECK(!q.converged);
}

TEST_CASE("odd integrand over a symmetric interval cancels to rounding") {
    const double splits[1] = {0.0};
    const QuadResult q = integrate_adaptive_split([](double t) { return t; }, -1.0, 1.0, splits,
                                                  1e-12, 1e-15, 100);
    CHECK(std::abs(q.value) < 1e-15);
}
