#include <doctest.h>

#include <cmath>
#include <random>

#include "cohomfield/expr.hpp"
#include "cohomfield/scenarios.hpp"

using namespace cohomfield;

namespace {

// Central finite-difference gradient oracle.
std::pair<double, double> fd_grad(const ExprPtr& e, double x, double y, double h = 1e-6) {
    const double gx = (eval(e, x + h, y) - eval(e, x - h, y)) / (2 * h);
    const double gy = (eval(e, x, y + h) - eval(e, x, y - h)) / (2 * h);
    return {gx, gy};
}

} // namespace

TEST_CASE("parse: minimal product") {
    const ExprPtr e = parse("2*y");
    const auto* b = std::get_if<Binary>(&e->node);
    REQUIRE(b != nullptr);
    CHECK(b->op == BinaryOp::Mul);
    CHECK(const_value(b->a) != nullptr);
    CHECK(*const_value(b->a) == 2.0);
    CHECK(std::get<Var>(b->b->node) == Var::Y);
}

TEST_CASE("parse: precedence and evaluation") {
    CHECK(eval(parse("(y^2-1)*exp(x)"), 0.0, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
    // ^ binds tighter than unary minus
    CHECK(eval(parse("-x^2"), 3.0, 0.0) == doctest::Approx(-9.0));
    // right-associative power
    CHECK(eval(parse("2^3^2"), 0.0, 0.0) == doctest::Approx(512.0));
    CHECK(eval(parse("2^-1"), 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("parse: dangling operator reports offset") {
    try {
        parse("2*");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 2);
        CHECK(!e.expected.empty());
    }
}

TEST_CASE("eval examples") {
    CHECK(eval(parse("(y^2-1)*exp(x)"), 0.0, 0.0) == doctest::Approx(-1.0));
    CHECK(eval(parse("-2*y*exp(x)"), 1.0, 1.0) == doctest::Approx(-2.0 * std::exp(1.0)));
    CHECK_THROWS_AS(eval(parse("ln(abs(1-y))"), 0.0, 1.0), DomainFault);
    CHECK_THROWS_AS(eval(parse("1/(x-1)"), 1.0, 0.0), DomainFault);
    CHECK_THROWS_AS(eval(parse("sqrt(x)"), -1.0, 0.0), DomainFault);
}

TEST_CASE("grad examples") {
    const ExprPtr F = parse("(y^2-1)*exp(x)");
    const DualValue d = eval_dual(F, 0.0, 0.0);
    CHECK(d.dx == doctest::Approx(-1.0));
    CHECK(d.dy == doctest::Approx(0.0));

    // x/sqrt(x^2+y^2) at (3,4): frozen from the finite-difference oracle
    const ExprPtr g = parse("x/sqrt(x^2+y^2)");
    const auto [fx, fy] = fd_grad(g, 3.0, 4.0);
    const DualValue dg = eval_dual(g, 3.0, 4.0);
    CHECK(dg.dx == doctest::Approx(16.0 / 125.0).epsilon(1e-12));
    CHECK(dg.dy == doctest::Approx(-12.0 / 125.0).epsilon(1e-12));
    CHECK(dg.dx == doctest::Approx(fx).epsilon(1e-7));
    CHECK(dg.dy == doctest::Approx(fy).epsilon(1e-7));

    const DualValue dc = eval_dual(parse("5"), 17.0, -3.0);
    CHECK(dc.dx == 0.0);
    CHECK(dc.dy == 0.0);
}

TEST_CASE("non-differentiable kinks") {
    CHECK_THROWS_AS(eval_dual(parse("abs(x)"), 0.0, 1.0), NonDifferentiable);
    CHECK_THROWS_AS(eval_dual(parse("cbrt(x)"), 0.0, 1.0), NonDifferentiable);
    CHECK(eval(parse("abs(x)"), 0.0, 1.0) == 0.0); // plain eval is fine at the kink
}

TEST_CASE("gradient matches central differences at random smooth points") {
    const char* exprs[] = {
        "(y^2-1)*exp(x)",          "-2*y*exp(x)",
        "(y+1)^3*(y-1)*exp(x)",    "(2*y-1)*exp(x)",
        "2*x^2*y",                 "exp(-x)/(1+y^2)",
        "sin(x)*cos(y)+atan(x*y)", "tanh(x)+cbrt(1+x^2+y^2)",
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const char* txt : exprs) {
        const ExprPtr e = parse(txt);
        for (int k = 0; k < 1000; ++k) {
            const double x = u(rng), y = u(rng);
            DualValue d;
            try {
                d = eval_dual(e, x, y);
            } catch (const Error&) {
                continue;
            }
            const auto [fx, fy] = fd_grad(e, x, y);
            const double den = 1.0 + std::hypot(d.dx, d.dy);
            CHECK(std::abs(d.dx - fx) / den < 1e-6);
            CHECK(std::abs(d.dy - fy) / den < 1e-6);
        }
    }
}

TEST_CASE("print/parse round trip is structural identity") {
    const char* exprs[] = {
        "(y^2-1)*exp(x)", "-2*y*exp(x)",  "(y+1)^3*(y-1)*exp(x)", "(2*y-1)*exp(x)",
        "2*x^2*y",        "-1",           "exp(-x)/(1+y^2)",      "exp(-x/2)/sqrt(1+y^2)",
        "0.5*ln(abs((1+y)/(1-y)))",       "x+2*ln(abs(1-y))",
        "cbrt(x)*(y-sqrt(x^2+y^2))^2",    "x-(-y)",               "(x^2)^y",
        "2^3^2",          "-x^2",         "x/y/2",                "x-(y-1)",
    };
    for (const char* txt : exprs) {
        const ExprPtr e = parse(txt);
        const ExprPtr again = parse(print(e));
        CHECK_MESSAGE(structurally_equal(e, again), "round trip failed for ", txt,
                      " printed as ", print(e));
    }
}

TEST_CASE("print/parse round trip on random trees") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::uniform_int_distribution<int> pick(0, 9);

    std::function<ExprPtr(int)> gen = [&](int depth) -> ExprPtr {
        if (depth <= 0 || pick(rng) < 2) {
            switch (pick(rng) % 3) {
                case 0: return make_const(u(rng));
                case 1: return make_var(Var::X);
                default: return make_var(Var::Y);
            }
        }
        switch (pick(rng)) {
            case 0: return make_unary(UnaryOp::Neg, gen(depth - 1));
            case 1: return make_unary(UnaryOp::Exp, gen(depth - 1));
            case 2: return make_unary(UnaryOp::Sin, gen(depth - 1));
            case 3: return make_binary(BinaryOp::Add, gen(depth - 1), gen(depth - 1));
            case 4: return make_binary(BinaryOp::Sub, gen(depth - 1), gen(depth - 1));
            case 5: return make_binary(BinaryOp::Mul, gen(depth - 1), gen(depth - 1));
            case 6: return make_binary(BinaryOp::Div, gen(depth - 1), gen(depth - 1));
            case 7: return make_binary(BinaryOp::Pow, gen(depth - 1), gen(depth - 1));
            default: return make_unary(UnaryOp::Atan, gen(depth - 1));
        }
    };
    for (int k = 0; k < 500; ++k) {
        const ExprPtr e = gen(5);
        const ExprPtr again = parse(print(e));
        CHECK_MESSAGE(structurally_equal(e, again), "random tree failed: ", print(e));
    }
}

TEST_CASE("dual value equals plain eval") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const ExprPtr e = parse("(y^2-1)*exp(x)+sin(x*y)/(2+cos(y))");
    for (int k = 0; k < 200; ++k) {
        const double x = u(rng), y = u(rng);
        CHECK(eval_dual(e, x, y).value == eval(e, x, y));
    }
}

TEST_CASE("symbolic derivative agrees with dual numbers") {
    const char* exprs[] = {"(y^2-1)*exp(x)", "-2*y*exp(x)", "(2*y-1)*exp(x)",
                           "atan(x*y)+tanh(x)", "x^3/(1+y^2)"};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (const char* txt : exprs) {
        const ExprPtr e = parse(txt);
        const ExprPtr dx = derive(e, Var::X);
        const ExprPtr dy = derive(e, Var::Y);
        for (int k = 0; k < 100; ++k) {
            const double x = u(rng), y = u(rng);
            const DualValue d = eval_dual(e, x, y);
            CHECK(eval(dx, x, y) == doctest::Approx(d.dx).epsilon(1e-12));
            CHECK(eval(dy, x, y) == doctest::Approx(d.dy).epsilon(1e-12));
        }
    }
}
