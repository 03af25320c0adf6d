#include "cohomfield/field.hpp"

#include <cmath>
#include <random>

#include "cohomfield/errors.hpp"

namespace cohomfield {

ScalarField ScalarField::from_expr(ExprPtr e, bool regular) {
    ScalarField f;
    f.expr_ = e;
    f.text_ = print(e);
    f.regular_ = regular;
    f.value_ = [e](double x, double y) { return eval(e, x, y); };
    f.dual_ = [e](double x, double y) { return eval_dual(e, x, y); };
    return f;
}

ScalarField ScalarField::from_text(const std::string& text, bool regular) {
    return from_expr(parse(text), regular);
}

ScalarField ScalarField::from_native(std::string tag,
                                     std::function<double(double, double)> value,
                                     std::function<DualValue(double, double)> dual,
                                     bool regular) {
    ScalarField f;
    f.text_ = std::move(tag);
    f.regular_ = regular;
    f.value_ = std::move(value);
    f.dual_ = std::move(dual);
    return f;
}

double ScalarField::value(double x, double y) const { return value_(x, y); }
DualValue ScalarField::dual(double x, double y) const { return dual_(x, y); }
Vec2 ScalarField::grad(double x, double y) const {
    const DualValue d = dual_(x, y);
    return {d.dx, d.dy};
}

VecField as_vecfield(const PlaneVectorField& xi) {
    VecField v;
    v.at = [xi](double x, double y) { return xi.at(x, y); };
    if (xi.p.expr() && xi.q.expr()) v.sym = {xi.p.expr(), xi.q.expr()};
    return v;
}

double lie_derivative(const PlaneVectorField& xi, const ScalarField& h, Vec2 p) {
    const DualValue d = h.dual(p.x, p.y);
    return xi.p.value(p.x, p.y) * d.dx + xi.q.value(p.x, p.y) * d.dy;
}

double area_density(const ScalarField& F, const ScalarField& G, Vec2 p) {
    const DualValue f = F.dual(p.x, p.y);
    const DualValue g = G.dual(p.x, p.y);
    return f.dx * g.dy - f.dy * g.dx;
}

DerivedFields derived_fields(const PlaneVectorField& xi, const ScalarField& F,
                             const ScalarField& G, const Rect& box) {
    // Sampled precondition: L_xi G must not vanish on the box.
    const int n = 21;
    int sign = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec2 p{box.x0 + box.width() * i / (n - 1.0),
                         box.y0 + box.height() * j / (n - 1.0)};
            const double lg = lie_derivative(xi, G, p);
            if (std::abs(lg) < 1e-12)
                throw DegenerateTransversal("L_xi G vanishes at sampled point (" +
                                            std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
            const int s = lg > 0.0 ? 1 : -1;
            if (sign == 0) sign = s;
            if (s != sign)
                throw DegenerateTransversal("L_xi G changes sign on the domain box");
        }
    }

    DerivedFields out;
    out.omega_sign = sign;

    out.xi_f.at = [xi, G](double x, double y) {
        const DualValue g = G.dual(x, y);
        const Vec2 v = xi.at(x, y);
        const double lg = v.x * g.dx + v.y * g.dy;
        if (std::abs(lg) < 1e-300)
            throw DegenerateTransversal("L_xi G vanished during evaluation");
        return Vec2{v.x / lg, v.y / lg};
    };
    out.xi_g.at = [F, G](double x, double y) {
        const DualValue f = F.dual(x, y);
        const DualValue g = G.dual(x, y);
        const double w = f.dx * g.dy - f.dy * g.dx;
        if (std::abs(w) < 1e-300)
            throw DegenerateTransversal("area density vanished during evaluation");
        return Vec2{g.dy / w, -g.dx / w};
    };

    // Symbolic component expressions when everything is expression-backed.
    if (xi.p.expr() && xi.q.expr() && G.expr()) {
        ExprPtr gx = derive(G.expr(), Var::X);
        ExprPtr gy = derive(G.expr(), Var::Y);
        ExprPtr lg = make_binary(BinaryOp::Add, make_binary(BinaryOp::Mul, xi.p.expr(), gx),
                                 make_binary(BinaryOp::Mul, xi.q.expr(), gy));
        out.xi_f.sym = {make_binary(BinaryOp::Div, xi.p.expr(), lg),
                        make_binary(BinaryOp::Div, xi.q.expr(), lg)};
        if (F.expr()) {
            ExprPtr fx = derive(F.expr(), Var::X);
            ExprPtr fy = derive(F.expr(), Var::Y);
            ExprPtr w = make_binary(BinaryOp::Sub, make_binary(BinaryOp::Mul, fx, gy),
                                    make_binary(BinaryOp::Mul, fy, gx));
            out.xi_g.sym = {make_binary(BinaryOp::Div, gy, w),
                            make_binary(BinaryOp::Div, make_unary(UnaryOp::Neg, gx), w)};
        }
    }
    return out;
}

RegularityAudit regularity_audit(const PlaneVectorField& xi, const ScalarField& F,
                                 const ScalarField& G, const Rect& box, double threshold) {
    RegularityAudit a;
    a.min_field_norm2 = std::numeric_limits<double>::infinity();
    a.min_grad_f = std::numeric_limits<double>::infinity();
    a.min_abs_lg = std::numeric_limits<double>::infinity();

    std::vector<Vec2> pts;
    const int n = 101;
    pts.reserve(n * n + 1000);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pts.push_back({box.x0 + box.width() * i / (n - 1.0),
                           box.y0 + box.height() * j / (n - 1.0)});
    std::mt19937_64 rng(0x5eedf1e1dull);
    std::uniform_real_distribution<double> ux(box.x0, box.x1), uy(box.y0, box.y1);
    for (int k = 0; k < 1000; ++k) pts.push_back({ux(rng), uy(rng)});

    bool sign_consistent = true;
    for (const Vec2& p : pts) {
        const Vec2 v = xi.at(p.x, p.y);
        a.min_field_norm2 = std::min(a.min_field_norm2, v.x * v.x + v.y * v.y);

        const DualValue df = F.dual(p.x, p.y);
        const double gf = std::hypot(df.dx, df.dy);
        a.min_grad_f = std::min(a.min_grad_f, gf);
        if (gf < 1e-6 && a.degenerate_f.size() < 64) a.degenerate_f.push_back(p);

        a.max_first_integral = std::max(a.max_first_integral, std::abs(v.x * df.dx + v.y * df.dy));

        const DualValue dg = G.dual(p.x, p.y);
        const double lg = v.x * dg.dx + v.y * dg.dy;
        a.min_abs_lg = std::min(a.min_abs_lg, std::abs(lg));
        const int s = lg > 0.0 ? 1 : (lg < 0.0 ? -1 : 0);
        if (a.lg_sign == 0) a.lg_sign = s;
        if (s != 0 && a.lg_sign != 0 && s != a.lg_sign) sign_consistent = false;
    }

    a.field_regular = a.min_field_norm2 > threshold;
    a.transversal_ok = sign_consistent && a.min_abs_lg > threshold;
    if (!sign_consistent) a.lg_sign = 0;
    return a;
}

} // namespace cohomfield
