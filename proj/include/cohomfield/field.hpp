#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohomfield/expr.hpp"
#include "cohomfield/types.hpp"

namespace cohomfield {

// Scalar function of the plane.  Expression-backed in the usual case; a few
// built-in first integrals are piecewise and supply native evaluators instead
// (the expression language has no conditionals by design).
class ScalarField {
public:
    ScalarField() = default;

    static ScalarField from_expr(ExprPtr e, bool regular);
    static ScalarField from_text(const std::string& text, bool regular);
    static ScalarField from_native(std::string tag,
                                   std::function<double(double, double)> value,
                                   std::function<DualValue(double, double)> dual,
                                   bool regular);

    double value(double x, double y) const;
    DualValue dual(double x, double y) const;
    Vec2 grad(double x, double y) const;

    bool regular() const { return regular_; }
    const std::string& text() const { return text_; }
    const ExprPtr& expr() const { return expr_; } // null for native fields
    bool valid() const { return static_cast<bool>(value_); }

private:
    ExprPtr expr_;
    std::function<double(double, double)> value_;
    std::function<DualValue(double, double)> dual_;
    bool regular_ = false;
    std::string text_;
};

// Plane vector field xi = (P, Q); regular means no zeros on the domain box.
struct PlaneVectorField {
    ScalarField p;
    ScalarField q;

    Vec2 at(double x, double y) const { return {p.value(x, y), q.value(x, y)}; }
};

// Generic velocity field for the integrator; derived fields that have no
// closed expression form are carried as callables.
struct VecField {
    std::function<Vec2(double, double)> at;
    std::optional<std::pair<ExprPtr, ExprPtr>> sym;
};

VecField as_vecfield(const PlaneVectorField& xi);

// L_xi h = P dh/dx + Q dh/dy at a point.
double lie_derivative(const PlaneVectorField& xi, const ScalarField& h, Vec2 p);

// Density of dF^dG against dx^dy: Fx*Gy - Fy*Gx.
double area_density(const ScalarField& F, const ScalarField& G, Vec2 p);

// xi'_F = xi / L_xi G (unique field with dF = 0, dG = 1) and
// xi'_G = (Gy, -Gx)/omega (unique field with dG = 0, dF = 1).
// omega_sign records the sign of L_xi G, i.e. the orientation of xi'_F
// relative to the positively oriented Hamiltonian field of F.
struct DerivedFields {
    VecField xi_f;
    VecField xi_g;
    int omega_sign = 0;
};

DerivedFields derived_fields(const PlaneVectorField& xi, const ScalarField& F,
                             const ScalarField& G, const Rect& box);

// Sampled regularity audit: 101x101 grid plus 1000 seeded random points.
struct RegularityAudit {
    double min_field_norm2 = 0.0;    // min P^2+Q^2
    double min_grad_f = 0.0;         // min |grad F| (if F claimed regular, must be > 0)
    double max_first_integral = 0.0; // max |L_xi F|
    double min_abs_lg = 0.0;         // min |L_xi G|
    int lg_sign = 0;                 // sign of L_xi G (0 if it changes sign)
    std::vector<Vec2> degenerate_f;  // sample points where |grad F| < threshold
    bool field_regular = false;
    bool transversal_ok = false; // L_xi G bounded away from zero, constant sign
};

RegularityAudit regularity_audit(const PlaneVectorField& xi, const ScalarField& F,
                                 const ScalarField& G, const Rect& box,
                                 double threshold = 1e-12);

} // namespace cohomfield
