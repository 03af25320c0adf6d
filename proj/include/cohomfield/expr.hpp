#pragma once

#include <memory>
#include <string>
#include <variant>

#include "cohomfield/errors.hpp"

namespace cohomfield {

// Value with exact forward-mode partials at the evaluation point.
struct DualValue {
    double value = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

enum class Var { X, Y };

enum class UnaryOp { Neg, Exp, Ln, Abs, Sqrt, Cbrt, Sin, Cos, Atan, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Unary {
    UnaryOp op;
    ExprPtr a;
};

struct Binary {
    BinaryOp op;
    ExprPtr a;
    ExprPtr b;
};

// Immutable AST over literals, the variables x/y, and the fixed function set.
// Evaluation is total on the natural domain; outside it a DomainFault names
// the offending subtree instead of returning a non-finite value.
struct Expr {
    std::variant<double, Var, Unary, Binary> node;
};

ExprPtr make_const(double v);
ExprPtr make_var(Var v);
ExprPtr make_unary(UnaryOp op, ExprPtr a);
ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b);

// Recursive-descent parse; precedence ^ > unary - > * / > + -, ^ right-assoc.
// Throws SyntaxError with byte offset and the expected-token set.
ExprPtr parse(const std::string& text);

// Precedence-aware printing; parse(print(e)) is structurally equal to e.
std::string print(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

double eval(const ExprPtr& e, double x, double y);
DualValue eval_dual(const ExprPtr& e, double x, double y);

// Symbolic partial derivative (with trivial constant folding only).  Used to
// build derived fields as expressions; pointwise derivatives go through
// eval_dual instead.
ExprPtr derive(const ExprPtr& e, Var v);

// Constant value of e if the subtree is a literal (after folding), else null.
const double* const_value(const ExprPtr& e);

} // namespace cohomfield
