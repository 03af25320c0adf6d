#include "cohomfield/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace cohomfield {

namespace {

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Ln: return "ln";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Cbrt: return "cbrt";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Atan: return "atan";
        case UnaryOp::Tanh: return "tanh";
    }
    return "?";
}

char binary_sym(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
        case BinaryOp::Pow: return '^';
    }
    return '?';
}

// True when c is an integer that repeated multiplication can handle.
bool integer_exponent(double c, long long& n) {
    if (std::abs(c) > 1e9) return false;
    const double r = std::nearbyint(c);
    if (std::abs(c - r) > 0.0) return false;
    n = static_cast<long long>(r);
    return true;
}

double pow_int(double base, long long n, const ExprPtr& site) {
    if (n < 0) {
        if (base == 0.0)
            throw DomainFault("zero base with negative integer exponent", print(site));
        return 1.0 / pow_int(base, -n, site);
    }
    double acc = 1.0, cur = base;
    while (n > 0) {
        if (n & 1) acc *= cur;
        cur *= cur;
        n >>= 1;
    }
    return acc;
}

} // namespace

ExprPtr make_const(double v) { return std::make_shared<Expr>(Expr{v}); }
ExprPtr make_var(Var v) { return std::make_shared<Expr>(Expr{v}); }
ExprPtr make_unary(UnaryOp op, ExprPtr a) { return std::make_shared<Expr>(Expr{Unary{op, std::move(a)}}); }
ExprPtr make_binary(BinaryOp op, ExprPtr a, ExprPtr b) {
    return std::make_shared<Expr>(Expr{Binary{op, std::move(a), std::move(b)}});
}

const double* const_value(const ExprPtr& e) { return std::get_if<double>(&e->node); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ExprPtr run() {
        ExprPtr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError("trailing input", pos_, "operator or end of input");
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!accept(c)) throw SyntaxError("missing token", pos_, what);
    }

    ExprPtr parse_sum() {
        ExprPtr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = make_binary(BinaryOp::Add, e, parse_term());
            else if (accept('-'))
                e = make_binary(BinaryOp::Sub, e, parse_term());
            else
                return e;
        }
    }

    ExprPtr parse_term() {
        ExprPtr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = make_binary(BinaryOp::Mul, e, parse_factor());
            else if (accept('/'))
                e = make_binary(BinaryOp::Div, e, parse_factor());
            else
                return e;
        }
    }

    // factor := '-' factor | power;  power := atom ('^' factor)?
    ExprPtr parse_factor() {
        if (accept('-')) return make_unary(UnaryOp::Neg, parse_factor());
        ExprPtr base = parse_atom();
        if (accept('^')) return make_binary(BinaryOp::Pow, base, parse_factor());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size())
            throw SyntaxError("unexpected end of input", pos_, "number, variable, function or '('");
        const char c = text_[pos_];
        if (accept('(')) {
            ExprPtr e = parse_sum();
            expect(')', "')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
        throw SyntaxError("unexpected character", pos_, "number, variable, function or '('");
    }

    ExprPtr parse_number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw SyntaxError("malformed number", pos_, "number");
        pos_ += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    ExprPtr parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::string name = text_.substr(start, pos_ - start);
        if (name == "x") return make_var(Var::X);
        if (name == "y") return make_var(Var::Y);
        static const std::pair<const char*, UnaryOp> fns[] = {
            {"exp", UnaryOp::Exp},   {"ln", UnaryOp::Ln},     {"abs", UnaryOp::Abs},
            {"sqrt", UnaryOp::Sqrt}, {"cbrt", UnaryOp::Cbrt}, {"sin", UnaryOp::Sin},
            {"cos", UnaryOp::Cos},   {"atan", UnaryOp::Atan}, {"tanh", UnaryOp::Tanh},
        };
        for (const auto& [fname, op] : fns) {
            if (name == fname) {
                expect('(', "'(' after function name");
                ExprPtr arg = parse_sum();
                expect(')', "')'");
                return make_unary(op, arg);
            }
        }
        throw SyntaxError("unknown identifier '" + name + "'", start, "x, y or function name");
    }
};

} // namespace

ExprPtr parse(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

// Precedence levels: + - (1), * / (2), unary - (3), ^ (4), atoms (5).
int precedence(const Expr& e) {
    if (std::holds_alternative<double>(e.node) || std::holds_alternative<Var>(e.node)) return 5;
    if (const auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Neg ? 3 : 5;
    switch (std::get<Binary>(e.node).op) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
    }
    return 5;
}

void print_rec(const ExprPtr& e, int min_prec, std::string& out) {
    const int prec = precedence(*e);
    const bool wrap = prec < min_prec;
    if (wrap) out += '(';
    if (const auto* v = std::get_if<double>(&e->node)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        out += buf;
    } else if (const auto* var = std::get_if<Var>(&e->node)) {
        out += (*var == Var::X ? 'x' : 'y');
    } else if (const auto* u = std::get_if<Unary>(&e->node)) {
        if (u->op == UnaryOp::Neg) {
            out += '-';
            print_rec(u->a, 3, out);
        } else {
            out += unary_name(u->op);
            out += '(';
            print_rec(u->a, 0, out);
            out += ')';
        }
    } else {
        const auto& b = std::get<Binary>(e->node);
        // Left-assoc for + - * /: right child must bind strictly tighter.
        // Pow is right-assoc and binds tighter than unary minus on the left.
        int lmin = 0, rmin = 0;
        switch (b.op) {
            case BinaryOp::Add: lmin = 1; rmin = 2; break;
            case BinaryOp::Sub: lmin = 1; rmin = 2; break;
            case BinaryOp::Mul: lmin = 2; rmin = 3; break;
            case BinaryOp::Div: lmin = 2; rmin = 3; break;
            case BinaryOp::Pow: lmin = 5; rmin = 3; break;
        }
        print_rec(b.a, lmin, out);
        out += binary_sym(b.op);
        print_rec(b.b, rmin, out);
    }
    if (wrap) out += ')';
}

} // namespace

std::string print(const ExprPtr& e) {
    std::string out;
    print_rec(e, 0, out);
    return out;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a.get() == b.get()) return true;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* va = std::get_if<double>(&a->node)) return *va == *std::get_if<double>(&b->node);
    if (const auto* xa = std::get_if<Var>(&a->node)) return *xa == *std::get_if<Var>(&b->node);
    if (const auto* ua = std::get_if<Unary>(&a->node)) {
        const auto& ub = std::get<Unary>(b->node);
        return ua->op == ub.op && structurally_equal(ua->a, ub.a);
    }
    const auto& ba = std::get<Binary>(a->node);
    const auto& bb = std::get<Binary>(b->node);
    return ba.op == bb.op && structurally_equal(ba.a, bb.a) && structurally_equal(ba.b, bb.b);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_rec(const ExprPtr& e, double x, double y) {
    if (const auto* v = std::get_if<double>(&e->node)) return *v;
    if (const auto* var = std::get_if<Var>(&e->node)) return *var == Var::X ? x : y;
    if (const auto* u = std::get_if<Unary>(&e->node)) {
        const double a = eval_rec(u->a, x, y);
        switch (u->op) {
            case UnaryOp::Neg: return -a;
            case UnaryOp::Exp: return std::exp(a);
            case UnaryOp::Ln:
                if (a <= 0.0) throw DomainFault("ln of non-positive value", print(e));
                return std::log(a);
            case UnaryOp::Abs: return std::abs(a);
            case UnaryOp::Sqrt:
                if (a < 0.0) throw DomainFault("sqrt of negative value", print(e));
                return std::sqrt(a);
            case UnaryOp::Cbrt: return std::cbrt(a);
            case UnaryOp::Sin: return std::sin(a);
            case UnaryOp::Cos: return std::cos(a);
            case UnaryOp::Atan: return std::atan(a);
            case UnaryOp::Tanh: return std::tanh(a);
        }
    }
    const auto& b = std::get<Binary>(e->node);
    const double l = eval_rec(b.a, x, y);
    switch (b.op) {
        case BinaryOp::Add: return l + eval_rec(b.b, x, y);
        case BinaryOp::Sub: return l - eval_rec(b.b, x, y);
        case BinaryOp::Mul: return l * eval_rec(b.b, x, y);
        case BinaryOp::Div: {
            const double r = eval_rec(b.b, x, y);
            if (r == 0.0) throw DomainFault("division by zero", print(e));
            return l / r;
        }
        case BinaryOp::Pow: {
            // Integer constant exponents use repeated multiplication (keeps the
            // sign of negative bases); anything else goes through exp(c*ln(base)).
            if (const double* c = const_value(b.b)) {
                long long n;
                if (integer_exponent(*c, n)) return pow_int(l, n, e);
                if (l <= 0.0) throw DomainFault("non-integer power of non-positive base", print(e));
                return std::exp(*c * std::log(l));
            }
            const double r = eval_rec(b.b, x, y);
            if (l <= 0.0) throw DomainFault("non-constant power of non-positive base", print(e));
            return std::exp(r * std::log(l));
        }
    }
    return 0.0;
}

DualValue dual_rec(const ExprPtr& e, double x, double y) {
    if (const auto* v = std::get_if<double>(&e->node)) return {*v, 0.0, 0.0};
    if (const auto* var = std::get_if<Var>(&e->node))
        return *var == Var::X ? DualValue{x, 1.0, 0.0} : DualValue{y, 0.0, 1.0};
    if (const auto* u = std::get_if<Unary>(&e->node)) {
        const DualValue a = dual_rec(u->a, x, y);
        auto chain = [&a](double v, double dv) { return DualValue{v, dv * a.dx, dv * a.dy}; };
        switch (u->op) {
            case UnaryOp::Neg: return {-a.value, -a.dx, -a.dy};
            case UnaryOp::Exp: {
                const double v = std::exp(a.value);
                return chain(v, v);
            }
            case UnaryOp::Ln:
                if (a.value <= 0.0) throw DomainFault("ln of non-positive value", print(e));
                return chain(std::log(a.value), 1.0 / a.value);
            case UnaryOp::Abs:
                if (a.value == 0.0) throw NonDifferentiable("abs at its kink", print(e));
                return chain(std::abs(a.value), a.value > 0.0 ? 1.0 : -1.0);
            case UnaryOp::Sqrt: {
                if (a.value < 0.0) throw DomainFault("sqrt of negative value", print(e));
                if (a.value == 0.0) throw NonDifferentiable("sqrt at zero", print(e));
                const double v = std::sqrt(a.value);
                return chain(v, 0.5 / v);
            }
            case UnaryOp::Cbrt: {
                if (a.value == 0.0) throw NonDifferentiable("cbrt at its kink", print(e));
                const double v = std::cbrt(a.value);
                return chain(v, 1.0 / (3.0 * v * v));
            }
            case UnaryOp::Sin: return chain(std::sin(a.value), std::cos(a.value));
            case UnaryOp::Cos: return chain(std::cos(a.value), -std::sin(a.value));
            case UnaryOp::Atan: return chain(std::atan(a.value), 1.0 / (1.0 + a.value * a.value));
            case UnaryOp::Tanh: {
                const double v = std::tanh(a.value);
                return chain(v, 1.0 - v * v);
            }
        }
    }
    const auto& b = std::get<Binary>(e->node);
    const DualValue l = dual_rec(b.a, x, y);
    switch (b.op) {
        case BinaryOp::Add: {
            const DualValue r = dual_rec(b.b, x, y);
            return {l.value + r.value, l.dx + r.dx, l.dy + r.dy};
        }
        case BinaryOp::Sub: {
            const DualValue r = dual_rec(b.b, x, y);
            return {l.value - r.value, l.dx - r.dx, l.dy - r.dy};
        }
        case BinaryOp::Mul: {
            const DualValue r = dual_rec(b.b, x, y);
            return {l.value * r.value, l.dx * r.value + l.value * r.dx,
                    l.dy * r.value + l.value * r.dy};
        }
        case BinaryOp::Div: {
            const DualValue r = dual_rec(b.b, x, y);
            if (r.value == 0.0) throw DomainFault("division by zero", print(e));
            const double inv = 1.0 / r.value;
            const double v = l.value * inv;
            return {v, (l.dx - v * r.dx) * inv, (l.dy - v * r.dy) * inv};
        }
        case BinaryOp::Pow: {
            if (const double* c = const_value(b.b)) {
                long long n;
                if (integer_exponent(*c, n)) {
                    const double v = pow_int(l.value, n, e);
                    if (n == 0) return {1.0, 0.0, 0.0};
                    if (l.value == 0.0 && n < 2)
                        throw NonDifferentiable("integer power at zero base", print(e));
                    const double d = static_cast<double>(n) * pow_int(l.value, n - 1, e);
                    return {v, d * l.dx, d * l.dy};
                }
                if (l.value <= 0.0)
                    throw DomainFault("non-integer power of non-positive base", print(e));
                const double v = std::exp(*c * std::log(l.value));
                const double d = *c * v / l.value;
                return {v, d * l.dx, d * l.dy};
            }
            const DualValue r = dual_rec(b.b, x, y);
            if (l.value <= 0.0)
                throw DomainFault("non-constant power of non-positive base", print(e));
            const double lnl = std::log(l.value);
            const double v = std::exp(r.value * lnl);
            // d(b^e) = b^e * (e' ln b + e b'/b)
            return {v, v * (r.dx * lnl + r.value * l.dx / l.value),
                    v * (r.dy * lnl + r.value * l.dy / l.value)};
        }
    }
    return {};
}

} // namespace

double eval(const ExprPtr& e, double x, double y) { return eval_rec(e, x, y); }
DualValue eval_dual(const ExprPtr& e, double x, double y) { return dual_rec(e, x, y); }

// ---------------------------------------------------------------------------
// Symbolic derivative
// ---------------------------------------------------------------------------

namespace {

bool is_const_v(const ExprPtr& e, double v) {
    const double* c = const_value(e);
    return c && *c == v;
}

ExprPtr fold_add(ExprPtr a, ExprPtr b) {
    if (is_const_v(a, 0.0)) return b;
    if (is_const_v(b, 0.0)) return a;
    if (const_value(a) && const_value(b)) return make_const(*const_value(a) + *const_value(b));
    return make_binary(BinaryOp::Add, std::move(a), std::move(b));
}

ExprPtr fold_sub(ExprPtr a, ExprPtr b) {
    if (is_const_v(b, 0.0)) return a;
    if (const_value(a) && const_value(b)) return make_const(*const_value(a) - *const_value(b));
    if (is_const_v(a, 0.0)) return make_unary(UnaryOp::Neg, std::move(b));
    return make_binary(BinaryOp::Sub, std::move(a), std::move(b));
}

ExprPtr fold_mul(ExprPtr a, ExprPtr b) {
    if (is_const_v(a, 0.0) || is_const_v(b, 0.0)) return make_const(0.0);
    if (is_const_v(a, 1.0)) return b;
    if (is_const_v(b, 1.0)) return a;
    if (const_value(a) && const_value(b)) return make_const(*const_value(a) * *const_value(b));
    return make_binary(BinaryOp::Mul, std::move(a), std::move(b));
}

ExprPtr fold_div(ExprPtr a, ExprPtr b) {
    if (is_const_v(a, 0.0)) return make_const(0.0);
    if (is_const_v(b, 1.0)) return a;
    return make_binary(BinaryOp::Div, std::move(a), std::move(b));
}

} // namespace

ExprPtr derive(const ExprPtr& e, Var v) {
    if (const_value(e)) return make_const(0.0);
    if (const auto* var = std::get_if<Var>(&e->node)) return make_const(*var == v ? 1.0 : 0.0);
    if (const auto* u = std::get_if<Unary>(&e->node)) {
        ExprPtr da = derive(u->a, v);
        switch (u->op) {
            case UnaryOp::Neg: return make_unary(UnaryOp::Neg, da);
            case UnaryOp::Exp: return fold_mul(make_unary(UnaryOp::Exp, u->a), da);
            case UnaryOp::Ln: return fold_div(da, u->a);
            case UnaryOp::Abs:
                // sign(a)*a' as a/abs(a)*a'; faults at the kink when evaluated there
                return fold_mul(fold_div(u->a, make_unary(UnaryOp::Abs, u->a)), da);
            case UnaryOp::Sqrt:
                return fold_div(da, fold_mul(make_const(2.0), make_unary(UnaryOp::Sqrt, u->a)));
            case UnaryOp::Cbrt: {
                ExprPtr c = make_unary(UnaryOp::Cbrt, u->a);
                return fold_div(da, fold_mul(make_const(3.0), fold_mul(c, c)));
            }
            case UnaryOp::Sin: return fold_mul(make_unary(UnaryOp::Cos, u->a), da);
            case UnaryOp::Cos:
                return make_unary(UnaryOp::Neg, fold_mul(make_unary(UnaryOp::Sin, u->a), da));
            case UnaryOp::Atan:
                return fold_div(da, fold_add(make_const(1.0), fold_mul(u->a, u->a)));
            case UnaryOp::Tanh: {
                ExprPtr t = make_unary(UnaryOp::Tanh, u->a);
                return fold_mul(fold_sub(make_const(1.0), fold_mul(t, t)), da);
            }
        }
    }
    const auto& b = std::get<Binary>(e->node);
    ExprPtr da = derive(b.a, v);
    switch (b.op) {
        case BinaryOp::Add: return fold_add(da, derive(b.b, v));
        case BinaryOp::Sub: return fold_sub(da, derive(b.b, v));
        case BinaryOp::Mul:
            return fold_add(fold_mul(da, b.b), fold_mul(b.a, derive(b.b, v)));
        case BinaryOp::Div: {
            ExprPtr db = derive(b.b, v);
            ExprPtr num = fold_sub(fold_mul(da, b.b), fold_mul(b.a, db));
            return fold_div(num, fold_mul(b.b, b.b));
        }
        case BinaryOp::Pow: {
            if (const double* c = const_value(b.b)) {
                // d(a^c) = c*a^(c-1)*a'
                ExprPtr pw = make_binary(BinaryOp::Pow, b.a, make_const(*c - 1.0));
                return fold_mul(make_const(*c), fold_mul(pw, da));
            }
            // d(a^b) = a^b * (b' ln a + b a'/a), base > 0 required at eval time
            ExprPtr db = derive(b.b, v);
            ExprPtr term = fold_add(fold_mul(db, make_unary(UnaryOp::Ln, b.a)),
                                    fold_mul(b.b, fold_div(da, b.a)));
            return fold_mul(e, term);
        }
    }
    return make_const(0.0);
}

} // namespace cohomfield
