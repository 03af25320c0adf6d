#include "cohomfield/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cohomfield/errors.hpp"
#include "cohomfield/kvfile.hpp"
#include "cohomfield/quadrature.hpp"

namespace cohomfield {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// First integral of 2x^2 y d_x - d_y: arctan(y^2 - 1/x) continued through
// x = 0 with a +pi shift on x > 0.  Partials have the global rational forms
// Fx = 1/((1-x y^2)^2 + x^2), Fy = 2 x^2 y / ((1-x y^2)^2 + x^2).
double atan_well_value(double x, double y) {
    if (x == 0.0) return M_PI / 2.0;
    const double base = std::atan(y * y - 1.0 / x);
    return x < 0.0 ? base : base + M_PI;
}

DualValue atan_well_dual(double x, double y) {
    const double d = (1.0 - x * y * y) * (1.0 - x * y * y) + x * x;
    return {atan_well_value(x, y), 1.0 / d, 2.0 * x * x * y / d};
}

const char* kAtanWellTag = "@atan-well";

ScalarField atan_well_field() {
    return ScalarField::from_native(kAtanWellTag, atan_well_value, atan_well_dual, true);
}

ScalarField field_from_spec_string(const std::string& text, bool regular) {
    if (!text.empty() && text[0] == '@') {
        if (text == kAtanWellTag) return atan_well_field();
        throw ParseError("unknown native field tag '" + text + "'", 0);
    }
    return ScalarField::from_text(text, regular);
}

Scenario make_ham_strip() {
    Scenario s;
    s.name = "ham-strip";
    s.xi = {ScalarField::from_text("2*y", false), ScalarField::from_text("1-y^2", false)};
    s.F = ScalarField::from_text("(y^2-1)*exp(x)", true);
    s.G = ScalarField::from_text("-2*y*exp(x)", true);
    s.hamiltonian = true;
    s.box = {-3.0, 3.0, -2.5, 2.5};
    s.pairs.push_back({0.0, 0.0, -1.0, 1.0, Side::Left, {0.0, 0.0}});
    s.known.push_back({parse("1"), parse("0.5*ln(abs((1+y)/(1-y)))"), Mode::Xi});
    s.known.push_back({parse("exp(-x)/(1+y^2)"), parse("x+2*ln(abs(1-y))"), Mode::XiPrime});
    s.known.push_back({parse("0"), parse("(y^2-1)*exp(x)"), Mode::Xi});
    s.image_predicate = [](double xp, double yp) { return xp < 0.0 || yp != 0.0; };
    s.image_text = "x' < 0 or y' != 0";
    return s;
}

Scenario make_nonham_strip() {
    Scenario s;
    s.name = "nonham-strip";
    s.xi = {ScalarField::from_text("2*(2*y-1)", false), ScalarField::from_text("1-y^2", false)};
    s.F = ScalarField::from_text("(y+1)^3*(y-1)*exp(x)", false); // gradient degenerate on y=-1
    s.G = ScalarField::from_text("(2*y-1)*exp(x)", true);
    s.hamiltonian = false;
    s.box = {-3.0, 3.0, -2.5, 2.5};
    s.pairs.push_back({0.0, 0.0, -1.0, 1.0, Side::Left, {0.0, 0.5}});
    s.known.push_back({parse("1"), parse("0.5*ln(abs((1+y)/(1-y)))"), Mode::Xi});
    s.chart_known = ChartKnown{
        parse("cbrt(x)*(y-sqrt(x^2+y^2))^2"),
        parse("cbrt(x)*(x^2*y+(2/3)*y^3-(2/3)*(x^2+y^2)*sqrt(x^2+y^2))"),
    };
    s.image_predicate = [](double xp, double yp) { return xp < 0.0 || yp != 0.0; };
    s.image_text = "x' < 0 or y' != 0";
    return s;
}

Scenario make_nontranslation() {
    Scenario s;
    s.name = "nontranslation";
    s.xi = {ScalarField::from_text("2*x^2*y", false), ScalarField::from_text("-1", false)};
    s.F = atan_well_field();
    s.G = ScalarField::from_text("y", true);
    s.hamiltonian = true;
    s.box = {-2.0, 6.0, -2.0, 2.0};
    s.pairs.push_back({M_PI, 0.0, -0.5, 0.5, Side::Left, {1.0, 0.2}});
    s.known.push_back({parse("1"), parse("-y"), Mode::Xi});
    s.image_predicate = [](double xp, double yp) {
        const double lo = std::atan(yp * yp);
        return xp > lo && xp < lo + M_PI;
    };
    s.image_text = "atan(y'^2) < x' < atan(y'^2) + pi";
    return s;
}

Scenario make_three_seps() {
    Scenario s;
    s.name = "three-seps";
    ExprPtr F = parse("(1-(y-2)^2-exp(-x))*(1-y^2-exp(-x))*(1-(y+2)^2-exp(-x))");
    s.F = ScalarField::from_expr(F, true);
    s.G = ScalarField::from_text("y", true);
    // The x-component follows from L_xi F = 0 with unit vertical speed:
    // P = -Fy/Fx.  F is the authoritative object here.
    ExprPtr fx = derive(F, Var::X);
    ExprPtr fy = derive(F, Var::Y);
    ExprPtr P = make_unary(UnaryOp::Neg, make_binary(BinaryOp::Div, fy, fx));
    s.xi = {ScalarField::from_expr(P, false), ScalarField::from_text("1", false)};
    s.hamiltonian = true;
    s.box = {-1.5, 7.0, -3.6, 3.6};
    s.pairs.push_back({0.0, 1.0, 0.0, 2.0, Side::Left, {2.0, 1.0}});
    s.pairs.push_back({0.0, -1.0, -2.0, 0.0, Side::Left, {2.0, -1.0}});
    s.known.push_back({parse("1"), parse("y"), Mode::Xi});
    s.image_predicate = [](double xp, double yp) {
        const double pqr = (1.0 - (yp - 2.0) * (yp - 2.0)) * (1.0 - yp * yp) *
                           (1.0 - (yp + 2.0) * (yp + 2.0));
        return xp < pqr;
    };
    s.image_text = "x' < (1-(y'-2)^2)(1-y'^2)(1-(y'+2)^2)";
    return s;
}

} // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"ham-strip", "nonham-strip", "nontranslation",
                                                   "three-seps"};
    return names;
}

Scenario builtin(const std::string& name) {
    if (name == "ham-strip") return make_ham_strip();
    if (name == "nonham-strip") return make_nonham_strip();
    if (name == "nontranslation") return make_nontranslation();
    if (name == "three-seps") return make_three_seps();
    throw UnknownScenario(name);
}

// ---------------------------------------------------------------------------
// Scenario file IO
// ---------------------------------------------------------------------------

namespace {

// Splits `"expr1", "expr2"` into the two quoted pieces.
std::pair<std::string, std::string> split_pair(const std::string& v, int line) {
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (char c : v) {
        if (c == '"') {
            quoted = !quoted;
            continue;
        }
        if (c == ',' && !quoted) {
            parts.push_back(cur);
            cur.clear();
            continue;
        }
        cur += c;
    }
    parts.push_back(cur);
    if (parts.size() != 2) throw ParseError("expected two comma-separated expressions", line);
    auto trim = [](std::string t) {
        const auto b = t.find_first_not_of(" \t");
        const auto e = t.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    return {trim(parts[0]), trim(parts[1])};
}

Mode parse_mode(const std::string& m, int line) {
    if (m == "xi") return Mode::Xi;
    if (m == "xiprime") return Mode::XiPrime;
    throw ParseError("mode must be 'xi' or 'xiprime'", line);
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    const KvFile kv = parse_kv(text);
    Scenario s;
    bool have_main = false;
    for (const auto& sec : kv.sections) {
        if (sec.name == "scenario") {
            if (have_main) throw ParseError("duplicate [scenario] section", sec.line);
            have_main = true;
            s.name = sec.get_string("name");
            const auto [p, q] = split_pair(sec.get_string("xi"), sec.line);
            s.xi = {field_from_spec_string(p, false), field_from_spec_string(q, false)};
            s.F = field_from_spec_string(sec.get_string("F"), true);
            s.G = field_from_spec_string(sec.get_string("G"), true);
            s.hamiltonian = sec.get_bool("hamiltonian");
            const auto b = sec.get_numbers("box", 4);
            s.box = {b[0], b[1], b[2], b[3]};
            if (sec.has("image")) {
                ExprPtr im = parse(sec.get_string("image"));
                s.image_text = print(im);
                s.image_predicate = [im](double xp, double yp) { return eval(im, xp, yp) > 0.0; };
            }
        } else if (sec.name == "separatrix") {
            SeparatrixPair p;
            p.a = sec.get_number("a");
            p.b = sec.get_number("b");
            p.b1 = sec.get_number("b1");
            p.b2 = sec.get_number("b2");
            const std::string side = sec.get_string("side");
            if (side == "left")
                p.side = Side::Left;
            else if (side == "right")
                p.side = Side::Right;
            else
                throw ParseError("side must be 'left' or 'right'", sec.line);
            const auto anchor = sec.get_numbers("anchor", 2);
            p.anchor = {anchor[0], anchor[1]};
            s.pairs.push_back(p);
        } else if (sec.name == "known") {
            KnownSolution k;
            k.g = parse(sec.get_string("g"));
            k.f = parse(sec.get_string("f"));
            k.mode = parse_mode(sec.get_string("mode"), sec.line);
            s.known.push_back(std::move(k));
        } else {
            throw ParseError("unknown section [" + sec.name + "]", sec.line);
        }
    }
    if (!have_main) throw ParseError("missing [scenario] section", 0);
    kv.reject_unused();
    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

namespace {

std::string field_spec_string(const ScalarField& f) {
    if (f.expr()) return "\"" + f.text() + "\"";
    return "\"" + f.text() + "\""; // native tag round-trips through the registry
}

} // namespace

std::string serialize(const Scenario& s) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << s.name << "\n";
    out << "xi = " << field_spec_string(s.xi.p) << ", " << field_spec_string(s.xi.q) << "\n";
    out << "F = " << field_spec_string(s.F) << "\n";
    out << "G = " << field_spec_string(s.G) << "\n";
    out << "hamiltonian = " << (s.hamiltonian ? "true" : "false") << "\n";
    out << "box = " << fmt(s.box.x0) << ", " << fmt(s.box.x1) << ", " << fmt(s.box.y0) << ", "
        << fmt(s.box.y1) << "\n";
    for (const auto& p : s.pairs) {
        out << "\n[separatrix]\n";
        out << "a = " << fmt(p.a) << "\n";
        out << "b = " << fmt(p.b) << "\n";
        out << "b1 = " << fmt(p.b1) << "\n";
        out << "b2 = " << fmt(p.b2) << "\n";
        out << "side = " << (p.side == Side::Left ? "left" : "right") << "\n";
        out << "anchor = " << fmt(p.anchor.x) << ", " << fmt(p.anchor.y) << "\n";
    }
    for (const auto& k : s.known) {
        out << "\n[known]\n";
        out << "g = \"" << print(k.g) << "\"\n";
        out << "f = \"" << print(k.f) << "\"\n";
        out << "mode = " << (k.mode == Mode::Xi ? "xi" : "xiprime") << "\n";
    }
    return out.str();
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write scenario file: " + path);
    out << serialize(s);
}

void validate(const Scenario& s) {
    const RegularityAudit a = regularity_audit(s.xi, s.F, s.G, s.box);
    std::vector<std::string> failures;
    if (!a.field_regular) failures.push_back("field not regular: min sampled |xi|^2 is zero");
    if (a.max_first_integral > 1e-9)
        failures.push_back("F is not a first integral: max |L_xi F| = " +
                           std::to_string(a.max_first_integral));
    if (!a.transversal_ok)
        failures.push_back("L_xi G vanishes or changes sign on the box");
    if (s.F.regular() && a.min_grad_f <= 1e-12)
        failures.push_back("F claimed regular but |grad F| vanishes at sampled points");
    for (std::size_t i = 0; i < s.pairs.size(); ++i) {
        const auto& p = s.pairs[i];
        const std::string tag = "pair " + std::to_string(i) + ": ";
        if (!(p.b1 < p.b && p.b < p.b2)) failures.push_back(tag + "requires b1 < b < b2");
        const double fa = s.F.value(p.anchor.x, p.anchor.y);
        const double ga = s.G.value(p.anchor.x, p.anchor.y);
        if (p.side == Side::Left ? fa >= p.a : fa <= p.a)
            failures.push_back(tag + "anchor F-value not on the declared side of a");
        if (!(ga > p.b1 && ga < p.b2))
            failures.push_back(tag + "anchor G-value outside (b1, b2)");
    }
    if (!failures.empty()) {
        std::string msg = "scenario '" + s.name + "' failed validation:";
        for (const auto& f : failures) msg += "\n  - " + f;
        throw ValidationError(msg);
    }
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function
// ---------------------------------------------------------------------------

double hyp2f1(double a, double b, double c, double z) {
    if (!(c > b && b > 0.0))
        throw ParameterOutOfRange("hyp2f1 requires c > b > 0 (Euler integral)");
    if (z > 0.0) throw ParameterOutOfRange("hyp2f1 implemented for z <= 0 only");
    if (z == 0.0) return 1.0;

    // Euler integral with endpoint-regularizing substitutions t = u^m (left)
    // and 1 - t = v^k (right), split at 1/2.
    const int m = b >= 2.0 ? 1 : static_cast<int>(std::ceil(2.0 / b));
    const int k = (c - b) >= 2.0 ? 1 : static_cast<int>(std::ceil(2.0 / (c - b)));

    auto core = [&](double t) { return std::pow(1.0 - z * t, -a); };

    const Fn1 left = [&](double u) {
        const double t = std::pow(u, m);
        return m * std::pow(u, m * b - 1.0) * std::pow(1.0 - t, c - b - 1.0) * core(t);
    };
    const Fn1 right = [&](double v) {
        const double onemt = std::pow(v, k);
        const double t = 1.0 - onemt;
        return k * std::pow(v, k * (c - b) - 1.0) * std::pow(t, b - 1.0) * core(t);
    };

    const double ul = std::pow(0.5, 1.0 / m);
    const double vr = std::pow(0.5, 1.0 / k);
    const QuadResult ql = integrate_adaptive(left, 0.0, ul, 1e-13, 1e-15, 2000);
    const QuadResult qr = integrate_adaptive(right, 0.0, vr, 1e-13, 1e-15, 2000);
    if (!ql.converged || !qr.converged)
        throw QuadratureFailure("hyp2f1 Euler integral did not converge");

    const double log_beta = std::lgamma(b) + std::lgamma(c - b) - std::lgamma(c);
    return (ql.value + qr.value) * std::exp(-log_beta);
}

double fhat_quarter_power(double xp, double yp) {
    if (yp == 0.0) return 0.0;
    const double w = (yp / xp) * (yp / xp);
    const double f21 = hyp2f1(1.0, 1.25, 1.5, -w);
    return yp * std::pow(std::abs(xp), -0.5) * std::pow(1.0 + w, 0.75) * f21;
}

} // namespace cohomfield
