#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cohomfield/field.hpp"
#include "cohomfield/types.hpp"

namespace cohomfield {

// A closed-form (g, f) pair with L f = g in the given mode, used as an oracle.
struct KnownSolution {
    ExprPtr g;
    ExprPtr f;
    Mode mode = Mode::Xi;
};

// Chart-side pair: d f_hat / dy' = g_hat in normal-chart coordinates (the
// expressions use x, y for x', y').
struct ChartKnown {
    ExprPtr g_hat;
    ExprPtr f_hat;
};

struct Scenario {
    std::string name;
    PlaneVectorField xi;
    ScalarField F;
    ScalarField G;
    bool hamiltonian = false;
    std::vector<SeparatrixPair> pairs;
    Rect box;
    std::vector<KnownSolution> known;
    std::optional<ChartKnown> chart_known;

    // Membership test for the chart image, where analytically known.
    std::function<bool(double, double)> image_predicate;
    std::string image_text;

    Vec2 chart_point(Vec2 p) const { return {F.value(p.x, p.y), G.value(p.x, p.y)}; }
    // Flows may legitimately leave the audited box on their way to a
    // transversal; this padded box bounds them instead.
    Rect flow_box() const { return box.inflated(2.0); }
};

// Built-in scenarios: ham-strip, nonham-strip, nontranslation, three-seps.
Scenario builtin(const std::string& name);
const std::vector<std::string>& builtin_names();

// Scenario file IO (sectioned key/value text; unknown keys rejected).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);
std::string serialize(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

// Audits every scenario must pass; throws ValidationError.
void validate(const Scenario& s);

// Gauss hypergeometric function by adaptive quadrature of the Euler integral,
// valid for c > b > 0 and z <= 0.
double hyp2f1(double a, double b, double c, double z);

// Reference chart solution of d f/dy' = ((x')^2+(y')^2)^(-1/4) with f = 0 on
// y' = 0, expressed through hyp2f1.
double fhat_quarter_power(double xp, double yp);

} // namespace cohomfield
