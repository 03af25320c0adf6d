#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cohomfield/chart.hpp"
#include "cohomfield/scenarios.hpp"
#include "cohomfield/types.hpp"

namespace cohomfield {

// Chart-side function of (x', y').
using ChartFn = std::function<double(double, double)>;

struct GermConfig {
    double delta0 = 1e-1;  // first sample offset
    double rho = 0.5;      // geometric ratio
    int samples = 25;      // n = 0..24
    double quad_rel = 1e-9;
    double quad_abs = 1e-13;
    int max_subdiv = 2000;
    int r_max = 4;
    double tol_cauchy = 1e-3; // strict divided-difference Cauchy tolerance
    double margin = 0.02;     // refuse-to-decide zone on exponent comparisons
    double zero_tol = 1e-12;  // profile treated as identically zero below this
    int fit_window = 10;      // samples in the exponent fit
    bool parallel = true;
};

// Integral profile phi(x') = int_{b1}^{b2} g_hat(x', y') dy' on geometric
// offsets delta_n into V.  Quadrature is pre-split at y' = b.
struct GermProfile {
    SeparatrixPair pair;
    std::vector<double> xs;          // offsets delta_n, strictly decreasing
    std::vector<double> phis;
    std::vector<double> quad_errors;
    std::vector<bool> valid;         // quadrature converged at this sample
    std::size_t valid_count() const;
};

GermProfile phi_profile(const SeparatrixPair& pair, const ChartFn& g_hat,
                        const GermConfig& cfg = {});

// Variant for stateful chart-side evaluators: the factory is invoked once per
// profile sample, so each parallel worker owns its evaluator.
GermProfile phi_profile_factory(const SeparatrixPair& pair,
                                const std::function<ChartFn()>& make_g_hat,
                                const GermConfig& cfg = {});

// How the divergent tail was modelled.
enum class TailModel { None, Power, Log, Tie };

struct GermClass {
    std::optional<int> r_hat;     // largest probed C^r extension order, or none
    double beta_hat = 0.0;        // phi - limit ~ delta^{-beta}; > 0 means divergence
    bool has_beta = false;
    bool log_flag = false;        // logarithmic divergence
    TailModel tail = TailModel::None;
    double fit_r2 = 0.0;
    int r_max = 4;
    bool zero_profile = false;
    double margin = 0.02;

    // W^{l,p}_loc membership of the germ profile; Indeterminate near the
    // decision boundary.
    Tri sobolev(int l, double p) const;
};

GermClass classify_germ(const GermProfile& profile, int r_max, const GermConfig& cfg = {});

struct PairVerdict {
    std::optional<GermClass> germ; // nullopt when the pair failed to classify
    std::string error;
};

struct EquationVerdict {
    std::vector<PairVerdict> pairs;
    std::optional<int> r_hat;      // min over pairs
    bool r_hat_known = false;      // false when any pair failed
    bool log_any = false;
    std::vector<std::tuple<int, double, Tri>> sobolev_table; // (l, p, verdict)
    bool iff = false;              // criteria are iff for Hamiltonian fields
    Tri sobolev(int l, double p) const;
};

// Full pipeline: push g to the chart over each separatrix pair, build the
// integral profile, classify, and aggregate.
EquationVerdict classify_equation(const Scenario& s, const ScalarField& g, Mode mode,
                                  int r_max = 4, std::span<const int> l_list = {},
                                  std::span<const double> p_list = {},
                                  const GermConfig& cfg = {});

// Boundedness of the (k+1)-th x'-derivative of g_hat on a mesh approaching
// the separatrix segment; Indeterminate when scales disagree.
Tri x_regularity_probe(const SeparatrixPair& pair, const ChartFn& g_hat, int k,
                       double noise_eps = 1e-14);

} // namespace cohomfield
