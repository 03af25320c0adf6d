#include "cohomfield/germ.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cohomfield/errors.hpp"
#include "cohomfield/fit.hpp"
#include "cohomfield/quadrature.hpp"

namespace cohomfield {

std::size_t GermProfile::valid_count() const {
    std::size_t n = 0;
    for (bool v : valid) n += v;
    return n;
}

GermProfile phi_profile_factory(const SeparatrixPair& pair,
                                const std::function<ChartFn()>& make_g_hat,
                                const GermConfig& cfg) {
    GermProfile prof;
    prof.pair = pair;
    prof.xs.resize(cfg.samples);
    prof.phis.assign(cfg.samples, 0.0);
    prof.quad_errors.assign(cfg.samples, 0.0);
    prof.valid.assign(cfg.samples, false);
    for (int n = 0; n < cfg.samples; ++n) prof.xs[n] = cfg.delta0 * std::pow(cfg.rho, n);

    const double splits[1] = {pair.b};
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
    for (int n = 0; n < cfg.samples; ++n) {
        const double xp = pair.a + pair.into_v() * prof.xs[n];
        try {
            const ChartFn g_hat = make_g_hat();
            const Fn1 integrand = [&](double yp) { return g_hat(xp, yp); };
            const QuadResult q = integrate_adaptive_split(integrand, pair.b1, pair.b2, splits,
                                                          cfg.quad_rel, cfg.quad_abs, cfg.max_subdiv);
            prof.phis[n] = q.value;
            prof.quad_errors[n] = q.error;
            prof.valid[n] = q.converged;
        } catch (const Error&) {
            prof.valid[n] = false;
        }
    }
    // The retained-sample error contract; drop samples that violate it.
    for (int n = 0; n < cfg.samples; ++n)
        if (prof.valid[n] && !(std::abs(prof.quad_errors[n]) < 1e-3 * (1.0 + std::abs(prof.phis[n]))))
            prof.valid[n] = false;
    return prof;
}

GermProfile phi_profile(const SeparatrixPair& pair, const ChartFn& g_hat, const GermConfig& cfg) {
    return phi_profile_factory(pair, [&g_hat]() { return g_hat; }, cfg);
}

// ---------------------------------------------------------------------------
// Divided-difference convergence probing
// ---------------------------------------------------------------------------

namespace {

struct DDSeq {
    std::vector<double> value;
    std::vector<double> noise;
};

// dd over consecutive geometric nodes, with first-order noise propagation.
DDSeq divided_differences(const std::vector<double>& s, const std::vector<double>& phi,
                          const std::vector<double>& noise, int order) {
    DDSeq dd{phi, noise};
    for (int k = 1; k <= order; ++k) {
        const std::size_t m = dd.value.size() - 1;
        std::vector<double> v(m), e(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double dx = s[i + k] - s[i];
            v[i] = (dd.value[i + 1] - dd.value[i]) / dx;
            e[i] = (dd.noise[i + 1] + dd.noise[i]) / std::abs(dx);
        }
        dd.value = std::move(v);
        dd.noise = std::move(e);
    }
    return dd;
}

// Convergence of a divided-difference sequence toward the singular endpoint.
// Fast path: strict Cauchy over the last scales.  Slow power-law approach
// (phi - A ~ delta^s with small s) is accepted through a contraction test on
// the successive differences.  Entries drowned in propagated quadrature noise
// are trimmed; an all-noise sequence counts as converged to zero.
bool dd_converges(const DDSeq& dd, double tol_cauchy) {
    const std::size_t n = dd.value.size();
    if (n == 0) return true;

    std::size_t last = n;
    while (last > 0 && std::abs(dd.value[last - 1]) <= 2.0 * dd.noise[last - 1]) --last;
    if (last == 0) return true; // zero within noise everywhere

    const std::size_t w = std::min<std::size_t>(6, last);
    const std::size_t begin = last - w;
    if (w < 4) {
        // Too little signal to run the window tests; call it divergent only on
        // clear growth across the signal region.
        const double first = std::abs(dd.value[begin]);
        const double final = std::abs(dd.value[last - 1]);
        return !(final > 4.0 * std::max(first, dd.noise[last - 1]));
    }

    double dmax = 0.0;
    for (std::size_t i = begin; i < last; ++i) dmax = std::max(dmax, std::abs(dd.value[i]));
    const double scale = 1.0 + dmax;

    std::vector<double> diffs;
    for (std::size_t i = begin; i + 1 < last; ++i)
        diffs.push_back(dd.value[i + 1] - dd.value[i]);

    bool strict = true;
    for (double d : diffs)
        if (std::abs(d) > tol_cauchy * scale) strict = false;
    if (strict) return true;

    double logq = 0.0;
    int nq = 0;
    for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
        const double a = std::abs(diffs[i]), b = std::abs(diffs[i + 1]);
        if (a > 0.0 && b > 0.0) {
            logq += std::log(b / a);
            ++nq;
        }
    }
    const double q = nq > 0 ? std::exp(logq / nq) : 1.0;
    return q <= 0.95 && std::abs(diffs.back()) <= 1e-2 * scale;
}

struct FitData {
    std::vector<double> deltas, phis, noises;
};

FitData tail_samples(const GermProfile& prof, int window) {
    FitData d;
    for (std::size_t i = prof.xs.size(); i-- > 0;) {
        if (!prof.valid[i]) continue;
        d.deltas.push_back(prof.xs[i]);
        d.phis.push_back(prof.phis[i]);
        d.noises.push_back(std::max(prof.quad_errors[i], 1e-14 * (1.0 + std::abs(prof.phis[i]))));
        if (static_cast<int>(d.deltas.size()) >= window) break;
    }
    std::reverse(d.deltas.begin(), d.deltas.end());
    std::reverse(d.phis.begin(), d.phis.end());
    std::reverse(d.noises.begin(), d.noises.end());
    return d;
}

} // namespace

GermClass classify_germ(const GermProfile& prof, int r_max, const GermConfig& cfg) {
    if (prof.valid_count() < 12)
        throw TooFewSamples("germ classification needs at least 12 valid profile samples, got " +
                            std::to_string(prof.valid_count()));

    GermClass out;
    out.r_max = r_max;
    out.margin = cfg.margin;

    std::vector<double> s, phi, noise;
    for (std::size_t i = 0; i < prof.xs.size(); ++i) {
        if (!prof.valid[i]) continue;
        s.push_back(prof.pair.a + prof.pair.into_v() * prof.xs[i]);
        phi.push_back(prof.phis[i]);
        noise.push_back(std::max(prof.quad_errors[i], 1e-14 * (1.0 + std::abs(prof.phis[i]))));
    }

    double phimax = 0.0;
    for (double v : phi) phimax = std::max(phimax, std::abs(v));
    if (phimax <= cfg.zero_tol) {
        out.zero_profile = true;
        out.r_hat = r_max;
        out.fit_r2 = 1.0;
        return out;
    }

    // C^r probing through divided-difference convergence, lowest order first.
    int r_reached = -1;
    for (int r = 0; r <= r_max; ++r) {
        if (static_cast<int>(s.size()) <= r + 4) break;
        const DDSeq dd = divided_differences(s, phi, noise, r);
        if (!dd_converges(dd, cfg.tol_cauchy)) break;
        r_reached = r;
    }
    if (r_reached >= 0) out.r_hat = r_reached;

    const FitData tail = tail_samples(prof, cfg.fit_window);
    std::vector<double> lnd(tail.deltas.size());
    for (std::size_t i = 0; i < tail.deltas.size(); ++i) lnd[i] = std::log(tail.deltas[i]);

    if (!out.r_hat) {
        // Divergent profile: power model ln|phi| = -beta ln(delta) + c against
        // the logarithmic model phi = c0 + c1 ln(1/delta); higher R^2 wins.
        std::vector<double> lnphi(tail.phis.size()), lninv(tail.deltas.size());
        for (std::size_t i = 0; i < tail.phis.size(); ++i) {
            lnphi[i] = std::log(std::max(std::abs(tail.phis[i]), 1e-300));
            lninv[i] = -lnd[i];
        }
        const LineFit pow_fit = fit_line(lnd, lnphi);
        const LineFit log_fit = fit_line(lninv, tail.phis);
        out.beta_hat = -pow_fit.slope;
        out.has_beta = true;
        if (out.beta_hat < 0.15) {
            const double gap = log_fit.r2 - pow_fit.r2;
            if (gap > 1e-6) {
                out.tail = TailModel::Log;
                out.log_flag = true;
                out.fit_r2 = log_fit.r2;
            } else if (gap < -1e-6) {
                out.tail = TailModel::Power;
                out.fit_r2 = pow_fit.r2;
            } else {
                out.tail = TailModel::Tie;
                out.fit_r2 = std::max(log_fit.r2, pow_fit.r2);
            }
        } else {
            out.tail = TailModel::Power;
            out.fit_r2 = pow_fit.r2;
        }
        return out;
    }

    // Convergent profile: Aitken-extrapolate the limit, then fit the power of
    // the deviation (beta_hat <= 0 marks a vanishing deviation phi - A).
    const std::size_t m = phi.size();
    double limit = phi.back();
    for (std::size_t i = m; i-- > 2;) {
        const double d1 = phi[i - 1] - phi[i - 2];
        const double d2 = phi[i] - phi[i - 1];
        const double den = d2 - d1;
        if (std::abs(den) > 4.0 * (noise[i] + noise[i - 1] + noise[i - 2])) {
            limit = phi[i] - d2 * d2 / den;
            break;
        }
    }
    std::vector<double> xs_fit, ys_fit;
    for (std::size_t i = 0; i < tail.deltas.size(); ++i) {
        const double dev = std::abs(tail.phis[i] - limit);
        if (dev > 10.0 * tail.noises[i]) {
            xs_fit.push_back(lnd[i]);
            ys_fit.push_back(std::log(dev));
        }
    }
    if (xs_fit.size() >= 4) {
        const LineFit f = fit_line(xs_fit, ys_fit);
        out.beta_hat = -f.slope;
        out.has_beta = true;
        out.tail = TailModel::Power;
        out.fit_r2 = f.r2;
    } else {
        out.fit_r2 = 1.0;
    }
    return out;
}

Tri GermClass::sobolev(int l, double p) const {
    if (zero_profile) return Tri::True_;
    if (r_hat && *r_hat >= l) return Tri::True_;

    // Power tail: membership by alpha_hat = (beta_hat+1)/2 against 1/p - l/2.
    auto power_verdict = [&](double beta) {
        const double alpha = 0.5 * (beta + 1.0);
        const double tau = 1.0 / p - 0.5 * l;
        if (alpha <= tau - margin) return Tri::True_;
        if (alpha >= tau + margin) return Tri::False_;
        return Tri::Indeterminate;
    };
    const Tri log_verdict = l == 0 ? Tri::True_ : Tri::False_;

    switch (tail) {
        case TailModel::Log: return log_verdict;
        case TailModel::Tie: {
            const Tri pw = has_beta ? power_verdict(beta_hat) : Tri::Indeterminate;
            return pw == log_verdict ? pw : Tri::Indeterminate;
        }
        case TailModel::Power: return power_verdict(beta_hat);
        case TailModel::None: break;
    }
    // Convergent with no measurable deviation: nothing to certify beyond r_hat.
    return Tri::Indeterminate;
}

// ---------------------------------------------------------------------------
// classify_equation
// ---------------------------------------------------------------------------

Tri EquationVerdict::sobolev(int l, double p) const {
    for (const auto& [tl, tp, v] : sobolev_table)
        if (tl == l && tp == p) return v;
    return Tri::Indeterminate;
}

EquationVerdict classify_equation(const Scenario& s, const ScalarField& g, Mode mode, int r_max,
                                  std::span<const int> l_list, std::span<const double> p_list,
                                  const GermConfig& cfg) {
    if (s.pairs.empty())
        throw ValidationError("scenario '" + s.name + "' declares no separatrix pairs");

    static const int default_l[] = {0, 1};
    static const double default_p[] = {1.0, 2.0};
    if (l_list.empty()) l_list = default_l;
    if (p_list.empty()) p_list = default_p;

    EquationVerdict verdict;
    verdict.iff = s.hamiltonian;

    for (const auto& pair : s.pairs) {
        PairVerdict pv;
        try {
            const double w = 2.5 * cfg.delta0;
            Rect region;
            if (pair.side == Side::Left)
                region = {pair.a - w, pair.a - cfg.delta0 / 64.0, pair.b1, pair.b2};
            else
                region = {pair.a + cfg.delta0 / 64.0, pair.a + w, pair.b1, pair.b2};
            const ChartMap map(s, region, pair.anchor);

            const Vec2 center{pair.a, pair.b};
            // Each profile sample gets its own warm-started evaluator.
            const auto factory = [&]() -> ChartFn {
                auto ev = std::make_shared<PushforwardEvaluator>(s, map, g, mode, center);
                return [ev](double xp, double yp) { return (*ev)(xp, yp); };
            };
            const GermProfile prof = phi_profile_factory(pair, factory, cfg);
            pv.germ = classify_germ(prof, r_max, cfg);
        } catch (const Error& e) {
            pv.error = e.what();
        }
        verdict.pairs.push_back(std::move(pv));
    }

    bool all_known = true;
    std::optional<int> overall;
    bool any_none = false;
    for (const auto& pv : verdict.pairs) {
        if (!pv.germ) {
            all_known = false;
            continue;
        }
        if (!pv.germ->r_hat) {
            any_none = true;
        } else if (!any_none) {
            overall = overall ? std::min(*overall, *pv.germ->r_hat) : *pv.germ->r_hat;
        }
        verdict.log_any = verdict.log_any || pv.germ->log_flag;
    }
    verdict.r_hat_known = all_known;
    verdict.r_hat = any_none ? std::nullopt : overall;

    for (int l : l_list) {
        for (double p : p_list) {
            Tri acc = Tri::True_;
            for (const auto& pv : verdict.pairs) {
                const Tri v = pv.germ ? pv.germ->sobolev(l, p) : Tri::Indeterminate;
                if (v == Tri::False_) {
                    acc = Tri::False_;
                    break;
                }
                if (v == Tri::Indeterminate) acc = Tri::Indeterminate;
            }
            verdict.sobolev_table.emplace_back(l, p, acc);
        }
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// x-regularity probe
// ---------------------------------------------------------------------------

Tri x_regularity_probe(const SeparatrixPair& pair, const ChartFn& g_hat, int k, double noise_eps) {
    if (k + 1 > 6) throw ParameterOutOfRange("finite-difference order limit is 6 (k+1 <= 6)");
    const int m = k + 1;

    // Binomial coefficients for the one-sided m-th difference.
    std::vector<double> coef(m + 1);
    coef[0] = 1.0;
    for (int i = 1; i <= m; ++i) coef[i] = coef[i - 1] * (m - i + 1) / i;

    const double half_lo = pair.b - pair.b1;
    const double half_hi = pair.b2 - pair.b;
    const int j_max = 11;
    std::vector<double> bound(j_max, 0.0);
    std::vector<bool> floored(j_max, true);

    for (int j = 0; j < j_max; ++j) {
        const double delta = 0.05 * std::pow(0.5, j);
        const double h = delta * 0.2308 / m;
        const double x0 = pair.a + pair.into_v() * delta * 1.317;

        // Fixed ordinates across (b1,b2) plus ordinates shrinking toward b.
        std::vector<double> ys;
        for (double t : {0.131, 0.367, 0.711}) {
            ys.push_back(pair.b - half_lo * t);
            ys.push_back(pair.b + half_hi * t);
        }
        for (double c : {0.377, 0.734}) {
            ys.push_back(pair.b + std::min(delta * c, 0.9 * half_hi));
            ys.push_back(pair.b - std::min(delta * c, 0.9 * half_lo));
        }

        double bmax = 0.0, gmax = 0.0;
        bool ok = true;
        for (double yp : ys) {
            double acc = 0.0;
            try {
                for (int i = 0; i <= m; ++i) {
                    const double v = g_hat(x0 + pair.into_v() * i * h, yp);
                    gmax = std::max(gmax, std::abs(v));
                    acc += ((m - i) % 2 == 0 ? 1.0 : -1.0) * coef[i] * v;
                }
            } catch (const Error&) {
                ok = false;
                break;
            }
            bmax = std::max(bmax, std::abs(acc) / std::pow(h, m));
        }
        if (!ok) continue;
        bound[j] = bmax;
        const double nf = std::pow(2.0, m) * noise_eps * (1.0 + gmax) / std::pow(h, m);
        floored[j] = bmax <= 4.0 * nf;
    }

    std::vector<double> sig;
    for (int j = 0; j < j_max; ++j)
        if (!floored[j]) sig.push_back(bound[j]);
    if (sig.size() < 3) return Tri::True_; // difference vanishes within noise

    double logg = 0.0;
    int ng = 0;
    const std::size_t tail = std::min<std::size_t>(4, sig.size() - 1);
    for (std::size_t i = sig.size() - 1 - tail; i + 1 < sig.size(); ++i) {
        if (sig[i] > 0.0 && sig[i + 1] > 0.0) {
            logg += std::log(sig[i + 1] / sig[i]);
            ++ng;
        }
    }
    const double growth = ng > 0 ? std::exp(logg / ng) : 1.0;
    if (growth <= 1.2) return Tri::True_;
    if (growth >= 1.6) return Tri::False_;
    return Tri::Indeterminate;
}

} // namespace cohomfield
