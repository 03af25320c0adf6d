#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cohomfield/chart.hpp"
#include "cohomfield/config.hpp"
#include "cohomfield/errors.hpp"
#include "cohomfield/germ.hpp"
#include "cohomfield/render.hpp"
#include "cohomfield/scenarios.hpp"
#include "cohomfield/solver.hpp"

using json = nlohmann::json;
using namespace cohomfield;

namespace {

struct CommonArgs {
    std::string scenario_name;
    std::string scenario_file;
    std::string config_path;
    std::string mode_str = "xiprime";
};

Scenario resolve_scenario(const CommonArgs& c) {
    const bool by_name = !c.scenario_name.empty();
    const bool by_file = !c.scenario_file.empty();
    if (by_name == by_file)
        throw ValidationError("exactly one of --scenario or --file is required");
    return by_name ? builtin(c.scenario_name) : load_scenario(c.scenario_file);
}

RunConfig resolve_config(const CommonArgs& c) {
    if (c.config_path.empty()) return RunConfig{};
    return load_config(c.config_path);
}

Mode resolve_mode(const CommonArgs& c) {
    if (c.mode_str == "xi") return Mode::Xi;
    if (c.mode_str == "xiprime") return Mode::XiPrime;
    throw ValidationError("--mode must be 'xi' or 'xiprime'");
}

void add_common(CLI::App* cmd, CommonArgs& c) {
    cmd->add_option("--scenario", c.scenario_name, "built-in scenario name");
    cmd->add_option("--file", c.scenario_file, "scenario file path");
    cmd->add_option("--config", c.config_path, "config file path");
    cmd->add_option("--mode", c.mode_str, "equation mode: xi | xiprime");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_out(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << content;
}

int cmd_classify(const CommonArgs& common, const std::string& g_text, int r_max,
                 const std::vector<int>& ls, const std::vector<double>& ps) {
    const Scenario s = resolve_scenario(common);
    const RunConfig cfg = resolve_config(common);
    const Mode mode = resolve_mode(common);
    const ScalarField g = ScalarField::from_text(g_text, false);

    const EquationVerdict v =
        classify_equation(s, g, mode, r_max, std::span<const int>(ls), std::span<const double>(ps),
                          cfg.germ);

    const char* label = v.iff ? "iff" : "sufficient-only";
    for (std::size_t i = 0; i < v.pairs.size(); ++i) {
        const auto& pv = v.pairs[i];
        json line;
        line["pair"] = i;
        if (pv.germ) {
            const GermClass& gc = *pv.germ;
            std::printf("pair %zu: r_hat=%s beta_hat=%.4f log=%s fit_r2=%.6f\n", i,
                        gc.r_hat ? std::to_string(*gc.r_hat).c_str() : "none",
                        gc.has_beta ? gc.beta_hat : 0.0, gc.log_flag ? "yes" : "no", gc.fit_r2);
            if (gc.r_hat)
                line["r_hat"] = *gc.r_hat;
            else
                line["r_hat"] = nullptr;
            line["beta_hat"] = gc.has_beta ? gc.beta_hat : 0.0;
            line["log_flag"] = gc.log_flag;
            line["fit_r2"] = gc.fit_r2;
            json tbl = json::array();
            for (int l : ls)
                for (double p : ps)
                    tbl.push_back({{"l", l}, {"p", p}, {"verdict", to_string(gc.sobolev(l, p))}});
            line["sobolev"] = tbl;
        } else {
            std::printf("pair %zu: classification failed: %s\n", i, pv.error.c_str());
            line["error"] = pv.error;
        }
        std::cout << line.dump() << "\n";
    }

    std::printf("overall (%s): r_hat=%s\n", label,
                v.r_hat_known ? (v.r_hat ? std::to_string(*v.r_hat).c_str() : "none") : "unknown");
    json overall;
    overall["overall"] = true;
    overall["criteria"] = label;
    if (!v.r_hat_known)
        overall["r_hat"] = "unknown";
    else if (v.r_hat)
        overall["r_hat"] = *v.r_hat;
    else
        overall["r_hat"] = nullptr;
    json tbl = json::array();
    for (const auto& [l, p, verdict] : v.sobolev_table) {
        std::printf("  sobolev(l=%d, p=%g) = %s\n", l, p, to_string(verdict));
        tbl.push_back({{"l", l}, {"p", p}, {"verdict", to_string(verdict)}});
    }
    overall["sobolev"] = tbl;
    std::cout << overall.dump() << "\n";
    return 0;
}

int cmd_solve(const CommonArgs& common, const std::string& g_text, const std::string& grid_spec,
              const std::vector<double>& box_spec, std::optional<double> seed_b,
              const std::string& seed_phi, const std::string& out_path) {
    const Scenario s = resolve_scenario(common);
    const RunConfig cfg = resolve_config(common);
    const Mode mode = resolve_mode(common);
    const ScalarField g = ScalarField::from_text(g_text, false);

    int nx = 0, ny = 0;
    if (std::sscanf(grid_spec.c_str(), "%d,%d", &nx, &ny) != 2 || nx < 2 || ny < 2)
        throw ValidationError("--grid expects NX,NY with both at least 2");

    Rect box = s.box;
    if (!box_spec.empty()) {
        if (box_spec.size() != 4) throw ValidationError("--box expects x0,x1,y0,y1");
        box = {box_spec[0], box_spec[1], box_spec[2], box_spec[3]};
    }

    double b_seed;
    if (seed_b)
        b_seed = *seed_b;
    else if (!s.pairs.empty())
        b_seed = s.pairs.front().b;
    else
        throw ValidationError("scenario has no separatrix pairs; pass --seed-b explicitly");

    const ExprPtr phi_expr = parse(seed_phi);
    SeedData seed{b_seed, [phi_expr](double f) { return eval(phi_expr, f, 0.0); }};

    const SolutionGrid grid = solve_on_grid(s, g, mode, seed, box, nx, ny, cfg.solver);

    std::string csv = "x,y,f,status\n";
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = grid.idx(i, j);
            csv += fmt17(grid.x_at(i));
            csv += ',';
            csv += fmt17(grid.y_at(j));
            csv += ',';
            switch (grid.status[k]) {
                case CellStatus::Value:
                    csv += fmt17(grid.values[k]);
                    csv += ",V\n";
                    break;
                case CellStatus::NearSeparatrix: csv += ",M\n"; break;
                case CellStatus::Unreachable: csv += ",U\n"; break;
            }
        }
    }
    write_out(out_path, csv);

    const ResidualStats rs =
        residual_check(s, grid, g, mode, seed, cfg.solver.residual_h, cfg.solver);
    std::fprintf(stderr,
                 "residual: max=%.3e mean=%.3e over %zu points; masked %.1f%%, unreachable %.1f%%\n",
                 rs.max, rs.mean, rs.count, 100.0 * grid.masked_fraction,
                 100.0 * grid.unreachable_fraction);
    return 0;
}

int cmd_contact(const CommonArgs& common, int pair_idx, bool reversed, double eta0, double ratio,
                int count) {
    const Scenario s = resolve_scenario(common);
    const RunConfig cfg = resolve_config(common);
    if (pair_idx < 0 || pair_idx >= static_cast<int>(s.pairs.size()))
        throw ValidationError("--pair index out of range");
    const SeparatrixPair& pair = s.pairs[pair_idx];

    const double w = 0.75;
    Rect region;
    if (pair.side == Side::Left)
        region = {pair.a - w, pair.a - w / 64.0, pair.b1, pair.b2};
    else
        region = {pair.a + w / 64.0, pair.a + w, pair.b1, pair.b2};
    const ChartMap map(s, region, pair.anchor);

    std::vector<double> etas;
    for (int k = 0; k < count; ++k) etas.push_back(eta0 * std::pow(ratio, k));
    const ContactEstimate est = contact_exponent(s, map, pair, etas, reversed, cfg.solver);

    std::printf("contact exponent pair %d%s: alpha_hat=%.6f r2=%.8f samples=%zu\n", pair_idx,
                reversed ? " (reversed)" : "", est.alpha_hat, est.fit_r2, est.used);
    json line{{"pair", pair_idx},
              {"reversed", reversed},
              {"alpha_hat", est.alpha_hat},
              {"fit_r2", est.fit_r2},
              {"samples", est.used}};
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_verify(const CommonArgs& common, int pair_idx, double delta0, double ratio, int count) {
    const Scenario s = resolve_scenario(common);
    const RunConfig cfg = resolve_config(common);
    if (pair_idx < 0 || pair_idx >= static_cast<int>(s.pairs.size()))
        throw ValidationError("--pair index out of range");
    const SeparatrixPair& pair = s.pairs[pair_idx];

    const double w = std::max(0.75, 2.0 * delta0);
    Rect region;
    if (pair.side == Side::Left)
        region = {pair.a - w, pair.a - w / 64.0, pair.b1, pair.b2};
    else
        region = {pair.a + w / 64.0, pair.a + w, pair.b1, pair.b2};
    const ChartMap map(s, region, pair.anchor);

    std::vector<double> deltas;
    for (int k = 0; k < count; ++k) deltas.push_back(delta0 * std::pow(ratio, k));
    const InseparableReport rep = verify_inseparable(s, map, pair, deltas, cfg.integrator);

    for (const auto& pr : rep.probes) {
        std::printf("delta=%.3e: crossed G=b %s, crossed G=b2 %s\n", pr.delta,
                    pr.crossed_b ? "yes" : "NO", pr.crossed_b2 ? "yes" : "NO");
        json line{{"delta", pr.delta}, {"crossed_b", pr.crossed_b}, {"crossed_b2", pr.crossed_b2}};
        if (pr.crossed_b2) line["at_b2"] = {pr.at_b2.x, pr.at_b2.y};
        std::cout << line.dump() << "\n";
    }
    std::printf("all crossings: %s; b2 crossings converging: %s (final gap %.3e)\n",
                rep.all_crossed ? "yes" : "no", rep.converging ? "yes" : "no", rep.final_gap);
    json overall{{"all_crossed", rep.all_crossed},
                 {"converging", rep.converging},
                 {"final_gap", rep.final_gap}};
    std::cout << overall.dump() << "\n";
    return 0;
}

int cmd_render(const CommonArgs& common, const std::string& out_path, int leaves,
               unsigned long seed) {
    const Scenario s = resolve_scenario(common);
    RenderOptions opts;
    opts.leaves = leaves;
    opts.seed = seed;
    const std::string svg = render_svg(s, opts);
    write_out(out_path, svg);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cohomfield: solvability analysis and characteristic solves of L_xi f = g on the plane"};
    app.require_subcommand(1);

    CommonArgs c_classify, c_solve, c_contact, c_verify, c_render;

    auto* classify = app.add_subcommand("classify", "classify solvability of L f = g");
    add_common(classify, c_classify);
    std::string classify_g;
    int classify_rmax = 4;
    std::vector<int> classify_l = {0, 1};
    std::vector<double> classify_p = {1.0, 2.0};
    classify->add_option("--g", classify_g, "right-hand side expression")->required();
    classify->add_option("--rmax", classify_rmax, "largest probed C^r order");
    classify->add_option("--l", classify_l, "Sobolev orders l")->delimiter(',');
    classify->add_option("--p", classify_p, "Sobolev exponents p")->delimiter(',');

    auto* solve = app.add_subcommand("solve", "solve L f = g on a grid; writes CSV");
    add_common(solve, c_solve);
    std::string solve_g, solve_grid = "41,41", solve_phi = "0", solve_out;
    std::vector<double> solve_box;
    std::optional<double> solve_seed_b;
    double solve_seed_b_val = 0.0;
    solve->add_option("--g", solve_g, "right-hand side expression")->required();
    solve->add_option("--grid", solve_grid, "grid size NX,NY");
    solve->add_option("--box", solve_box, "solve box x0,x1,y0,y1")->delimiter(',');
    auto* sb = solve->add_option("--seed-b", solve_seed_b_val, "G-value of the seed transversal");
    solve->add_option("--seed-phi", solve_phi, "seed value as expression in x = F-coordinate");
    solve->add_option("--out", solve_out, "CSV output path (default stdout)");

    auto* contact = app.add_subcommand("contact", "measure the contact exponent of a pair");
    add_common(contact, c_contact);
    int contact_pair = 0, contact_count = 10;
    bool contact_rev = false;
    double contact_eta0 = 0.2, contact_ratio = 0.6;
    contact->add_option("--pair", contact_pair, "pair index");
    contact->add_flag("--reversed", contact_rev, "offset along t1 instead of t2");
    contact->add_option("--eta0", contact_eta0, "largest offset");
    contact->add_option("--ratio", contact_ratio, "geometric ratio");
    contact->add_option("--count", contact_count, "number of offsets");

    auto* verify = app.add_subcommand("verify", "verify the separatrix-pair chart structure");
    add_common(verify, c_verify);
    int verify_pair = 0, verify_count = 8;
    double verify_delta0 = 1e-1, verify_ratio = 0.5;
    verify->add_option("--pair", verify_pair, "pair index");
    verify->add_option("--delta0", verify_delta0, "largest chart offset");
    verify->add_option("--ratio", verify_ratio, "geometric ratio");
    verify->add_option("--count", verify_count, "number of offsets");

    auto* render = app.add_subcommand("render", "render the phase portrait as SVG");
    add_common(render, c_render);
    std::string render_out;
    int render_leaves = 9;
    unsigned long render_seed = 1;
    render->add_option("--out", render_out, "SVG output path (default stdout)");
    render->add_option("--leaves", render_leaves, "thin leaves per side");
    render->add_option("--seed", render_seed, "placement seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (classify->parsed())
            return cmd_classify(c_classify, classify_g, classify_rmax, classify_l, classify_p);
        if (solve->parsed()) {
            if (sb->count() > 0) solve_seed_b = solve_seed_b_val;
            return cmd_solve(c_solve, solve_g, solve_grid, solve_box, solve_seed_b, solve_phi,
                             solve_out);
        }
        if (contact->parsed())
            return cmd_contact(c_contact, contact_pair, contact_rev, contact_eta0, contact_ratio,
                               contact_count);
        if (verify->parsed())
            return cmd_verify(c_verify, verify_pair, verify_delta0, verify_ratio, verify_count);
        if (render->parsed()) return cmd_render(c_render, render_out, render_leaves, render_seed);
    } catch (const SyntaxError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const UnknownScenario& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "computation failed: %s\n", e.what());
        return 3;
    }
    return 2;
}
