#include "cohomfield/config.hpp"

#include <fstream>
#include <sstream>

#include "cohomfield/kvfile.hpp"

namespace cohomfield {

RunConfig parse_config(const std::string& text) {
    const KvFile kv = parse_kv(text);
    RunConfig cfg;
    for (const auto& sec : kv.sections) {
        if (sec.name == "integrator") {
            if (sec.has("abs_tol")) cfg.integrator.abs_tol = sec.get_number("abs_tol");
            if (sec.has("rel_tol")) cfg.integrator.rel_tol = sec.get_number("rel_tol");
            if (sec.has("h_min")) cfg.integrator.h_min = sec.get_number("h_min");
            if (sec.has("safety")) cfg.integrator.safety = sec.get_number("safety");
            if (sec.has("wall_guard_s")) cfg.integrator.wall_guard_s = sec.get_number("wall_guard_s");
            if (sec.has("max_steps")) cfg.integrator.max_steps = static_cast<int>(sec.get_number("max_steps"));
        } else if (sec.name == "germ") {
            if (sec.has("delta0")) cfg.germ.delta0 = sec.get_number("delta0");
            if (sec.has("rho")) cfg.germ.rho = sec.get_number("rho");
            if (sec.has("samples")) cfg.germ.samples = static_cast<int>(sec.get_number("samples"));
            if (sec.has("quad_rel")) cfg.germ.quad_rel = sec.get_number("quad_rel");
            if (sec.has("quad_abs")) cfg.germ.quad_abs = sec.get_number("quad_abs");
            if (sec.has("max_subdiv")) cfg.germ.max_subdiv = static_cast<int>(sec.get_number("max_subdiv"));
            if (sec.has("r_max")) cfg.germ.r_max = static_cast<int>(sec.get_number("r_max"));
            if (sec.has("tol_cauchy")) cfg.germ.tol_cauchy = sec.get_number("tol_cauchy");
            if (sec.has("margin")) cfg.germ.margin = sec.get_number("margin");
            if (sec.has("zero_tol")) cfg.germ.zero_tol = sec.get_number("zero_tol");
            if (sec.has("fit_window")) cfg.germ.fit_window = static_cast<int>(sec.get_number("fit_window"));
            if (sec.has("parallel")) cfg.germ.parallel = sec.get_bool("parallel");
        } else if (sec.name == "solver") {
            if (sec.has("mask_distance")) cfg.solver.mask_distance = sec.get_number("mask_distance");
            if (sec.has("t_max")) cfg.solver.t_max = sec.get_number("t_max");
            if (sec.has("residual_h")) cfg.solver.residual_h = sec.get_number("residual_h");
            if (sec.has("parallel")) cfg.solver.parallel = sec.get_bool("parallel");
        } else {
            throw ParseError("unknown config section [" + sec.name + "]", sec.line);
        }
    }
    kv.reject_unused();
    cfg.solver.integrator = cfg.integrator;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace cohomfield
