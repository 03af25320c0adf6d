#pragma once

#include <string>

#include "cohomfield/flow.hpp"
#include "cohomfield/germ.hpp"
#include "cohomfield/solver.hpp"

namespace cohomfield {

// Runtime configuration, overridable from a sectioned key/value file with
// [integrator], [germ] and [solver] sections.  Unknown keys are rejected.
struct RunConfig {
    IntegratorConfig integrator;
    GermConfig germ;
    SolverConfig solver;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

} // namespace cohomfield
