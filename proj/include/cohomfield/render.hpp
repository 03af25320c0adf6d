#pragma once

#include <string>

#include "cohomfield/scenarios.hpp"

namespace cohomfield {

struct RenderOptions {
    int leaves = 9;           // thin field leaves per side
    unsigned long seed = 1;   // placement of thin leaves
    int width = 840;
    int height = 600;
};

// Standalone SVG phase portrait: integrated leaves of the field (thin),
// separatrices (thick), transversal leaves at b, b1, b2 (dashed).
// Deterministic for a fixed seed.  Throws on integration failure of a styled
// (thick or dashed) leaf.
std::string render_svg(const Scenario& s, const RenderOptions& opts = {});

} // namespace cohomfield
