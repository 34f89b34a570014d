#pragma once

#include <string>
#include <vector>

namespace qcl {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    double fidelity = 0.0;
};

struct SvgOptions {
    int width = 840;
    int height = 600;
    double marker_radius = 2.5;
    std::string x_label = "pc1";
    std::string y_label = "pc2";
    // Embedded verbatim as an XML comment so the plot records its
    // producing configuration.
    std::string config_comment;
};

// Fidelity 0 maps to blue, 1 to red, values between sweep the hue.
std::string fidelity_color(double fidelity);

// Standalone deterministic SVG scatter plot: fixed layout, axes with six
// ticks per side, one circle per point colored by fidelity. Coordinates
// are rounded to 0.01 px so output bytes are stable.
std::string render_scatter_svg(const std::vector<ScatterPoint>& points,
                               const SvgOptions& options);

} // namespace qcl
