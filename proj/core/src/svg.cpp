#include "qcl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

std::string fmt_px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

// XML comments cannot contain "--"; break any run apart.
std::string comment_safe(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '-' && !out.empty() && out.back() == '-')
            out += ' ';
        out += c;
    }
    return out;
}

struct AxisRange {
    double lo;
    double hi;
};

AxisRange pad_degenerate(double lo, double hi) {
    if (lo == hi)
        return {lo - 0.5, hi + 0.5};
    return {lo, hi};
}

} // namespace

std::string fidelity_color(double fidelity) {
    if (!std::isfinite(fidelity))
        throw invalid_argument("fidelity_color: non-finite fidelity");
    const double f = std::clamp(fidelity, 0.0, 1.0);
    const double h = 240.0 * (1.0 - f); // blue at 0, red at 1
    const double x = 1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0);
    double r = 0.0, g = 0.0, b = 0.0;
    if (h < 60.0) {
        r = 1.0;
        g = x;
    } else if (h < 120.0) {
        r = x;
        g = 1.0;
    } else if (h < 180.0) {
        g = 1.0;
        b = x;
    } else {
        g = x;
        b = 1.0;
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(r * 255.0)),
                  static_cast<int>(std::lround(g * 255.0)),
                  static_cast<int>(std::lround(b * 255.0)));
    return buf;
}

std::string render_scatter_svg(const std::vector<ScatterPoint>& points,
                               const SvgOptions& options) {
    if (options.width < 200 || options.height < 200)
        throw invalid_argument("SvgOptions: canvas must be at least 200x200");
    if (!(options.marker_radius > 0.0))
        throw invalid_argument("SvgOptions: marker_radius must be positive");
    for (const ScatterPoint& p : points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) ||
            !std::isfinite(p.fidelity))
            throw invalid_argument("render_scatter_svg: non-finite point");

    const double w = options.width;
    const double h = options.height;
    const double ml = 70.0, mr = 24.0, mt = 24.0, mb = 56.0;
    const double px0 = ml, px1 = w - mr;
    const double py0 = h - mb, py1 = mt; // y grows upward on the plot

    AxisRange xr{0.0, 1.0}, yr{0.0, 1.0};
    if (!points.empty()) {
        double xlo = points[0].x, xhi = points[0].x;
        double ylo = points[0].y, yhi = points[0].y;
        for (const ScatterPoint& p : points) {
            xlo = std::min(xlo, p.x);
            xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y);
            yhi = std::max(yhi, p.y);
        }
        xr = pad_degenerate(xlo, xhi);
        yr = pad_degenerate(ylo, yhi);
    }

    auto to_px = [&](double x) {
        return px0 + (x - xr.lo) / (xr.hi - xr.lo) * (px1 - px0);
    };
    auto to_py = [&](double y) {
        return py0 + (y - yr.lo) / (yr.hi - yr.lo) * (py1 - py0);
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" viewBox=\"0 0 " +
           std::to_string(options.width) + " " +
           std::to_string(options.height) + "\">\n";
    if (!options.config_comment.empty())
        svg += "<!-- " + comment_safe(xml_escape(options.config_comment)) +
               " -->\n";
    svg += "<rect width=\"" + std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" fill=\"#ffffff\"/>\n";

    svg += "<g stroke=\"#333333\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt_px(px0) + "\" y1=\"" + fmt_px(py0) +
           "\" x2=\"" + fmt_px(px1) + "\" y2=\"" + fmt_px(py0) + "\"/>\n";
    svg += "<line x1=\"" + fmt_px(px0) + "\" y1=\"" + fmt_px(py0) +
           "\" x2=\"" + fmt_px(px0) + "\" y2=\"" + fmt_px(py1) + "\"/>\n";
    svg += "</g>\n";

    const int n_ticks = 6;
    svg += "<g stroke=\"#333333\" stroke-width=\"1\" font-family=\"sans-serif\""
           " font-size=\"12\">\n";
    for (int i = 0; i < n_ticks; ++i) {
        const double frac = static_cast<double>(i) /
                            static_cast<double>(n_ticks - 1);
        const double xv = xr.lo + frac * (xr.hi - xr.lo);
        const double yv = yr.lo + frac * (yr.hi - yr.lo);
        const double tx = to_px(xv);
        const double ty = to_py(yv);
        svg += "<line x1=\"" + fmt_px(tx) + "\" y1=\"" + fmt_px(py0) +
               "\" x2=\"" + fmt_px(tx) + "\" y2=\"" + fmt_px(py0 + 6.0) +
               "\"/>\n";
        svg += "<text x=\"" + fmt_px(tx) + "\" y=\"" + fmt_px(py0 + 20.0) +
               "\" stroke=\"none\" fill=\"#333333\" text-anchor=\"middle\">" +
               xml_escape(fmt_tick(xv)) + "</text>\n";
        svg += "<line x1=\"" + fmt_px(px0 - 6.0) + "\" y1=\"" + fmt_px(ty) +
               "\" x2=\"" + fmt_px(px0) + "\" y2=\"" + fmt_px(ty) + "\"/>\n";
        svg += "<text x=\"" + fmt_px(px0 - 9.0) + "\" y=\"" +
               fmt_px(ty + 4.0) +
               "\" stroke=\"none\" fill=\"#333333\" text-anchor=\"end\">" +
               xml_escape(fmt_tick(yv)) + "</text>\n";
    }
    svg += "</g>\n";

    svg += "<g font-family=\"sans-serif\" font-size=\"14\" "
           "fill=\"#111111\">\n";
    svg += "<text x=\"" + fmt_px((px0 + px1) / 2.0) + "\" y=\"" +
           fmt_px(h - 14.0) + "\" text-anchor=\"middle\">" +
           xml_escape(options.x_label) + "</text>\n";
    svg += "<text x=\"" + fmt_px(18.0) + "\" y=\"" +
           fmt_px((py0 + py1) / 2.0) + "\" text-anchor=\"middle\" " +
           "transform=\"rotate(-90 " + fmt_px(18.0) + " " +
           fmt_px((py0 + py1) / 2.0) + ")\">" + xml_escape(options.y_label) +
           "</text>\n";
    svg += "</g>\n";

    svg += "<g stroke=\"none\">\n";
    for (const ScatterPoint& p : points) {
        svg += "<circle cx=\"" + fmt_px(to_px(p.x)) + "\" cy=\"" +
               fmt_px(to_py(p.y)) + "\" r=\"" +
               fmt_px(options.marker_radius) + "\" fill=\"" +
               fidelity_color(p.fidelity) + "\" fill-opacity=\"0.8\"/>\n";
    }
    svg += "</g>\n";
    svg += "</svg>\n";
    return svg;
}

} // namespace qcl
