#include "qcl/landscape.hpp"

#include <cmath>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

void validate(const GridSpec& spec) {
    if (spec.n_params < 1)
        throw invalid_argument("GridSpec: n_params must be >= 1");
    if (spec.points_per_axis < 2)
        throw invalid_argument("GridSpec: points_per_axis must be >= 2");
    if (!(spec.lo < spec.hi))
        throw invalid_argument("GridSpec: lo must be below hi");
}

} // namespace

std::uint64_t GridSpec::total_points() const {
    std::uint64_t total = 1;
    for (int d = 0; d < n_params; ++d) {
        const std::uint64_t g = static_cast<std::uint64_t>(points_per_axis);
        if (total > UINT64_MAX / g)
            throw invalid_argument("GridSpec: grid size overflows");
        total *= g;
    }
    return total;
}

std::vector<double> axis_values(const GridSpec& spec) {
    validate(spec);
    return linspace(spec.lo, spec.hi, spec.points_per_axis);
}

void generate_grid(const GridSpec& spec, double T,
                   const std::function<void(const LandscapePoint&)>& sink) {
    validate(spec);
    if (!(T > 0.0) || !std::isfinite(T))
        throw invalid_argument("generate_grid: T must be positive");

    const int n = spec.n_params;
    const int g = spec.points_per_axis;
    const std::vector<double> values = axis_values(spec);
    const double dt = T / static_cast<double>(n);

    // One propagator per grid value, shared across axes.
    std::vector<Unitary2> props;
    props.reserve(values.size());
    for (double a : values)
        props.push_back(segment_propagator(a, dt));

    // Depth-first walk keeping the partial evolution for each prefix, so
    // each point costs one matrix application instead of n.
    std::vector<QubitState> partial(static_cast<std::size_t>(n) + 1);
    partial[0] = ground_state();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);

    LandscapePoint point;
    point.amplitudes.resize(static_cast<std::size_t>(n));

    const QubitState target = excited_state();
    int depth = 0;
    while (depth >= 0) {
        if (idx[static_cast<std::size_t>(depth)] == g) {
            idx[static_cast<std::size_t>(depth)] = 0;
            --depth;
            if (depth >= 0)
                ++idx[static_cast<std::size_t>(depth)];
            continue;
        }
        const int i = idx[static_cast<std::size_t>(depth)];
        partial[static_cast<std::size_t>(depth) + 1] =
            props[static_cast<std::size_t>(i)].apply(
                partial[static_cast<std::size_t>(depth)]);
        point.amplitudes[static_cast<std::size_t>(depth)] =
            values[static_cast<std::size_t>(i)];
        if (depth == n - 1) {
            point.fidelity =
                fidelity(partial[static_cast<std::size_t>(n)], target);
            sink(point);
            ++idx[static_cast<std::size_t>(depth)];
        } else {
            ++depth;
        }
    }
}

std::vector<LandscapePoint> generate_grid(const GridSpec& spec, double T) {
    if (spec.total_points() > kMaxInMemoryPoints)
        throw invalid_argument(
            "generate_grid: grid exceeds the in-memory budget; use the "
            "streaming overload with a sink");
    std::vector<LandscapePoint> out;
    out.reserve(spec.total_points());
    generate_grid(spec, T,
                  [&out](const LandscapePoint& p) { out.push_back(p); });
    return out;
}

std::function<void(const LandscapePoint&)>
filter_high_fidelity(double threshold,
                     std::function<void(const LandscapePoint&)> sink) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw invalid_argument("filter_high_fidelity: threshold outside [0,1]");
    return [threshold, sink = std::move(sink)](const LandscapePoint& p) {
        if (p.fidelity > threshold)
            sink(p);
    };
}

std::vector<LandscapePoint>
filter_high_fidelity(const std::vector<LandscapePoint>& points,
                     double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw invalid_argument("filter_high_fidelity: threshold outside [0,1]");
    std::vector<LandscapePoint> out;
    for (const auto& p : points)
        if (p.fidelity > threshold)
            out.push_back(p);
    return out;
}

} // namespace qcl
