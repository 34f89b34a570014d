#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qcl/qdyn.hpp"

namespace qcl {

struct GridSpec {
    int n_params = 2;
    int points_per_axis = 100;
    double lo = -1.0;
    double hi = 1.0;

    // Gridpoint count G^N, guarded against overflow.
    std::uint64_t total_points() const;
};

struct LandscapePoint {
    std::vector<double> amplitudes;
    double fidelity = 0.0;
    std::optional<std::array<double, 2>> pca_xy;
};

std::vector<double> axis_values(const GridSpec& spec);

// Walks the full grid in row-major order (last axis fastest) and hands
// every point to `sink`. The LandscapePoint passed to the sink reuses an
// internal buffer and is only valid for the duration of the call; copy it
// if you need to keep it.
void generate_grid(const GridSpec& spec, double T,
                   const std::function<void(const LandscapePoint&)>& sink);

// Materialized variant for grids that fit in memory. Refuses grids above
// the budget and points the caller at the streaming overload instead.
std::vector<LandscapePoint> generate_grid(const GridSpec& spec, double T);

inline constexpr std::uint64_t kMaxInMemoryPoints = 1u << 24;

// Wraps a sink so it only sees points with fidelity strictly above the
// threshold.
std::function<void(const LandscapePoint&)>
filter_high_fidelity(double threshold,
                     std::function<void(const LandscapePoint&)> sink);

std::vector<LandscapePoint>
filter_high_fidelity(const std::vector<LandscapePoint>& points,
                     double threshold);

} // namespace qcl
