#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qcl/errors.hpp"
#include "qcl/landscape.hpp"
#include "qcl/qdyn.hpp"

using qcl::GridSpec;
using qcl::LandscapePoint;

TEST_CASE("axis values span the grid inclusively") {
    GridSpec spec;
    spec.points_per_axis = 5;
    const auto axis = qcl::axis_values(spec);
    REQUIRE(axis.size() == 5);
    CHECK(axis.front() == -1.0);
    CHECK(axis.back() == 1.0);
}

TEST_CASE("grid spec validation") {
    GridSpec spec;
    spec.points_per_axis = 1;
    CHECK_THROWS_AS(qcl::generate_grid(spec, qcl::kDefaultTotalTime),
                    qcl::invalid_argument);
    spec.points_per_axis = 2;
    spec.n_params = 0;
    CHECK_THROWS_AS(qcl::generate_grid(spec, qcl::kDefaultTotalTime),
                    qcl::invalid_argument);
    spec.n_params = 1;
    spec.lo = 1.0;
    spec.hi = -1.0;
    CHECK_THROWS_AS(qcl::generate_grid(spec, qcl::kDefaultTotalTime),
                    qcl::invalid_argument);
    spec.lo = -1.0;
    spec.hi = 1.0;
    CHECK_THROWS_AS(qcl::generate_grid(spec, 0.0), qcl::invalid_argument);
}

TEST_CASE("one-dimensional grid enumerates the axis") {
    GridSpec spec;
    spec.n_params = 1;
    spec.points_per_axis = 3;
    const auto points = qcl::generate_grid(spec, qcl::kDefaultTotalTime);
    REQUIRE(points.size() == 3);
    CHECK(points[0].amplitudes == std::vector<double>{-1.0});
    CHECK(points[1].amplitudes == std::vector<double>{0.0});
    CHECK(points[2].amplitudes == std::vector<double>{1.0});
    for (const auto& p : points) {
        qcl::ControlPulse pulse;
        pulse.amplitudes = p.amplitudes;
        CHECK(p.fidelity == qcl::pulse_fidelity(pulse));
    }
}

TEST_CASE("last axis varies fastest") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 2;
    const auto points = qcl::generate_grid(spec, qcl::kDefaultTotalTime);
    REQUIRE(points.size() == 4);
    CHECK(points[0].amplitudes == std::vector<double>{-1.0, -1.0});
    CHECK(points[1].amplitudes == std::vector<double>{-1.0, 1.0});
    CHECK(points[2].amplitudes == std::vector<double>{1.0, -1.0});
    CHECK(points[3].amplitudes == std::vector<double>{1.0, 1.0});
}

TEST_CASE("streaming and materialized grids agree") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 7;
    const auto points = qcl::generate_grid(spec, 4.0);
    std::size_t i = 0;
    qcl::generate_grid(spec, 4.0, [&](const LandscapePoint& p) {
        REQUIRE(i < points.size());
        CHECK(p.amplitudes == points[i].amplitudes);
        CHECK(p.fidelity == points[i].fidelity);
        ++i;
    });
    CHECK(i == points.size());
}

TEST_CASE("total point count and overflow guard") {
    GridSpec spec;
    spec.n_params = 3;
    spec.points_per_axis = 10;
    CHECK(spec.total_points() == 1000);

    spec.n_params = 8;
    spec.points_per_axis = 1000000;
    CHECK_THROWS_AS(spec.total_points(), qcl::invalid_argument);
}

TEST_CASE("materialized overload refuses oversized grids") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 5000;
    CHECK(spec.total_points() > qcl::kMaxInMemoryPoints);
    CHECK_THROWS_AS(qcl::generate_grid(spec, qcl::kDefaultTotalTime),
                    qcl::invalid_argument);
}

TEST_CASE("streaming filter forwards only strict exceedances") {
    std::vector<LandscapePoint> seen;
    auto sink = qcl::filter_high_fidelity(
        0.5, [&](const LandscapePoint& p) { seen.push_back(p); });
    LandscapePoint p;
    p.fidelity = 0.5;
    sink(p);
    CHECK(seen.empty());
    p.fidelity = 0.5000001;
    sink(p);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].fidelity == 0.5000001);
    CHECK_THROWS_AS(qcl::filter_high_fidelity(1.5, [](const LandscapePoint&) {}),
                    qcl::invalid_argument);
}

TEST_CASE("high fidelity filter keeps exactly the strict exceedances") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 30;
    const auto points = qcl::generate_grid(spec, qcl::kDefaultTotalTime);

    const auto all = qcl::filter_high_fidelity(points, 0.0);
    std::size_t zero_count = 0;
    for (const auto& p : points)
        if (p.fidelity > 0.0)
            ++zero_count;
    CHECK(all.size() == zero_count);

    CHECK(qcl::filter_high_fidelity(points, 1.0).empty());

    const auto high = qcl::filter_high_fidelity(points, 0.95);
    std::size_t expected = 0;
    for (const auto& p : points)
        if (p.fidelity > 0.95)
            ++expected;
    CHECK(!high.empty());
    CHECK(high.size() < points.size());
    CHECK(high.size() == expected);
    for (const auto& p : high)
        CHECK(p.fidelity > 0.95);

    CHECK_THROWS_AS(qcl::filter_high_fidelity(points, -0.1),
                    qcl::invalid_argument);
    CHECK_THROWS_AS(qcl::filter_high_fidelity(points, 1.1),
                    qcl::invalid_argument);
}

TEST_CASE("reference landscape numbers at the working duration") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 100;
    double max_f = 0.0;
    long long above = 0;
    long long count = 0;
    qcl::generate_grid(spec, qcl::kDefaultTotalTime,
                       [&](const LandscapePoint& p) {
                           max_f = std::max(max_f, p.fidelity);
                           if (p.fidelity > 0.95)
                               ++above;
                           ++count;
                       });
    CHECK(count == 10000);
    CHECK(std::abs(max_f - 0.9988787158910348) < 1e-12);
    CHECK(above == 638);
}

TEST_CASE("odd grid resolves the near-perfect ridge") {
    GridSpec spec;
    spec.n_params = 2;
    spec.points_per_axis = 101;
    double max_f = 0.0;
    std::vector<double> best;
    qcl::generate_grid(spec, qcl::kDefaultTotalTime,
                       [&](const LandscapePoint& p) {
                           if (p.fidelity > max_f) {
                               max_f = p.fidelity;
                               best = p.amplitudes;
                           }
                       });
    CHECK(std::abs(max_f - 0.9999937811578712) < 1e-12);
    REQUIRE(best.size() == 2);
    CHECK(best[0] == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(best[1] == doctest::Approx(0.2).epsilon(1e-12));
}
