#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qcl/analysis.hpp"
#include "qcl/errors.hpp"
#include "qcl/rng.hpp"

#include "oracles.hpp"

using qcl::OverlapSpec;
using Point = std::array<double, 2>;

namespace {

std::vector<Point> blob(qcl::Rng& rng, double cx, double cy, double spread,
                        int n) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back({cx + spread * rng.normal(), cy + spread * rng.normal()});
    return out;
}

} // namespace

TEST_CASE("overlap groups partition the input") {
    qcl::Rng rng(211);
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 200; ++i)
        pts.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                       rng.uniform01()});
    const auto groups = qcl::overlap_counts(pts, OverlapSpec{});
    std::size_t total = 0;
    for (const auto& g : groups)
        total += g.count;
    CHECK(total == pts.size());
    CHECK(!groups.empty());
}

TEST_CASE("overlap closure chains through intermediate points") {
    OverlapSpec spec;
    spec.eps_xy = 0.02;
    spec.eps_f = 0.01;
    const std::vector<std::array<double, 3>> chain{
        {0.0, 0.0, 0.5}, {0.015, 0.0, 0.5}, {0.030, 0.0, 0.5}};
    const auto groups = qcl::overlap_counts(chain, spec);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].count == 3);
    CHECK(groups[0].x == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(groups[0].y == 0.0);
}

TEST_CASE("overlap tolerances are strict inequalities") {
    OverlapSpec spec;
    spec.eps_xy = 0.5;
    spec.eps_f = 0.25;

    const std::vector<std::array<double, 3>> at_xy{{0.0, 0.0, 0.0},
                                                   {0.5, 0.0, 0.0}};
    CHECK(qcl::overlap_counts(at_xy, spec).size() == 2);

    const std::vector<std::array<double, 3>> at_f{{0.0, 0.0, 0.0},
                                                  {0.0, 0.0, 0.25}};
    CHECK(qcl::overlap_counts(at_f, spec).size() == 2);

    const std::vector<std::array<double, 3>> inside{{0.0, 0.0, 0.0},
                                                    {0.49, 0.0, 0.24}};
    const auto merged = qcl::overlap_counts(inside, spec);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].count == 2);
    CHECK(merged[0].x == doctest::Approx(0.245).epsilon(1e-12));
}

TEST_CASE("overlap groups come back in first-member order") {
    OverlapSpec spec;
    spec.eps_xy = 0.1;
    spec.eps_f = 1.0;
    const std::vector<std::array<double, 3>> pts{
        {5.0, 0.0, 0.0},  // group A, first member index 0
        {0.0, 0.0, 0.0},  // group B
        {5.05, 0.0, 0.0}, // group A again
        {9.0, 0.0, 0.0}}; // group C
    const auto groups = qcl::overlap_counts(pts, spec);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0].count == 2);
    CHECK(groups[0].x == doctest::Approx(5.025).epsilon(1e-12));
    CHECK(groups[1].x == 0.0);
    CHECK(groups[2].x == 9.0);
}

TEST_CASE("overlap validation") {
    OverlapSpec bad;
    bad.eps_xy = 0.0;
    CHECK_THROWS_AS(qcl::overlap_counts({}, bad), qcl::invalid_argument);
    bad = OverlapSpec{};
    bad.eps_f = -1.0;
    CHECK_THROWS_AS(qcl::overlap_counts({}, bad), qcl::invalid_argument);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(qcl::overlap_counts({{inf, 0.0, 0.0}}, OverlapSpec{}),
                    qcl::invalid_argument);
}

TEST_CASE("dbscan separates well-spaced blobs and flags stragglers") {
    qcl::Rng rng(223);
    std::vector<Point> pts = blob(rng, 0.0, 0.0, 0.01, 30);
    const auto second = blob(rng, 1.0, 1.0, 0.01, 30);
    pts.insert(pts.end(), second.begin(), second.end());
    pts.push_back({0.5, 0.5}); // far from both blobs

    const auto labels = qcl::dbscan(pts, 0.1, 4);
    REQUIRE(labels.size() == 61);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(labels[i] == 0);
    for (std::size_t i = 30; i < 60; ++i)
        CHECK(labels[i] == 1);
    CHECK(labels[60] == qcl::kNoise);
}

TEST_CASE("dbscan edge cases and validation") {
    CHECK(qcl::dbscan({}, 0.1, 3).empty());

    const std::vector<Point> lone{{0.0, 0.0}};
    CHECK(qcl::dbscan(lone, 0.1, 2) == std::vector<int>{qcl::kNoise});
    CHECK(qcl::dbscan(lone, 0.1, 1) == std::vector<int>{0});

    CHECK_THROWS_AS(qcl::dbscan(lone, 0.0, 3), qcl::invalid_argument);
    CHECK_THROWS_AS(qcl::dbscan(lone, 0.1, 0), qcl::invalid_argument);
}

TEST_CASE("dbscan matches the quadratic reference on random instances") {
    qcl::Rng rng(227);
    for (int inst = 0; inst < 60; ++inst) {
        std::vector<Point> pts;
        const int blobs = 1 + static_cast<int>(rng.uniform_int(4));
        for (int b = 0; b < blobs; ++b) {
            const auto extra =
                blob(rng, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                     0.02 + 0.05 * rng.uniform01(),
                     10 + static_cast<int>(rng.uniform_int(40)));
            pts.insert(pts.end(), extra.begin(), extra.end());
        }
        for (int i = 0; i < 30; ++i)
            pts.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});

        const double eps = 0.05 + 0.1 * rng.uniform01();
        const int min_pts = 2 + static_cast<int>(rng.uniform_int(6));
        const auto got = qcl::dbscan(pts, eps, min_pts);
        const auto want = oracle::dbscan_reference(pts, eps, min_pts);
        CHECK(oracle::same_clustering(got, want));
    }
}

TEST_CASE("cluster area of simple shapes") {
    CHECK(qcl::cluster_area({}) == 0.0);
    CHECK(qcl::cluster_area({{0.0, 0.0}}) == 0.0);
    CHECK(qcl::cluster_area({{0.0, 0.0}, {1.0, 1.0}}) == 0.0);

    const std::vector<Point> triangle{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    CHECK(qcl::cluster_area(triangle) == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<Point> square{
        {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    CHECK(qcl::cluster_area(square) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<Point> collinear{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0},
                                       {3.0, 3.0}};
    CHECK(qcl::cluster_area(collinear) == 0.0);

    std::vector<Point> with_dups = square;
    with_dups.push_back({0.0, 0.0});
    with_dups.push_back({1.0, 1.0});
    with_dups.push_back({0.5, 0.5}); // interior point
    CHECK(qcl::cluster_area(with_dups) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cluster area equals the hull area on random point sets") {
    qcl::Rng rng(229);
    for (int inst = 0; inst < 40; ++inst) {
        const int n = 3 + static_cast<int>(rng.uniform_int(120));
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            pts.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
        const double got = qcl::cluster_area(pts);
        const double want = oracle::hull_area(pts);
        CHECK(std::abs(got - want) < 1e-6 * std::max(1.0, want));
    }
}

TEST_CASE("cluster area handles filaments dense with near-duplicates") {
    qcl::Rng rng(231);
    std::vector<Point> pts;
    for (int i = 0; i < 400; ++i) {
        const double t = 3.0 * static_cast<double>(i) / 399.0;
        const Point base{t, 0.3 * std::sin(5.0 * t)};
        pts.push_back(base);
        pts.push_back({base[0] + 1e-9 * rng.uniform(-1.0, 1.0),
                       base[1] + 1e-9 * rng.uniform(-1.0, 1.0)});
        if (i % 7 == 0)
            pts.push_back(base);
    }
    const double got = qcl::cluster_area(pts);
    const double want = oracle::hull_area(pts);
    CHECK(std::abs(got - want) < 1e-6 * std::max(1.0, want));
}

TEST_CASE("density report on two separated blobs") {
    qcl::Rng rng(233);
    std::vector<Point> pts = blob(rng, 0.0, 0.0, 0.02, 40);
    const auto second = blob(rng, 2.0, 0.0, 0.02, 40);
    pts.insert(pts.end(), second.begin(), second.end());

    const auto report = qcl::cluster_density_index(pts, 0.15, 4);
    CHECK(report.has_clusters);
    CHECK(report.n_clusters == 2);
    REQUIRE(report.areas.size() == 2);
    CHECK(report.areas[0] > 0.0);
    CHECK(report.areas[1] > 0.0);
    CHECK(report.d_bar > 0.0);
    CHECK(report.l_bar == doctest::Approx(2.0).epsilon(0.05));
    REQUIRE(report.cdi_defined);
    CHECK(report.cdi == doctest::Approx(report.a_bar / report.d_bar)
                            .epsilon(1e-12));
    CHECK(report.eps == 0.15);
    CHECK(report.min_pts == 4);
}

TEST_CASE("density report with no clusters at all") {
    const std::vector<Point> sparse{{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}};
    const auto report = qcl::cluster_density_index(sparse, 0.1, 2);
    CHECK(!report.has_clusters);
    CHECK(report.n_clusters == 0);
    CHECK(!report.cdi_defined);
    CHECK(report.areas.empty());
    CHECK(report.a_bar == 0.0);
    CHECK(report.d_bar == 0.0);
    CHECK(report.l_bar == 0.0);
}

TEST_CASE("coincident points form a cluster with undefined density index") {
    const std::vector<Point> stacked(10, Point{0.3, 0.7});
    const auto report = qcl::cluster_density_index(stacked, 0.1, 3);
    CHECK(report.has_clusters);
    CHECK(report.n_clusters == 1);
    CHECK(report.a_bar == 0.0);
    CHECK(report.d_bar == 0.0);
    CHECK(!report.cdi_defined);
    CHECK(report.l_bar == 0.0);
}

TEST_CASE("a single cluster has no centroid separation") {
    qcl::Rng rng(239);
    const auto pts = blob(rng, 0.0, 0.0, 0.05, 50);
    const auto report = qcl::cluster_density_index(pts, 0.5, 4);
    CHECK(report.n_clusters == 1);
    CHECK(report.l_bar == 0.0);
    CHECK(report.cdi_defined);
}

TEST_CASE("density metrics on the uniform unit square") {
    qcl::Rng rng(241);
    std::vector<Point> pts;
    for (int i = 0; i < 500; ++i)
        pts.push_back({rng.uniform01(), rng.uniform01()});
    const auto report = qcl::cluster_density_index(pts, 0.2, 4);
    REQUIRE(report.has_clusters);
    CHECK(report.n_clusters == 1);
    CHECK(report.areas[0] == doctest::Approx(1.0).epsilon(0.07));
    CHECK(report.d_bar == doctest::Approx(0.5214).epsilon(0.1));
    REQUIRE(report.cdi_defined);
    CHECK(report.cdi == doctest::Approx(1.0 / 0.5214).epsilon(0.15));
}

TEST_CASE("the density index scales linearly with the coordinates") {
    qcl::Rng rng(251);
    std::vector<Point> pts;
    for (int i = 0; i < 300; ++i)
        pts.push_back({rng.uniform01(), rng.uniform01()});

    const double s = 2.0;
    std::vector<Point> scaled;
    scaled.reserve(pts.size());
    for (const auto& p : pts)
        scaled.push_back({s * p[0], s * p[1]});

    const auto base = qcl::cluster_density_index(pts, 0.2, 4);
    const auto big = qcl::cluster_density_index(scaled, s * 0.2, 4);
    REQUIRE(base.cdi_defined);
    REQUIRE(big.cdi_defined);
    CHECK(big.labels == base.labels);
    CHECK(big.d_bar == s * base.d_bar);
    CHECK(big.l_bar == s * base.l_bar);
    CHECK(big.a_bar == s * s * base.a_bar);
    CHECK(big.cdi == s * base.cdi);
}
