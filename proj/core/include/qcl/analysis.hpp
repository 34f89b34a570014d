#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace qcl {

struct OverlapSpec {
    double eps_xy = 0.02;
    double eps_f = 0.01;
};

struct OverlapGroup {
    double x = 0.0; // group centroid
    double y = 0.0;
    std::size_t count = 0;
};

// Partitions (x, y, fidelity) points by the transitive closure of
// "xy-distance < eps_xy and |dF| < eps_f" and reports each group's
// centroid and size. Groups are ordered by their smallest member index.
std::vector<OverlapGroup>
overlap_counts(const std::vector<std::array<double, 3>>& points,
               const OverlapSpec& spec);

inline constexpr int kNoise = -1;

// Classic density-based clustering. A point is core when it has at least
// min_pts neighbors within eps (itself included); clusters grow by
// density reachability, scanning points in index order, so labels are
// deterministic for a given input order.
std::vector<int> dbscan(const std::vector<std::array<double, 2>>& points,
                        double eps, int min_pts);

// Area of the cluster's footprint: Delaunay triangulation (Bowyer-Watson
// with a ghost vertex) summed over triangles, which equals the convex
// hull area. Fewer than 3 distinct points, or all collinear, gives 0.
double cluster_area(const std::vector<std::array<double, 2>>& points);

struct ClusterReport {
    std::vector<int> labels;
    std::vector<double> areas; // indexed by cluster id
    int n_clusters = 0;
    double a_bar = 0.0; // mean cluster area, degenerate clusters count 0
    double d_bar = 0.0; // mean of per-cluster mean pairwise distance
    double l_bar = 0.0; // mean pairwise centroid distance
    double cdi = 0.0;   // a_bar / d_bar
    bool has_clusters = false;
    // False when every cluster is a singleton (d_bar would be 0/0).
    bool cdi_defined = false;
    double eps = 0.0;
    int min_pts = 0;
};

// DBSCAN plus the density metrics. Clusters of one point contribute to
// a_bar only; clusters of >= 2 points also enter d_bar. No clusters at
// all yields has_clusters=false rather than an error.
ClusterReport
cluster_density_index(const std::vector<std::array<double, 2>>& points,
                      double eps, int min_pts);

} // namespace qcl
