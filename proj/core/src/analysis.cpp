#include "qcl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "qcl/errors.hpp"

namespace qcl {

namespace {

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

// Disjoint-set over point indices.
struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (b < a)
            std::swap(a, b);
        parent[b] = a; // smaller index wins, keeps group ids stable
    }
};

} // namespace

std::vector<OverlapGroup>
overlap_counts(const std::vector<std::array<double, 3>>& points,
               const OverlapSpec& spec) {
    if (!(spec.eps_xy > 0.0) || !(spec.eps_f > 0.0))
        throw invalid_argument("OverlapSpec: tolerances must be positive");
    for (const auto& p : points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) ||
            !std::isfinite(p[2]))
            throw invalid_argument("overlap_counts: non-finite input point");

    const std::size_t n = points.size();
    UnionFind uf(n);
    const double exy2 = spec.eps_xy * spec.eps_xy;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = points[i][0] - points[j][0];
            const double dy = points[i][1] - points[j][1];
            if (dx * dx + dy * dy < exy2 &&
                std::abs(points[i][2] - points[j][2]) < spec.eps_f)
                uf.unite(i, j);
        }

    std::map<std::size_t, OverlapGroup> groups; // keyed by root index
    for (std::size_t i = 0; i < n; ++i) {
        OverlapGroup& g = groups[uf.find(i)];
        g.x += points[i][0];
        g.y += points[i][1];
        g.count += 1;
    }
    std::vector<OverlapGroup> out;
    out.reserve(groups.size());
    for (auto& [root, g] : groups) {
        g.x /= static_cast<double>(g.count);
        g.y /= static_cast<double>(g.count);
        out.push_back(g);
    }
    return out;
}

namespace {

// Neighbor lookup on a uniform bucket grid with cell size eps; query
// results come back sorted by index so cluster growth is order-stable.
class NeighborIndex {
public:
    NeighborIndex(const std::vector<std::array<double, 2>>& pts, double eps)
        : pts_(pts), eps_(eps), eps2_(eps * eps) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            cells_[cell_of(pts[i])].push_back(i);
    }

    std::vector<std::size_t> query(std::size_t i) const {
        std::vector<std::size_t> out;
        const auto center = cell_of(pts_[i]);
        for (std::int64_t cx = center.first - 1; cx <= center.first + 1; ++cx)
            for (std::int64_t cy = center.second - 1; cy <= center.second + 1;
                 ++cy) {
                const auto it = cells_.find({cx, cy});
                if (it == cells_.end())
                    continue;
                for (std::size_t j : it->second)
                    if (dist2(pts_[i], pts_[j]) <= eps2_)
                        out.push_back(j);
            }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::pair<std::int64_t, std::int64_t>
    cell_of(const std::array<double, 2>& p) const {
        return {static_cast<std::int64_t>(std::floor(p[0] / eps_)),
                static_cast<std::int64_t>(std::floor(p[1] / eps_))};
    }

    const std::vector<std::array<double, 2>>& pts_;
    double eps_;
    double eps2_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>>
        cells_;
};

constexpr int kUnvisited = -2;

} // namespace

std::vector<int> dbscan(const std::vector<std::array<double, 2>>& points,
                        double eps, int min_pts) {
    if (!(eps > 0.0))
        throw invalid_argument("dbscan: eps must be positive");
    if (min_pts < 1)
        throw invalid_argument("dbscan: min_pts must be >= 1");

    const std::size_t n = points.size();
    std::vector<int> labels(n, kUnvisited);
    if (n == 0)
        return labels;

    const NeighborIndex index(points, eps);
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited)
            continue;
        const auto seed_nb = index.query(i);
        if (seed_nb.size() < static_cast<std::size_t>(min_pts)) {
            labels[i] = kNoise;
            continue;
        }
        labels[i] = cluster;
        std::queue<std::size_t> frontier;
        for (std::size_t j : seed_nb)
            if (j != i)
                frontier.push(j);
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop();
            if (labels[j] == kNoise)
                labels[j] = cluster; // border point adopted by the cluster
            if (labels[j] != kUnvisited)
                continue;
            labels[j] = cluster;
            const auto nb = index.query(j);
            if (nb.size() >= static_cast<std::size_t>(min_pts))
                for (std::size_t k : nb)
                    if (labels[k] == kUnvisited || labels[k] == kNoise)
                        frontier.push(k);
        }
        ++cluster;
    }
    return labels;
}

namespace {

constexpr int kGhost = -1;

struct Tri {
    std::array<int, 3> v;

    bool is_ghost() const {
        return v[0] == kGhost || v[1] == kGhost || v[2] == kGhost;
    }

    // Rotation that puts the ghost vertex last, preserving cyclic order.
    std::array<int, 3> canonical() const {
        std::array<int, 3> t = v;
        while (t[2] != kGhost && (t[0] == kGhost || t[1] == kGhost)) {
            const int first = t[0];
            t[0] = t[1];
            t[1] = t[2];
            t[2] = first;
        }
        return t;
    }
};

using LatticePoint = std::array<long long, 2>;

__int128 orient(const LatticePoint& a, const LatticePoint& b,
                const LatticePoint& c) {
    return static_cast<__int128>(b[0] - a[0]) * (c[1] - a[1]) -
           static_cast<__int128>(b[1] - a[1]) * (c[0] - a[0]);
}

// "Circumcircle contains p" extended to ghost triangles: the region of a
// ghost (u, v, G) is the open half-plane left of u->v, plus the edge line
// itself outside the segment, so hull-collinear insertions stay covered.
// Lattice coordinates fit in 31 bits, so every predicate here is exact:
// the incircle determinant is bounded by 3 * 2^122 < 2^127.
bool in_circumcircle(const Tri& tri, const LatticePoint& p,
                     const std::vector<LatticePoint>& pts) {
    if (tri.is_ghost()) {
        const auto t = tri.canonical();
        const auto& a = pts[static_cast<std::size_t>(t[0])];
        const auto& b = pts[static_cast<std::size_t>(t[1])];
        const __int128 o = orient(a, b, p);
        if (o > 0)
            return true;
        if (o == 0) {
            // Collinear with the hull edge: inside if beyond the segment.
            const __int128 dot =
                static_cast<__int128>(p[0] - a[0]) * (p[0] - b[0]) +
                static_cast<__int128>(p[1] - a[1]) * (p[1] - b[1]);
            return dot > 0;
        }
        return false;
    }

    const auto& a = pts[static_cast<std::size_t>(tri.v[0])];
    const auto& b = pts[static_cast<std::size_t>(tri.v[1])];
    const auto& c = pts[static_cast<std::size_t>(tri.v[2])];
    const long long ax = a[0] - p[0], ay = a[1] - p[1];
    const long long bx = b[0] - p[0], by = b[1] - p[1];
    const long long cx = c[0] - p[0], cy = c[1] - p[1];
    const __int128 a2 =
        static_cast<__int128>(ax) * ax + static_cast<__int128>(ay) * ay;
    const __int128 b2 =
        static_cast<__int128>(bx) * bx + static_cast<__int128>(by) * by;
    const __int128 c2 =
        static_cast<__int128>(cx) * cx + static_cast<__int128>(cy) * cy;
    const __int128 cross =
        static_cast<__int128>(bx) * cy - static_cast<__int128>(by) * cx;
    const __int128 det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) +
                         a2 * cross;
    // Positive for CCW triangles means strictly inside; cocircular points
    // count as outside, which still leaves a valid triangulation of the hull.
    return det > 0;
}

} // namespace

double cluster_area(const std::vector<std::array<double, 2>>& points) {
    if (points.size() < 3)
        return 0.0;

    // Snap onto a 2^30 lattice spanning the bounding box; each point moves
    // by at most half a cell. Integer coordinates make every orientation
    // and incircle test exact, which keeps the incremental triangulation
    // consistent even for clusters dense with near-duplicate points.
    double min_x = points[0][0], max_x = points[0][0];
    double min_y = points[0][1], max_y = points[0][1];
    for (const auto& p : points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    const double span = std::max(max_x - min_x, max_y - min_y);
    if (span <= 0.0 || !std::isfinite(span))
        return 0.0;
    const double cell = span / 1073741824.0; // 2^30

    // Deduplicated lattice points in lexicographic order; the result does
    // not depend on input order.
    std::vector<LatticePoint> pts;
    pts.reserve(points.size());
    for (const auto& p : points)
        pts.push_back({std::llround((p[0] - min_x) / cell),
                       std::llround((p[1] - min_y) / cell)});
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3)
        return 0.0;

    // Seed triangle: the first two points plus the first non-collinear one.
    std::size_t k = 2;
    __int128 o = 0;
    for (; k < n; ++k) {
        o = orient(pts[0], pts[1], pts[k]);
        if (o != 0)
            break;
    }
    if (k == n)
        return 0.0; // all collinear

    std::vector<Tri> tris;
    {
        int i0 = 0, i1 = 1, i2 = static_cast<int>(k);
        if (o < 0)
            std::swap(i1, i2); // make the seed CCW
        tris.push_back({{i0, i1, i2}});
        tris.push_back({{i1, i0, kGhost}});
        tris.push_back({{i2, i1, kGhost}});
        tris.push_back({{i0, i2, kGhost}});
    }

    const auto edge_key = [n](int u, int v) {
        return (static_cast<long long>(u) + 2) *
                   (static_cast<long long>(n) + 2) +
               (static_cast<long long>(v) + 2);
    };
    std::vector<Tri> bad, keep;
    std::vector<std::pair<int, int>> edges;
    std::unordered_set<long long> edge_set;
    for (std::size_t p = 2; p < n; ++p) {
        if (p == k)
            continue;
        bad.clear();
        keep.clear();
        for (const Tri& t : tris) {
            if (in_circumcircle(t, pts[p], pts))
                bad.push_back(t);
            else
                keep.push_back(t);
        }
        if (bad.empty())
            continue;

        // Cavity boundary: directed edges of bad triangles whose reverse
        // is not itself a bad-triangle edge.
        edges.clear();
        edge_set.clear();
        for (const Tri& t : bad) {
            edges.emplace_back(t.v[0], t.v[1]);
            edges.emplace_back(t.v[1], t.v[2]);
            edges.emplace_back(t.v[2], t.v[0]);
        }
        for (const auto& e : edges)
            edge_set.insert(edge_key(e.first, e.second));

        tris = keep;
        const int pi = static_cast<int>(p);
        for (const auto& e : edges)
            if (edge_set.find(edge_key(e.second, e.first)) == edge_set.end())
                tris.push_back({{e.first, e.second, pi}});
    }

    __int128 doubled_area = 0;
    for (const Tri& t : tris) {
        if (t.is_ghost())
            continue;
        const __int128 tri_o = orient(pts[static_cast<std::size_t>(t.v[0])],
                                      pts[static_cast<std::size_t>(t.v[1])],
                                      pts[static_cast<std::size_t>(t.v[2])]);
        doubled_area += tri_o < 0 ? -tri_o : tri_o;
    }
    return 0.5 * cell * cell * static_cast<double>(doubled_area);
}

ClusterReport
cluster_density_index(const std::vector<std::array<double, 2>>& points,
                      double eps, int min_pts) {
    ClusterReport report;
    report.eps = eps;
    report.min_pts = min_pts;
    report.labels = dbscan(points, eps, min_pts);

    int n_clusters = 0;
    for (int label : report.labels)
        n_clusters = std::max(n_clusters, label + 1);
    report.n_clusters = n_clusters;
    if (n_clusters == 0)
        return report;
    report.has_clusters = true;

    std::vector<std::vector<std::array<double, 2>>> clusters(
        static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < points.size(); ++i)
        if (report.labels[i] >= 0)
            clusters[static_cast<std::size_t>(report.labels[i])].push_back(
                points[i]);

    report.areas.resize(clusters.size());
    std::vector<std::array<double, 2>> centroids(clusters.size());
    double d_sum = 0.0;
    std::size_t d_clusters = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& members = clusters[c];
        report.areas[c] = cluster_area(members);

        std::array<double, 2> centroid{0.0, 0.0};
        for (const auto& p : members) {
            centroid[0] += p[0];
            centroid[1] += p[1];
        }
        centroid[0] /= static_cast<double>(members.size());
        centroid[1] /= static_cast<double>(members.size());
        centroids[c] = centroid;

        if (members.size() >= 2) {
            double pair_sum = 0.0;
            for (std::size_t i = 0; i < members.size(); ++i)
                for (std::size_t j = i + 1; j < members.size(); ++j)
                    pair_sum += std::sqrt(dist2(members[i], members[j]));
            const double pairs = static_cast<double>(members.size()) *
                                 static_cast<double>(members.size() - 1) /
                                 2.0;
            d_sum += pair_sum / pairs;
            ++d_clusters;
        }
    }

    report.a_bar = std::accumulate(report.areas.begin(), report.areas.end(),
                                   0.0) /
                   static_cast<double>(clusters.size());

    if (clusters.size() >= 2) {
        double l_sum = 0.0;
        std::size_t l_pairs = 0;
        for (std::size_t i = 0; i < centroids.size(); ++i)
            for (std::size_t j = i + 1; j < centroids.size(); ++j) {
                l_sum += std::sqrt(dist2(centroids[i], centroids[j]));
                ++l_pairs;
            }
        report.l_bar = l_sum / static_cast<double>(l_pairs);
    }

    if (d_clusters > 0) {
        report.d_bar = d_sum / static_cast<double>(d_clusters);
        if (report.d_bar > 0.0) {
            report.cdi = report.a_bar / report.d_bar;
            report.cdi_defined = true;
        }
    }
    return report;
}

} // namespace qcl
