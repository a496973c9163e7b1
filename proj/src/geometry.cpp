#include "edo/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <gmpxx.h>

namespace edo {

double polygon_area(std::span<const Point2> loop) {
    double twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = loop[i];
        const Point2& q = loop[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return std::abs(twice) / 2.0;
}

namespace {

int sign(double v) { return v > 0 ? 1 : v < 0 ? -1 : 0; }

// Filter thresholds are deliberately loose; a borderline determinant just
// falls through to the exact rational evaluation.
constexpr double kOrientRelEps = 1e-13;
constexpr double kIncircleRelEps = 1e-12;
constexpr double kAbsGuard = 1e-280;  // catches underflowing products

int orient2d_exact(const Point2& a, const Point2& b, const Point2& c) {
    const mpq_class ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    const mpq_class det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
    return sgn(det);
}

int incircle_exact(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const mpq_class adx = mpq_class(a.x) - mpq_class(d.x), ady = mpq_class(a.y) - mpq_class(d.y);
    const mpq_class bdx = mpq_class(b.x) - mpq_class(d.x), bdy = mpq_class(b.y) - mpq_class(d.y);
    const mpq_class cdx = mpq_class(c.x) - mpq_class(d.x), cdy = mpq_class(c.y) - mpq_class(d.y);
    const mpq_class ad2 = adx * adx + ady * ady;
    const mpq_class bd2 = bdx * bdx + bdy * bdy;
    const mpq_class cd2 = cdx * cdx + cdy * cdy;
    const mpq_class det =
        adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) + ad2 * (bdx * cdy - cdx * bdy);
    return sgn(det);
}

}  // namespace

int orient2d_sign(const Point2& a, const Point2& b, const Point2& c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    const double magnitude = std::abs(detleft) + std::abs(detright);
    if (std::abs(det) > magnitude * kOrientRelEps + kAbsGuard) return sign(det);
    return orient2d_exact(a, b, c);
}

int incircle_sign(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    const double det =
        adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) + ad2 * (bdx * cdy - cdx * bdy);
    const double magnitude = std::abs(adx) * (std::abs(bdy) * cd2 + std::abs(cdy) * bd2) +
                             std::abs(ady) * (std::abs(bdx) * cd2 + std::abs(cdx) * bd2) +
                             ad2 * (std::abs(bdx) * std::abs(cdy) + std::abs(cdx) * std::abs(bdy));
    if (std::abs(det) > magnitude * kIncircleRelEps + kAbsGuard) return sign(det);
    return incircle_exact(a, b, c, d);
}

namespace {

bool lex_less(const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

std::vector<Point2> distinct_sorted(std::span<const Point2> points) {
    std::vector<Point2> out(points.begin(), points.end());
    std::sort(out.begin(), out.end(), lex_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Incremental triangulation: points are inserted in lexicographic order, so
// every new point lies strictly outside the current hull and attaches to the
// strictly visible hull edges. Lawson flips then restore the Delaunay
// property.
class Triangulator {
public:
    explicit Triangulator(std::vector<Point2> pts) : pts_(std::move(pts)) {}

    Triangulation build() {
        Triangulation result;
        result.points = pts_;
        const std::size_t n = pts_.size();
        if (n < 3) {
            result.degenerate = true;
            return result;
        }
        // Collinear prefix: the first triangle needs the first off-line point.
        std::size_t apex = 2;
        while (apex < n && orient2d_sign(pts_[0], pts_[1], pts_[apex]) == 0) ++apex;
        if (apex == n) {
            result.degenerate = true;
            return result;
        }
        seed(apex);
        for (std::size_t i = apex + 1; i < n; ++i) insert(static_cast<int>(i));
        legalise_all();

        for (std::size_t t = 0; t < tris_.size(); ++t)
            if (alive_[t]) result.triangles.push_back(tris_[t]);
        return result;
    }

private:
    using Edge = std::pair<int, int>;
    struct Slot {
        int first = -1;
        int second = -1;
    };
    static Edge key(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

    const Point2& at(int i) const { return pts_[i]; }

    int add_tri(int a, int b, int c) {
        assert(orient2d_sign(at(a), at(b), at(c)) > 0);
        const int id = static_cast<int>(tris_.size());
        tris_.push_back({a, b, c});
        alive_.push_back(true);
        attach(id);
        return id;
    }

    void attach(int id) {
        const auto& t = tris_[id];
        for (int e = 0; e < 3; ++e) {
            auto& slot = edges_[key(t[e], t[(e + 1) % 3])];
            if (slot.first < 0)
                slot.first = id;
            else {
                assert(slot.second < 0);
                slot.second = id;
            }
        }
    }

    void detach(int id) {
        const auto& t = tris_[id];
        for (int e = 0; e < 3; ++e) {
            auto& slot = edges_[key(t[e], t[(e + 1) % 3])];
            if (slot.first == id) {
                slot.first = slot.second;
                slot.second = -1;
            } else {
                assert(slot.second == id);
                slot.second = -1;
            }
        }
        alive_[id] = false;
    }

    void seed(std::size_t apex) {
        const int m = static_cast<int>(apex);
        // Fan from the apex over the collinear prefix.
        const bool left = orient2d_sign(at(0), at(m - 1 == 0 ? 1 : m - 1), at(m)) > 0;
        for (int i = 0; i + 1 < m; ++i) {
            if (left)
                add_tri(i, i + 1, m);
            else
                add_tri(i + 1, i, m);
        }
        hull_.clear();
        if (left) {
            for (int i = 0; i <= m - 1; ++i) hull_.push_back(i);
            hull_.push_back(m);
        } else {
            for (int i = m - 1; i >= 0; --i) hull_.push_back(i);
            hull_.push_back(m);
        }
    }

    void insert(int p) {
        const std::size_t h = hull_.size();
        std::vector<bool> visible(h);
        for (std::size_t e = 0; e < h; ++e)
            visible[e] = orient2d_sign(at(hull_[e]), at(hull_[(e + 1) % h]), at(p)) < 0;

        // The visible edges form one contiguous arc of the hull.
        std::size_t first = h;
        for (std::size_t e = 0; e < h; ++e)
            if (visible[e] && !visible[(e + h - 1) % h]) {
                first = e;
                break;
            }
        assert(first < h && "sorted insertion point must see the hull");
        std::size_t count = 0;
        while (count < h && visible[(first + count) % h]) ++count;

        for (std::size_t k = 0; k < count; ++k) {
            const int a = hull_[(first + k) % h];
            const int b = hull_[(first + k + 1) % h];
            add_tri(b, a, p);
        }
        // Replace the arc's interior vertices with p.
        std::vector<int> next_hull;
        next_hull.reserve(h - count + 2);
        const std::size_t start = (first + count) % h;  // first invisible edge start
        for (std::size_t k = 0; k <= h - count; ++k) next_hull.push_back(hull_[(start + k) % h]);
        next_hull.push_back(p);
        hull_ = std::move(next_hull);
    }

    // Lawson: flip every edge whose opposite vertex falls strictly inside the
    // neighbouring triangle's circumcircle, until none remains.
    void legalise_all() {
        std::deque<Edge> queue;
        for (const auto& [e, _] : edges_) queue.push_back(e);
        std::size_t steps = 0;
        const std::size_t cap = 64 * (edges_.size() + 1) * (edges_.size() + 1);
        while (!queue.empty()) {
            if (++steps > cap) throw std::logic_error("delaunay: flip loop failed to terminate");
            const Edge e = queue.front();
            queue.pop_front();
            auto it = edges_.find(e);
            if (it == edges_.end()) continue;
            const int t1 = it->second.first;
            const int t2 = it->second.second;
            if (t1 < 0 || t2 < 0) continue;  // hull edge

            const int u = e.first, v = e.second;
            const int p = opposite(t1, u, v);
            const int q = opposite(t2, u, v);
            if (incircle_sign(at(tris_[t1][0]), at(tris_[t1][1]), at(tris_[t1][2]), at(q)) <= 0)
                continue;

            detach(t1);
            detach(t2);
            // New diagonal p-q; orientations follow from the old CCW triangles.
            if (orient2d_sign(at(p), at(u), at(q)) > 0)
                add_tri(p, u, q);
            else
                add_tri(u, p, q);
            if (orient2d_sign(at(p), at(q), at(v)) > 0)
                add_tri(p, q, v);
            else
                add_tri(q, p, v);
            for (const Edge& side : {key(u, p), key(u, q), key(v, p), key(v, q)}) queue.push_back(side);
        }
        // Drop stale map entries (no live triangle on either side).
        for (auto it = edges_.begin(); it != edges_.end();)
            it = (it->second.first < 0) ? edges_.erase(it) : ++it;
    }

    int opposite(int tri, int u, int v) const {
        for (const int w : tris_[tri])
            if (w != u && w != v) return w;
        throw std::logic_error("delaunay: degenerate adjacency");
    }

    std::vector<Point2> pts_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<bool> alive_;
    std::map<Edge, Slot> edges_{};
    std::vector<int> hull_;
};

struct EdgeSlot {
    int first = -1;
    int second = -1;
};

double triangle_area(const Point2& a, const Point2& b, const Point2& c) {
    return std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2.0;
}

double circumradius_sq(const Point2& a, const Point2& b, const Point2& c) {
    const double d1 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    const double d2 = (c.x - b.x) * (c.x - b.x) + (c.y - b.y) * (c.y - b.y);
    const double d3 = (a.x - c.x) * (a.x - c.x) + (a.y - c.y) * (a.y - c.y);
    const double twice_area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (d1 * d2 * d3) / (4.0 * twice_area * twice_area);
}

Polygon degenerate_polygon(std::span<const Point2> points) {
    const auto distinct = distinct_sorted(points);
    Polygon poly;
    if (distinct.empty()) return poly;
    poly.vertices.push_back(distinct.front());
    if (distinct.size() > 1) poly.vertices.push_back(distinct.back());
    poly.area = 0.0;
    return poly;
}

// The kept-triangle region of a filtered triangulation: connected components
// (triangles sharing an edge), their areas, boundary loops and point cover.
struct Region {
    std::vector<Polygon> polygons;  // one per component
    bool single_component = false;
    bool covers_all_points = false;
};

Region trace_region(const Triangulation& tri, const std::vector<bool>& kept) {
    Region region;
    const auto& tris = tri.triangles;
    const std::size_t n_tris = tris.size();

    std::map<std::pair<int, int>, EdgeSlot> edge_tris;
    auto key = [](int u, int v) { return std::make_pair(std::min(u, v), std::max(u, v)); };
    for (std::size_t t = 0; t < n_tris; ++t) {
        if (!kept[t]) continue;
        for (int e = 0; e < 3; ++e) {
            auto& slot = edge_tris[key(tris[t][e], tris[t][(e + 1) % 3])];
            (slot.first < 0 ? slot.first : slot.second) = static_cast<int>(t);
        }
    }

    // Union-find over kept triangles via shared edges.
    std::vector<int> parent(n_tris);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& [e, slot] : edge_tris)
        if (slot.second >= 0) parent[find(slot.first)] = find(slot.second);

    std::map<int, double> component_area;
    std::vector<bool> covered(tri.points.size(), false);
    for (std::size_t t = 0; t < n_tris; ++t) {
        if (!kept[t]) continue;
        component_area[find(static_cast<int>(t))] +=
            triangle_area(tri.points[tris[t][0]], tri.points[tris[t][1]], tri.points[tris[t][2]]);
        for (const int v : tris[t]) covered[v] = true;
    }

    region.single_component = component_area.size() == 1;
    region.covers_all_points = std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });

    // Boundary loops: directed edges with the kept triangle on the left.
    std::map<int, std::vector<std::pair<int, int>>> outgoing;  // tail -> (head, component)
    for (std::size_t t = 0; t < n_tris; ++t) {
        if (!kept[t]) continue;
        for (int e = 0; e < 3; ++e) {
            const int u = tris[t][e], v = tris[t][(e + 1) % 3];
            const auto& slot = edge_tris.at(key(u, v));
            if (slot.second < 0) outgoing[u].push_back({v, find(static_cast<int>(t))});
        }
    }
    std::map<int, std::vector<std::vector<Point2>>> loops_by_component;
    std::map<std::pair<int, int>, bool> used;
    for (auto& [tail, outs] : outgoing)
        for (auto& [head, comp] : outs) {
            if (used[{tail, head}]) continue;
            std::vector<Point2> loop;
            int u = tail, v = head;
            while (!used[{u, v}]) {
                used[{u, v}] = true;
                loop.push_back(tri.points[u]);
                // Successor boundary edge out of v; pinch vertices take the
                // tightest left turn so the region stays on the left.
                const auto& candidates = outgoing.at(v);
                int next = -1;
                double best_angle = std::numeric_limits<double>::infinity();
                const double in_angle =
                    std::atan2(tri.points[u].y - tri.points[v].y, tri.points[u].x - tri.points[v].x);
                for (const auto& [w, wc] : candidates) {
                    if (used[{v, w}]) continue;
                    double turn = std::atan2(tri.points[w].y - tri.points[v].y,
                                             tri.points[w].x - tri.points[v].x) -
                                  in_angle;
                    while (turn <= 0) turn += 2 * M_PI;
                    while (turn > 2 * M_PI) turn -= 2 * M_PI;
                    if (turn < best_angle) {
                        best_angle = turn;
                        next = w;
                    }
                }
                if (next < 0) break;
                u = v;
                v = next;
            }
            loops_by_component[comp].push_back(std::move(loop));
        }

    for (auto& [comp, loops] : loops_by_component) {
        // The outer loop has the largest shoelace area; holes are interior.
        auto outer = std::max_element(loops.begin(), loops.end(), [](const auto& a, const auto& b) {
            return polygon_area(a) < polygon_area(b);
        });
        Polygon poly;
        poly.vertices = std::move(*outer);
        poly.area = component_area.at(comp);
        region.polygons.push_back(std::move(poly));
    }
    return region;
}

std::vector<bool> keep_mask(const Triangulation& tri, double cutoff_r2) {
    std::vector<bool> kept(tri.triangles.size());
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t];
        kept[t] = circumradius_sq(tri.points[v[0]], tri.points[v[1]], tri.points[v[2]]) <= cutoff_r2;
    }
    return kept;
}

}  // namespace

Triangulation delaunay(std::span<const Point2> points) {
    return Triangulator(distinct_sorted(points)).build();
}

Polygon convex_hull(std::span<const Point2> points) {
    if (points.empty()) throw std::invalid_argument("convex_hull: needs at least one point");
    const auto pts = distinct_sorted(points);
    const std::size_t n = pts.size();
    if (n <= 2) return degenerate_polygon(points);

    // Monotone chain; collinear points are dropped (strict turns only).
    std::vector<Point2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && orient2d_sign(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && orient2d_sign(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) return degenerate_polygon(points);

    Polygon poly;
    poly.vertices = std::move(hull);
    poly.area = polygon_area(poly.vertices);
    return poly;
}

std::vector<Polygon> alpha_shape(std::span<const Point2> points, double alpha) {
    const Triangulation tri = delaunay(points);
    if (tri.degenerate) return {degenerate_polygon(points)};
    const double cutoff =
        alpha <= 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (alpha * alpha);
    Region region = trace_region(tri, keep_mask(tri, cutoff));
    return std::move(region.polygons);
}

ConcaveHull smallest_single_polygon_alpha(std::span<const Point2> points) {
    const Triangulation tri = delaunay(points);
    if (tri.degenerate) return {0.0, convex_hull(points), true};

    std::vector<double> thresholds;
    thresholds.reserve(tri.triangles.size());
    for (const auto& v : tri.triangles)
        thresholds.push_back(circumradius_sq(tri.points[v[0]], tri.points[v[1]], tri.points[v[2]]));
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    auto single_polygon = [&](double r2) {
        const Region region = trace_region(tri, keep_mask(tri, r2));
        return region.single_component && region.covers_all_points;
    };

    // The full triangulation (largest threshold) is always a single polygon
    // over all points, so the search invariant holds at the upper end.
    std::size_t lo = 0, hi = thresholds.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (single_polygon(thresholds[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }

    Region region = trace_region(tri, keep_mask(tri, thresholds[lo]));
    return {1.0 / std::sqrt(thresholds[lo]), std::move(region.polygons.front()), false};
}

double convexity(std::span<const Point2> points) {
    const Polygon hull = convex_hull(points);
    if (hull.area <= 0.0) return 1.0;  // single point or line: perfectly convex
    const ConcaveHull concave = smallest_single_polygon_alpha(points);
    return std::clamp(concave.hull.area / hull.area, 0.0, 1.0);
}

}  // namespace edo
