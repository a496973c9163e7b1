#pragma once

#include <array>
#include <span>
#include <vector>

namespace edo {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// A traced boundary loop. `vertices` is the outer loop; `area` is the area
/// of the region the loop bounds (holes subtracted for alpha-shape
/// components, so it can be smaller than the shoelace area of the loop).
struct Polygon {
    std::vector<Point2> vertices;
    double area = 0.0;
};

/// Shoelace area of a closed loop (absolute value).
double polygon_area(std::span<const Point2> loop);

/// Sign of the orientation of (a, b, c): +1 left turn (CCW), -1 right turn,
/// 0 collinear. Exact: a floating-point filter backed by rational arithmetic.
int orient2d_sign(const Point2& a, const Point2& b, const Point2& c);

/// Sign of the in-circle determinant: for CCW (a, b, c), +1 when d lies
/// strictly inside their circumcircle, -1 outside, 0 cocircular. Exact.
int incircle_sign(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// Delaunay triangulation of the distinct input points (incremental
/// insertion + Lawson flips with exact predicates). `degenerate` is set when
/// fewer than 3 distinct points exist or all are collinear.
struct Triangulation {
    std::vector<Point2> points;                // distinct points, sorted
    std::vector<std::array<int, 3>> triangles; // CCW vertex indices
    bool degenerate = false;
};
Triangulation delaunay(std::span<const Point2> points);

/// Minimal convex polygon containing all points (CCW, strictly convex
/// vertices). Degenerate inputs yield a polygon of area 0.
Polygon convex_hull(std::span<const Point2> points);

/// Alpha shape: Delaunay triangles with circumradius <= 1/alpha, traced into
/// boundary polygons (one per edge-connected component). alpha <= 0 keeps
/// every triangle (the convex hull). Degenerate input yields one degenerate
/// polygon of area 0.
std::vector<Polygon> alpha_shape(std::span<const Point2> points, double alpha);

/// The concave hull: the most concave alpha shape that is still a single
/// polygon containing every point. Found by binary search over the sorted
/// triangle circumradii; `alpha` is the reciprocal of the chosen cutoff, so
/// alpha_shape(points, alpha) reproduces `hull`.
struct ConcaveHull {
    double alpha = 0.0;
    Polygon hull;
    bool degenerate = false;
};
ConcaveHull smallest_single_polygon_alpha(std::span<const Point2> points);

/// Convexity ratio area(concave hull) / area(convex hull), in [0, 1].
/// Degenerate clusters (a single point or a line) count as perfectly convex.
double convexity(std::span<const Point2> points);

}  // namespace edo
