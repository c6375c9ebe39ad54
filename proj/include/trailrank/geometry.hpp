#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace trailrank {

/// Planar projected coordinate in metres.
struct Point2D {
    double easting = 0.0;
    double northing = 0.0;

    friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline double distance(Point2D a, Point2D b) noexcept {
    return std::hypot(b.easting - a.easting, b.northing - a.northing);
}

inline bool is_finite(Point2D p) noexcept {
    return std::isfinite(p.easting) && std::isfinite(p.northing);
}

struct BBox {
    double min_e = std::numeric_limits<double>::infinity();
    double min_n = std::numeric_limits<double>::infinity();
    double max_e = -std::numeric_limits<double>::infinity();
    double max_n = -std::numeric_limits<double>::infinity();

    void expand(Point2D p) noexcept {
        min_e = std::min(min_e, p.easting);
        min_n = std::min(min_n, p.northing);
        max_e = std::max(max_e, p.easting);
        max_n = std::max(max_n, p.northing);
    }

    BBox inflated(double d) const noexcept { return {min_e - d, min_n - d, max_e + d, max_n + d}; }

    bool contains(Point2D p) const noexcept {
        return p.easting >= min_e && p.easting <= max_e && p.northing >= min_n &&
               p.northing <= max_n;
    }

    bool empty() const noexcept { return min_e > max_e; }
};

BBox bbox_of(std::span<const Point2D> points) noexcept;

double distance_to_segment_sq(Point2D p, Point2D a, Point2D b) noexcept;
double distance_to_segment(Point2D p, Point2D a, Point2D b) noexcept;

/// Minimum distance from p to an open or closed polyline; +inf for an empty span.
double distance_to_polyline(Point2D p, std::span<const Point2D> line) noexcept;

/// Even-odd test against a closed ring (first point == last point).
/// Points exactly on the boundary are reported as inside.
bool point_in_ring(Point2D p, std::span<const Point2D> ring) noexcept;

/// Proper or touching intersection between segments ab and cd.
bool segments_intersect(Point2D a, Point2D b, Point2D c, Point2D d) noexcept;

/// True if a closed ring has any pair of non-adjacent edges that touch.
bool ring_self_intersects(std::span<const Point2D> ring) noexcept;

/// Signed shoelace area of a closed ring.
double ring_area(std::span<const Point2D> ring) noexcept;

}  // namespace trailrank
