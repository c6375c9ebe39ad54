#include "trailrank/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace trailrank {

BBox bbox_of(std::span<const Point2D> points) noexcept {
    BBox box;
    for (const auto& p : points) box.expand(p);
    return box;
}

double distance_to_segment_sq(Point2D p, Point2D a, Point2D b) noexcept {
    const double dx = b.easting - a.easting;
    const double dy = b.northing - a.northing;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.easting - a.easting) * dx + (p.northing - a.northing) * dy) / len2, 0.0, 1.0);
    const double ex = p.easting - (a.easting + t * dx);
    const double ey = p.northing - (a.northing + t * dy);
    return ex * ex + ey * ey;
}

double distance_to_segment(Point2D p, Point2D a, Point2D b) noexcept {
    return std::sqrt(distance_to_segment_sq(p, a, b));
}

double distance_to_polyline(Point2D p, std::span<const Point2D> line) noexcept {
    if (line.empty()) return std::numeric_limits<double>::infinity();
    if (line.size() == 1) return distance(p, line[0]);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < line.size(); ++i) {
        best = std::min(best, distance_to_segment_sq(p, line[i - 1], line[i]));
    }
    return std::sqrt(best);
}

bool point_in_ring(Point2D p, std::span<const Point2D> ring) noexcept {
    if (ring.size() < 4) return false;
    bool inside = false;
    for (std::size_t i = 1; i < ring.size(); ++i) {
        const Point2D a = ring[i - 1];
        const Point2D b = ring[i];
        if (distance_to_segment(p, a, b) == 0.0) return true;
        if ((a.northing > p.northing) != (b.northing > p.northing)) {
            const double x = a.easting + (p.northing - a.northing) * (b.easting - a.easting) /
                                             (b.northing - a.northing);
            if (p.easting < x) inside = !inside;
        }
    }
    return inside;
}

namespace {

double orient(Point2D a, Point2D b, Point2D c) noexcept {
    return (b.easting - a.easting) * (c.northing - a.northing) -
           (b.northing - a.northing) * (c.easting - a.easting);
}

bool on_segment(Point2D a, Point2D b, Point2D p) noexcept {
    return std::min(a.easting, b.easting) <= p.easting &&
           p.easting <= std::max(a.easting, b.easting) &&
           std::min(a.northing, b.northing) <= p.northing &&
           p.northing <= std::max(a.northing, b.northing);
}

int sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

}  // namespace

bool segments_intersect(Point2D a, Point2D b, Point2D c, Point2D d) noexcept {
    const int o1 = sign(orient(a, b, c));
    const int o2 = sign(orient(a, b, d));
    const int o3 = sign(orient(c, d, a));
    const int o4 = sign(orient(c, d, b));
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool ring_self_intersects(std::span<const Point2D> ring) noexcept {
    const std::size_t n = ring.size() - 1;  // edge count of a closed ring
    if (ring.size() < 4) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1])) return true;
        }
    }
    return false;
}

double ring_area(std::span<const Point2D> ring) noexcept {
    double twice = 0.0;
    for (std::size_t i = 1; i < ring.size(); ++i) {
        twice += ring[i - 1].easting * ring[i].northing - ring[i].easting * ring[i - 1].northing;
    }
    return 0.5 * twice;
}

}  // namespace trailrank
