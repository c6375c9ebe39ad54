#include "trailrank/geo_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "trailrank/errors.hpp"

namespace trailrank {

RoutePolyline normalize_route(std::string id, std::vector<Point2D> points) {
    std::vector<Point2D> kept;
    kept.reserve(points.size());
    for (const auto& p : points) {
        if (!is_finite(p)) throw Error(Errc::InvalidGeometry, "route '" + id + "' has a non-finite coordinate");
        if (kept.empty() || !(kept.back() == p)) kept.push_back(p);
    }
    if (kept.size() < 2) {
        throw Error(Errc::DegenerateRoute, "route '" + id + "' has fewer than two distinct points");
    }
    return {std::move(id), std::move(kept)};
}

RoutePolyline reversed(const RoutePolyline& route) {
    RoutePolyline out{route.id, route.points};
    std::reverse(out.points.begin(), out.points.end());
    return out;
}

void ElevationGrid::validate() const {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw Error(Errc::InvalidArgument, "elevation grid cell size must be positive");
    }
    if (n_cols < 1 || n_rows < 1) throw Error(Errc::InvalidArgument, "elevation grid needs at least one cell");
    if (values.size() != static_cast<std::size_t>(n_cols) * static_cast<std::size_t>(n_rows)) {
        throw Error(Errc::InvalidArgument, "elevation grid value count does not match ncols * nrows");
    }
    if (!is_finite(origin)) throw Error(Errc::InvalidArgument, "elevation grid origin is not finite");
}

std::string_view layer_file_stem(LayerClass cls) noexcept {
    switch (cls) {
        case LayerClass::SurfaceWater: return "surface_water";
        case LayerClass::Coastline: return "coastline";
        case LayerClass::NationalPark: return "national_park";
        case LayerClass::Greenspace: return "greenspace";
        case LayerClass::Woodland: return "woodland";
        case LayerClass::Urban: return "urban";
    }
    return "unknown";
}

std::optional<LayerClass> layer_class_from_stem(std::string_view stem) noexcept {
    for (auto cls : kAllLayerClasses) {
        if (layer_file_stem(cls) == stem) return cls;
    }
    return std::nullopt;
}

void validate_geometry(const Geometry& g) {
    if (g.parts.empty()) throw Error(Errc::InvalidGeometry, "geometry has no coordinates");
    for (const auto& part : g.parts) {
        for (const auto& p : part) {
            if (!is_finite(p)) throw Error(Errc::InvalidGeometry, "geometry has a non-finite coordinate");
        }
        if (g.kind == Geometry::Kind::LineString) {
            if (part.size() < 2) throw Error(Errc::InvalidGeometry, "line string needs at least two points");
            continue;
        }
        if (part.size() < 4) throw Error(Errc::InvalidGeometry, "polygon ring needs at least four points");
        if (!(part.front() == part.back())) throw Error(Errc::InvalidGeometry, "polygon ring is not closed");
        if (ring_self_intersects(part)) throw Error(Errc::InvalidGeometry, "polygon ring self-intersects");
    }
}

double route_length(const RoutePolyline& route) {
    double total = 0.0;
    for (std::size_t i = 1; i < route.points.size(); ++i) {
        total += distance(route.points[i - 1], route.points[i]);
    }
    if (!(total > 0.0)) throw Error(Errc::DegenerateRoute, "route '" + route.id + "' has zero length");
    return total;
}

double sample_elevation(const ElevationGrid& grid, Point2D p) {
    const BBox ext = grid.extent();
    if (!is_finite(p) || !ext.contains(p)) throw Error(Errc::OutOfExtent, "point outside elevation grid");

    const double cs = grid.cell_size;
    const double fx = std::clamp((p.easting - grid.origin.easting) / cs - 0.5, 0.0, grid.n_cols - 1.0);
    // Fractional row counted upwards from the southern edge.
    const double fy = std::clamp((p.northing - grid.origin.northing) / cs - 0.5, 0.0, grid.n_rows - 1.0);

    int c0 = 0;
    double tx = 0.0;
    if (grid.n_cols > 1) {
        c0 = std::min(static_cast<int>(std::floor(fx)), grid.n_cols - 2);
        tx = fx - c0;
    }
    int r0 = 0;
    double ty = 0.0;
    if (grid.n_rows > 1) {
        r0 = std::min(static_cast<int>(std::floor(fy)), grid.n_rows - 2);
        ty = fy - r0;
    }
    const int c1 = grid.n_cols > 1 ? c0 + 1 : c0;
    const int r1 = grid.n_rows > 1 ? r0 + 1 : r0;

    const int cols[4] = {c0, c1, c0, c1};
    const int rows[4] = {r0, r0, r1, r1};
    const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};

    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (weights[k] == 0.0) continue;
        const double v = grid.at(cols[k], grid.n_rows - 1 - rows[k]);
        if (grid.is_nodata(v)) throw Error(Errc::NoDataCell, "elevation sample touches a nodata cell");
        acc += weights[k] * v;
    }
    return acc;
}

std::vector<Point2D> sample_route(const RoutePolyline& route, double step) {
    if (!(step > 0.0)) throw Error(Errc::InvalidArgument, "sampling step must be positive");
    const double total = route_length(route);
    const auto& pts = route.points;

    std::vector<Point2D> out;
    out.reserve(static_cast<std::size_t>(total / step) + 2);

    std::size_t seg = 1;
    double seg_start = 0.0;
    double seg_len = distance(pts[0], pts[1]);
    const double stop = total - total * 1e-12;
    for (std::size_t k = 0;; ++k) {
        const double s = static_cast<double>(k) * step;
        if (s >= stop) break;
        while (seg + 1 < pts.size() && s > seg_start + seg_len) {
            seg_start += seg_len;
            ++seg;
            seg_len = distance(pts[seg - 1], pts[seg]);
        }
        const Point2D a = pts[seg - 1];
        const Point2D b = pts[seg];
        const double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
        out.push_back({a.easting + t * (b.easting - a.easting), a.northing + t * (b.northing - a.northing)});
    }
    out.push_back(pts.back());
    return out;
}

std::vector<double> elevation_profile(const RoutePolyline& route, const ElevationGrid& grid, double step) {
    const auto samples = sample_route(route, step);
    std::vector<double> profile;
    profile.reserve(samples.size());
    for (const auto& p : samples) profile.push_back(sample_elevation(grid, p));
    return profile;
}

GainLoss elevation_gain_loss(std::span<const double> profile) {
    if (profile.size() < 2) throw Error(Errc::InsufficientProfile, "profile needs at least two samples");
    GainLoss out;
    for (std::size_t i = 1; i < profile.size(); ++i) {
        const double d = profile[i] - profile[i - 1];
        if (d > 0.0) {
            out.gain += d;
        } else {
            out.loss -= d;
        }
    }
    return out;
}

double compute_grade(double total_gain, double length_m) {
    if (!(length_m > 0.0)) throw Error(Errc::ZeroLength, "grade needs a positive route length");
    return total_gain / length_m * 100.0;
}

bool is_circular(const RoutePolyline& route) {
    return distance(route.points.front(), route.points.back()) <= kCircularMaxGap;
}

double buffer_overlap_ratio(const RoutePolyline& route) {
    const double length = route_length(route);
    const double r = kOutAndBackBuffer;
    const double cell = kOutAndBackRasterCell;

    // Anchor the raster at the buffered bounding box so the cell set does not
    // depend on vertex order or on a global translation.
    const BBox box = bbox_of(route.points).inflated(r);
    const auto to_ix = [&](double e) { return static_cast<std::int64_t>(std::floor((e - box.min_e) / cell)); };
    const auto to_iy = [&](double n) { return static_cast<std::int64_t>(std::floor((n - box.min_n) / cell)); };

    const auto cols = to_ix(box.max_e) + 1;
    const auto rows = to_iy(box.max_n) + 1;
    // Dense bitmap for ordinary extents, sorted cell keys otherwise.
    const bool dense = cols * rows <= (std::int64_t{1} << 30);
    std::vector<std::uint64_t> bits(dense ? static_cast<std::size_t>((cols * rows + 63) / 64) : 0);
    std::vector<std::uint64_t> cells;
    for (std::size_t i = 1; i < route.points.size(); ++i) {
        const Point2D a = route.points[i - 1];
        const Point2D b = route.points[i];
        const std::int64_t ix0 = std::max<std::int64_t>(0, to_ix(std::min(a.easting, b.easting) - r));
        const std::int64_t ix1 = std::min(cols - 1, to_ix(std::max(a.easting, b.easting) + r));
        const std::int64_t iy0 = std::max<std::int64_t>(0, to_iy(std::min(a.northing, b.northing) - r));
        const std::int64_t iy1 = std::min(rows - 1, to_iy(std::max(a.northing, b.northing) + r));
        for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
            const double ce = box.min_e + (static_cast<double>(ix) + 0.5) * cell;
            for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
                const double cn = box.min_n + (static_cast<double>(iy) + 0.5) * cell;
                if (distance_to_segment_sq({ce, cn}, a, b) > r * r) continue;
                if (dense) {
                    const auto bit = static_cast<std::size_t>(iy * cols + ix);
                    bits[bit / 64] |= std::uint64_t{1} << (bit % 64);
                } else {
                    cells.push_back((static_cast<std::uint64_t>(ix) << 32) | static_cast<std::uint64_t>(iy));
                }
            }
        }
    }
    std::size_t count = 0;
    if (dense) {
        for (const auto w : bits) count += static_cast<std::size_t>(std::popcount(w));
    } else {
        std::sort(cells.begin(), cells.end());
        count = static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
    }
    return static_cast<double>(count) * cell * cell / (2.0 * r * length);
}

bool is_out_and_back(const RoutePolyline& route) {
    if (!is_circular(route)) return false;
    return buffer_overlap_ratio(route) < kOutAndBackMaxRatio;
}

namespace {

std::int64_t bucket_of(double v, double size) { return static_cast<std::int64_t>(std::floor(v / size)); }

BBox geometry_bbox(const Geometry& g) {
    BBox box;
    for (const auto& part : g.parts) {
        for (const auto& p : part) box.expand(p);
    }
    return box;
}

}  // namespace

LayerIndex::LayerIndex(FeatureLayer layer, double bucket_size) : layer_(std::move(layer)), bucket_size_(bucket_size) {
    boxes_.reserve(layer_.geometries.size());
    for (std::size_t i = 0; i < layer_.geometries.size(); ++i) {
        const BBox box = geometry_bbox(layer_.geometries[i]);
        boxes_.push_back(box);
        if (box.empty()) continue;
        for (auto ix = bucket_of(box.min_e, bucket_size_); ix <= bucket_of(box.max_e, bucket_size_); ++ix) {
            for (auto iy = bucket_of(box.min_n, bucket_size_); iy <= bucket_of(box.max_n, bucket_size_); ++iy) {
                buckets_[key(ix, iy)].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
}

bool LayerIndex::near_geometry(std::size_t idx, Point2D p, double buffer) const {
    const Geometry& g = layer_.geometries[idx];
    const bool area = g.kind == Geometry::Kind::Polygon && layer_.cls != LayerClass::Coastline;
    if (area && point_in_ring(p, g.parts.front())) {
        bool in_hole = false;
        for (std::size_t h = 1; h < g.parts.size() && !in_hole; ++h) {
            in_hole = point_in_ring(p, g.parts[h]) && distance_to_polyline(p, g.parts[h]) > 0.0;
        }
        if (!in_hole) return true;
    }
    for (const auto& part : g.parts) {
        if (distance_to_polyline(p, part) <= buffer) return true;
    }
    return false;
}

bool LayerIndex::near(Point2D p, double buffer) const {
    if (layer_.geometries.empty()) return false;
    for (auto ix = bucket_of(p.easting - buffer, bucket_size_); ix <= bucket_of(p.easting + buffer, bucket_size_); ++ix) {
        for (auto iy = bucket_of(p.northing - buffer, bucket_size_);
             iy <= bucket_of(p.northing + buffer, bucket_size_); ++iy) {
            const auto it = buckets_.find(key(ix, iy));
            if (it == buckets_.end()) continue;
            for (const auto idx : it->second) {
                if (!boxes_[idx].inflated(buffer).contains(p)) continue;
                if (near_geometry(idx, p, buffer)) return true;
            }
        }
    }
    return false;
}

double proximity_percent(std::span<const Point2D> samples, const LayerIndex& index, double buffer) {
    if (buffer < 0.0) throw Error(Errc::InvalidArgument, "buffer must be non-negative");
    if (samples.empty() || index.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& p : samples) hits += index.near(p, buffer) ? 1 : 0;
    return std::clamp(100.0 * static_cast<double>(hits) / static_cast<double>(samples.size()), 0.0, 100.0);
}

double proximity_percent(const RoutePolyline& route, const FeatureLayer& layer, double buffer, double step) {
    const LayerIndex index(layer);
    const auto samples = sample_route(route, step);
    return proximity_percent(samples, index, buffer);
}

std::optional<std::string> nearest_place(Point2D p, std::span<const NamedPlace> places) {
    const NamedPlace* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& place : places) {
        const double d = distance(p, place.location);
        if (d > kPlaceSearchRadius) continue;
        if (d < best_d || (d == best_d && place.name < best->name)) {
            best = &place;
            best_d = d;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->name;
}

PlaceIndex::PlaceIndex(std::vector<NamedPlace> places) : places_(std::move(places)) {
    for (std::size_t i = 0; i < places_.size(); ++i) {
        const auto ix = bucket_of(places_[i].location.easting, kPlaceSearchRadius);
        const auto iy = bucket_of(places_[i].location.northing, kPlaceSearchRadius);
        buckets_[(ix << 32) ^ (iy & 0xffffffff)].push_back(static_cast<std::uint32_t>(i));
    }
}

std::optional<std::string> PlaceIndex::nearest(Point2D p) const {
    const NamedPlace* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    const auto cx = bucket_of(p.easting, kPlaceSearchRadius);
    const auto cy = bucket_of(p.northing, kPlaceSearchRadius);
    for (auto ix = cx - 1; ix <= cx + 1; ++ix) {
        for (auto iy = cy - 1; iy <= cy + 1; ++iy) {
            const auto it = buckets_.find((ix << 32) ^ (iy & 0xffffffff));
            if (it == buckets_.end()) continue;
            for (const auto idx : it->second) {
                const auto& place = places_[idx];
                const double d = distance(p, place.location);
                if (d > kPlaceSearchRadius) continue;
                if (d < best_d || (d == best_d && place.name < best->name)) {
                    best = &place;
                    best_d = d;
                }
            }
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->name;
}

std::string_view filter_verdict_name(FilterVerdict v) noexcept {
    switch (v) {
        case FilterVerdict::Keep: return "Keep";
        case FilterVerdict::TooShort: return "TooShort";
        case FilterVerdict::TooLong: return "TooLong";
        case FilterVerdict::GpsAnomaly: return "GpsAnomaly";
    }
    return "Unknown";
}

FilterVerdict filter_route(const RoutePolyline& route) {
    double total = 0.0;
    double longest = 0.0;
    for (std::size_t i = 1; i < route.points.size(); ++i) {
        const double d = distance(route.points[i - 1], route.points[i]);
        total += d;
        longest = std::max(longest, d);
    }
    if (total < kMinRouteLength) return FilterVerdict::TooShort;
    if (total > kMaxRouteLength) return FilterVerdict::TooLong;
    if (longest > kMaxSegmentJump) return FilterVerdict::GpsAnomaly;
    return FilterVerdict::Keep;
}

GeoContext::GeoContext(ElevationGrid grid_in, std::vector<FeatureLayer> layers_in, std::vector<NamedPlace> places_in,
                       double step_in)
    : grid(std::move(grid_in)), places(std::move(places_in)), step(step_in) {
    grid.validate();
    std::array<FeatureLayer, kAllLayerClasses.size()> merged;
    std::array<bool, kAllLayerClasses.size()> present{};
    for (auto cls : kAllLayerClasses) merged[static_cast<std::size_t>(cls)].cls = cls;
    for (auto& layer : layers_in) {
        const auto slot = static_cast<std::size_t>(layer.cls);
        present[slot] = true;
        auto& dst = merged[slot].geometries;
        dst.insert(dst.end(), std::make_move_iterator(layer.geometries.begin()),
                   std::make_move_iterator(layer.geometries.end()));
    }
    for (std::size_t i = 0; i < merged.size(); ++i) {
        if (present[i]) layers[i].emplace(std::move(merged[i]));
    }
}

const LayerIndex* GeoContext::layer(LayerClass cls) const noexcept {
    const auto& slot = layers[static_cast<std::size_t>(cls)];
    return slot ? &*slot : nullptr;
}

RouteAttributes compute_attributes(const RoutePolyline& route, const GeoContext& ctx) {
    RouteAttributes a;
    a.length_m = route_length(route);

    const auto samples = sample_route(route, ctx.step);
    std::vector<double> profile;
    profile.reserve(samples.size());
    for (const auto& p : samples) profile.push_back(sample_elevation(ctx.grid, p));
    const GainLoss gl = elevation_gain_loss(profile);
    a.total_gain = gl.gain;
    a.total_loss = gl.loss;
    a.grade = compute_grade(a.total_gain, a.length_m);

    a.is_circular = is_circular(route);
    a.is_out_and_back = a.is_circular && buffer_overlap_ratio(route) < kOutAndBackMaxRatio;

    a.start_place = ctx.places.nearest(route.points.front());
    a.end_place = ctx.places.nearest(route.points.back());

    const auto percent = [&](LayerClass cls, double buffer) {
        const LayerIndex* index = ctx.layer(cls);
        return index ? proximity_percent(samples, *index, buffer) : 0.0;
    };
    a.along_surfacewater = percent(LayerClass::SurfaceWater, kSurfaceWaterBuffer);
    a.along_coast = percent(LayerClass::Coastline, kCoastBuffer);
    a.is_coastal = a.along_coast >= kCoastalMinPercent;
    a.in_national_parks = percent(LayerClass::NationalPark, 0.0);
    a.in_greenspace = percent(LayerClass::Greenspace, 0.0);
    a.in_woodland = percent(LayerClass::Woodland, 0.0);
    a.in_urban = percent(LayerClass::Urban, 0.0);
    return a;
}

RouteAttributes compute_attributes(const RoutePolyline& route, std::span<const FeatureLayer> layers,
                                   const ElevationGrid& grid, std::span<const NamedPlace> places) {
    const GeoContext ctx(grid, {layers.begin(), layers.end()}, {places.begin(), places.end()});
    return compute_attributes(route, ctx);
}

}  // namespace trailrank
