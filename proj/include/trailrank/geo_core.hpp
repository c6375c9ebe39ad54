#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trailrank/geometry.hpp"

namespace trailrank {

// Thresholds from the route attribute definitions.
inline constexpr double kCircularMaxGap = 500.0;
inline constexpr double kOutAndBackBuffer = 25.0;
inline constexpr double kOutAndBackMaxRatio = 0.6;
inline constexpr double kOutAndBackRasterCell = 5.0;
inline constexpr double kPlaceSearchRadius = 1000.0;
inline constexpr double kMinRouteLength = 1000.0;
inline constexpr double kMaxRouteLength = 50000.0;
inline constexpr double kMaxSegmentJump = 500.0;
inline constexpr double kSurfaceWaterBuffer = 50.0;
inline constexpr double kCoastBuffer = 150.0;
inline constexpr double kCoastalMinPercent = 50.0;
inline constexpr double kDefaultSampleStep = 10.0;

struct RoutePolyline {
    std::string id;
    std::vector<Point2D> points;
};

/// Drops consecutive duplicate vertices and validates the result.
/// Throws InvalidGeometry for non-finite coordinates and DegenerateRoute when
/// fewer than two distinct vertices remain.
RoutePolyline normalize_route(std::string id, std::vector<Point2D> points);

RoutePolyline reversed(const RoutePolyline& route);

/// Raster of elevations in ESRI ASCII layout: `origin` is the lower-left
/// corner of the lower-left cell and row 0 of `values` is the northernmost row.
struct ElevationGrid {
    Point2D origin;
    double cell_size = 1.0;
    int n_cols = 0;
    int n_rows = 0;
    std::vector<double> values;
    double nodata = -9999.0;

    void validate() const;
    double at(int col, int row) const { return values[static_cast<std::size_t>(row) * n_cols + col]; }
    bool is_nodata(double v) const noexcept { return v == nodata; }
    BBox extent() const noexcept {
        return {origin.easting, origin.northing, origin.easting + n_cols * cell_size,
                origin.northing + n_rows * cell_size};
    }
};

enum class LayerClass : std::uint8_t { SurfaceWater, Coastline, NationalPark, Greenspace, Woodland, Urban };

inline constexpr std::array<LayerClass, 6> kAllLayerClasses = {
    LayerClass::SurfaceWater, LayerClass::Coastline, LayerClass::NationalPark,
    LayerClass::Greenspace,   LayerClass::Woodland,  LayerClass::Urban};

/// File stem used for a layer class (`surface_water`, `coastline`, ...).
std::string_view layer_file_stem(LayerClass cls) noexcept;
std::optional<LayerClass> layer_class_from_stem(std::string_view stem) noexcept;

struct Geometry {
    enum class Kind : std::uint8_t { Polygon, LineString };
    Kind kind = Kind::LineString;
    /// Polygon: outer ring followed by holes, each closed. LineString: one part.
    std::vector<std::vector<Point2D>> parts;

    static Geometry polygon(std::vector<Point2D> outer) { return {Kind::Polygon, {std::move(outer)}}; }
    static Geometry line(std::vector<Point2D> pts) { return {Kind::LineString, {std::move(pts)}}; }
};

/// Throws InvalidGeometry for unclosed, too-short, or self-intersecting rings.
void validate_geometry(const Geometry& g);

struct FeatureLayer {
    LayerClass cls = LayerClass::Urban;
    std::vector<Geometry> geometries;
};

struct NamedPlace {
    std::string name;
    Point2D location;
};

struct RouteAttributes {
    double length_m = 0.0;
    double total_gain = 0.0;
    double total_loss = 0.0;
    double grade = 0.0;
    bool is_circular = false;
    bool is_out_and_back = false;
    std::optional<std::string> start_place;
    std::optional<std::string> end_place;
    double along_surfacewater = 0.0;
    double along_coast = 0.0;
    bool is_coastal = false;
    double in_national_parks = 0.0;
    double in_greenspace = 0.0;
    double in_woodland = 0.0;
    double in_urban = 0.0;
};

double route_length(const RoutePolyline& route);

/// Bilinear interpolation between the four surrounding cell centres. Within
/// half a cell of the grid edge the nearest row/column of centres is used.
/// Cells with zero interpolation weight do not contribute.
double sample_elevation(const ElevationGrid& grid, Point2D p);

/// Points at arc lengths 0, step, 2*step, ... plus the exact route endpoint.
std::vector<Point2D> sample_route(const RoutePolyline& route, double step = kDefaultSampleStep);

std::vector<double> elevation_profile(const RoutePolyline& route, const ElevationGrid& grid,
                                      double step = kDefaultSampleStep);

struct GainLoss {
    double gain = 0.0;
    double loss = 0.0;
};

GainLoss elevation_gain_loss(std::span<const double> profile);

double compute_grade(double total_gain, double length_m);

bool is_circular(const RoutePolyline& route);

/// Area of the route's 25 m buffer, rasterised on a 5 m grid, divided by the
/// non-overlapping reference area 2 * 25 * length.
double buffer_overlap_ratio(const RoutePolyline& route);

bool is_out_and_back(const RoutePolyline& route);

/// Bucketed lookup over one layer's geometries.
class LayerIndex {
public:
    explicit LayerIndex(FeatureLayer layer, double bucket_size = 1000.0);

    /// True if p lies within `buffer` metres of any geometry. Polygons count as
    /// areas (distance 0 inside) except for the coastline class, whose
    /// polygons stand for the land boundary and are measured to their rings.
    bool near(Point2D p, double buffer) const;

    const FeatureLayer& layer() const noexcept { return layer_; }
    bool empty() const noexcept { return layer_.geometries.empty(); }

private:
    bool near_geometry(std::size_t idx, Point2D p, double buffer) const;
    std::int64_t key(std::int64_t ix, std::int64_t iy) const noexcept { return (ix << 32) ^ (iy & 0xffffffff); }

    FeatureLayer layer_;
    std::vector<BBox> boxes_;
    double bucket_size_;
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets_;
};

/// Percentage of `samples` within `buffer` of the indexed layer.
double proximity_percent(std::span<const Point2D> samples, const LayerIndex& index, double buffer);

double proximity_percent(const RoutePolyline& route, const FeatureLayer& layer, double buffer,
                         double step = kDefaultSampleStep);

/// Nearest place within 1 km, ties broken by the lexicographically smallest name.
std::optional<std::string> nearest_place(Point2D p, std::span<const NamedPlace> places);

class PlaceIndex {
public:
    explicit PlaceIndex(std::vector<NamedPlace> places);
    std::optional<std::string> nearest(Point2D p) const;
    std::size_t size() const noexcept { return places_.size(); }

private:
    std::vector<NamedPlace> places_;
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets_;
};

enum class FilterVerdict : std::uint8_t { Keep, TooShort, TooLong, GpsAnomaly };
std::string_view filter_verdict_name(FilterVerdict v) noexcept;

FilterVerdict filter_route(const RoutePolyline& route);

/// Prepared inputs for attribute computation; immutable and shareable across threads.
struct GeoContext {
    GeoContext(ElevationGrid grid, std::vector<FeatureLayer> layers, std::vector<NamedPlace> places,
               double step = kDefaultSampleStep);

    const LayerIndex* layer(LayerClass cls) const noexcept;

    ElevationGrid grid;
    std::array<std::optional<LayerIndex>, kAllLayerClasses.size()> layers;
    PlaceIndex places;
    double step;
};

RouteAttributes compute_attributes(const RoutePolyline& route, const GeoContext& ctx);

RouteAttributes compute_attributes(const RoutePolyline& route, std::span<const FeatureLayer> layers,
                                   const ElevationGrid& grid, std::span<const NamedPlace> places);

}  // namespace trailrank
