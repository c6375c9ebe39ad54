#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trailrank/geo_core.hpp"

namespace trailrank::io {

// Route ingestion: one GeoJSON Feature (LineString geometry) per line. The
// route id comes from the feature "id" member or properties.route_id.
std::vector<RoutePolyline> read_routes_jsonl(std::istream& in);
std::vector<RoutePolyline> read_routes_jsonl(const std::filesystem::path& path);
void write_routes_jsonl(std::ostream& out, std::span<const RoutePolyline> routes);
void write_routes_jsonl(const std::filesystem::path& path, std::span<const RoutePolyline> routes);

// Context layers: a GeoJSON FeatureCollection of Polygon/MultiPolygon and
// LineString/MultiLineString geometries.
FeatureLayer read_layer_geojson(std::istream& in, LayerClass cls);
FeatureLayer read_layer_geojson(const std::filesystem::path& path, LayerClass cls);
void write_layer_geojson(std::ostream& out, const FeatureLayer& layer);

/// Reads `<stem>.geojson` for every known class present in `dir`.
std::vector<FeatureLayer> read_layer_dir(const std::filesystem::path& dir);
void write_layer_dir(const std::filesystem::path& dir, std::span<const FeatureLayer> layers);

// ESRI ASCII grid.
ElevationGrid read_esri_ascii(std::istream& in);
ElevationGrid read_esri_ascii(const std::filesystem::path& path);
void write_esri_ascii(std::ostream& out, const ElevationGrid& grid);
void write_esri_ascii(const std::filesystem::path& path, const ElevationGrid& grid);

// Gazetteer: tab-separated `name easting northing` with a header row.
std::vector<NamedPlace> read_places_tsv(std::istream& in);
std::vector<NamedPlace> read_places_tsv(const std::filesystem::path& path);
void write_places_tsv(std::ostream& out, std::span<const NamedPlace> places);
void write_places_tsv(const std::filesystem::path& path, std::span<const NamedPlace> places);

struct AttributeRecord {
    std::string route_id;
    RouteAttributes attrs;
};

// Route attributes: tab-separated, one row per route, header of field names.
void write_attributes_tsv(std::ostream& out, std::span<const AttributeRecord> records);
void write_attributes_tsv(const std::filesystem::path& path, std::span<const AttributeRecord> records);
std::vector<AttributeRecord> read_attributes_tsv(std::istream& in);
std::vector<AttributeRecord> read_attributes_tsv(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep);

}  // namespace trailrank::io
