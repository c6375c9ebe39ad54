#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "trailrank/geo_core.hpp"

namespace test {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("trailrank-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

// Grid whose cell centres take f(easting, northing).
inline trailrank::ElevationGrid make_grid(trailrank::Point2D origin, double cell, int cols, int rows,
                                          const std::function<double(double, double)>& f) {
    trailrank::ElevationGrid g;
    g.origin = origin;
    g.cell_size = cell;
    g.n_cols = cols;
    g.n_rows = rows;
    g.values.resize(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r) {
        const double n = origin.northing + (rows - 0.5 - r) * cell;
        for (int c = 0; c < cols; ++c) {
            g.values[static_cast<std::size_t>(r) * cols + c] = f(origin.easting + (c + 0.5) * cell, n);
        }
    }
    return g;
}

inline trailrank::RoutePolyline straight(double x0, double y0, double x1, double y1, const std::string& id = "r") {
    return {id, {{x0, y0}, {x1, y1}}};
}

}  // namespace test

namespace test {

// Shifts every geometry of a corpus-style context by (de, dn).
inline trailrank::Point2D shifted(trailrank::Point2D p, double de, double dn) {
    return {p.easting + de, p.northing + dn};
}

inline trailrank::RoutePolyline translate(const trailrank::RoutePolyline& r, double de, double dn) {
    trailrank::RoutePolyline out{r.id, {}};
    for (const auto& p : r.points) out.points.push_back(shifted(p, de, dn));
    return out;
}

inline std::vector<trailrank::FeatureLayer> translate(const std::vector<trailrank::FeatureLayer>& layers, double de,
                                                      double dn) {
    auto out = layers;
    for (auto& layer : out) {
        for (auto& g : layer.geometries) {
            for (auto& part : g.parts) {
                for (auto& p : part) p = shifted(p, de, dn);
            }
        }
    }
    return out;
}

inline std::vector<trailrank::NamedPlace> translate(const std::vector<trailrank::NamedPlace>& places, double de,
                                                    double dn) {
    auto out = places;
    for (auto& p : out) p.location = shifted(p.location, de, dn);
    return out;
}

inline trailrank::ElevationGrid translate(const trailrank::ElevationGrid& g, double de, double dn) {
    auto out = g;
    out.origin = shifted(g.origin, de, dn);
    return out;
}

// Scales about `centre`; the grid is stretched with the route so every point
// of the route still sees the same elevation.
inline trailrank::RoutePolyline scale(const trailrank::RoutePolyline& r, trailrank::Point2D centre, double s) {
    trailrank::RoutePolyline out{r.id, {}};
    for (const auto& p : r.points) {
        out.points.push_back({centre.easting + s * (p.easting - centre.easting),
                              centre.northing + s * (p.northing - centre.northing)});
    }
    return out;
}

inline trailrank::ElevationGrid scale(const trailrank::ElevationGrid& g, trailrank::Point2D centre, double s) {
    auto out = g;
    out.origin = {centre.easting + s * (g.origin.easting - centre.easting),
                  centre.northing + s * (g.origin.northing - centre.northing)};
    out.cell_size = g.cell_size * s;
    return out;
}

}  // namespace test
