#include "trailrank/geo_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "trailrank/errors.hpp"

namespace trailrank::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Point2D parse_position(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(Errc::ParseError, where + ": position must be an array of at least two numbers");
    }
    const Point2D p{j[0].get<double>(), j[1].get<double>()};
    if (!is_finite(p)) throw Error(Errc::InvalidGeometry, where + ": non-finite coordinate");
    return p;
}

std::vector<Point2D> parse_positions(const json& j, const std::string& where) {
    if (!j.is_array()) throw Error(Errc::ParseError, where + ": coordinates must be an array");
    std::vector<Point2D> pts;
    pts.reserve(j.size());
    for (const auto& pos : j) pts.push_back(parse_position(pos, where));
    return pts;
}

void write_positions(std::ostream& out, std::span<const Point2D> pts) {
    out << '[';
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out << ',';
        out << '[' << format_double(pts[i].easting) << ',' << format_double(pts[i].northing) << ']';
    }
    out << ']';
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error(Errc::ParseError, "not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<RoutePolyline> read_routes_jsonl(std::istream& in) {
    std::vector<RoutePolyline> routes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        const std::string where = "routes line " + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(Errc::ParseError, where + ": " + e.what());
        }
        if (!rec.is_object()) throw Error(Errc::ParseError, where + ": expected a JSON object");

        std::string id;
        const auto id_from = [&](const json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            throw Error(Errc::ParseError, where + ": route id must be a string or integer");
        };
        if (rec.contains("id")) {
            id = id_from(rec["id"]);
        } else if (rec.contains("properties") && rec["properties"].is_object() &&
                   rec["properties"].contains("route_id")) {
            id = id_from(rec["properties"]["route_id"]);
        } else {
            throw Error(Errc::ParseError, where + ": missing route id");
        }
        if (id.empty()) throw Error(Errc::ParseError, where + ": empty route id");

        const json& geom = rec.value("type", "") == "Feature" ? rec["geometry"] : rec;
        if (!geom.is_object() || geom.value("type", "") != "LineString") {
            throw Error(Errc::InvalidGeometry, where + ": route geometry must be a LineString");
        }
        routes.push_back(normalize_route(id, parse_positions(geom["coordinates"], where)));
    }
    return routes;
}

std::vector<RoutePolyline> read_routes_jsonl(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_routes_jsonl(in);
}

void write_routes_jsonl(std::ostream& out, std::span<const RoutePolyline> routes) {
    for (const auto& r : routes) {
        out << R"({"type":"Feature","id":)" << json_string(r.id)
            << R"(,"properties":{},"geometry":{"type":"LineString","coordinates":)";
        write_positions(out, r.points);
        out << "}}\n";
    }
}

void write_routes_jsonl(const std::filesystem::path& path, std::span<const RoutePolyline> routes) {
    auto out = open_out(path);
    write_routes_jsonl(out, routes);
    finish(out, path);
}

namespace {

void append_geometry(const json& geom, std::vector<Geometry>& out, const std::string& where) {
    if (!geom.is_object()) throw Error(Errc::ParseError, where + ": geometry must be an object");
    const std::string type = geom.value("type", "");
    const json& coords = geom["coordinates"];
    const auto polygon = [&](const json& rings) {
        if (!rings.is_array() || rings.empty()) throw Error(Errc::ParseError, where + ": polygon needs rings");
        Geometry g{Geometry::Kind::Polygon, {}};
        for (const auto& ring : rings) g.parts.push_back(parse_positions(ring, where));
        validate_geometry(g);
        out.push_back(std::move(g));
    };
    const auto line = [&](const json& pts) {
        Geometry g = Geometry::line(parse_positions(pts, where));
        validate_geometry(g);
        out.push_back(std::move(g));
    };
    if (type == "Polygon") {
        polygon(coords);
    } else if (type == "MultiPolygon") {
        for (const auto& p : coords) polygon(p);
    } else if (type == "LineString") {
        line(coords);
    } else if (type == "MultiLineString") {
        for (const auto& l : coords) line(l);
    } else {
        throw Error(Errc::InvalidGeometry, where + ": unsupported layer geometry '" + type + "'");
    }
}

}  // namespace

FeatureLayer read_layer_geojson(std::istream& in, LayerClass cls) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("layer ") + std::string(layer_file_stem(cls)) + ": " + e.what());
    }
    FeatureLayer layer{cls, {}};
    const std::string where = "layer " + std::string(layer_file_stem(cls));
    const std::string type = doc.value("type", "");
    if (type == "FeatureCollection") {
        std::size_t i = 0;
        for (const auto& f : doc["features"]) {
            append_geometry(f["geometry"], layer.geometries, where + " feature " + std::to_string(i++));
        }
    } else if (type == "Feature") {
        append_geometry(doc["geometry"], layer.geometries, where);
    } else {
        append_geometry(doc, layer.geometries, where);
    }
    return layer;
}

FeatureLayer read_layer_geojson(const std::filesystem::path& path, LayerClass cls) {
    auto in = open_in(path);
    return read_layer_geojson(in, cls);
}

void write_layer_geojson(std::ostream& out, const FeatureLayer& layer) {
    out << R"({"type":"FeatureCollection","name":)" << json_string(layer_file_stem(layer.cls))
        << R"(,"features":[)";
    for (std::size_t i = 0; i < layer.geometries.size(); ++i) {
        const auto& g = layer.geometries[i];
        out << (i ? ",\n" : "\n") << R"({"type":"Feature","properties":{},"geometry":{"type":)";
        if (g.kind == Geometry::Kind::Polygon) {
            out << R"("Polygon","coordinates":[)";
            for (std::size_t r = 0; r < g.parts.size(); ++r) {
                if (r) out << ',';
                write_positions(out, g.parts[r]);
            }
            out << "]}}";
        } else {
            out << R"("LineString","coordinates":)";
            write_positions(out, g.parts.front());
            out << "}}";
        }
    }
    out << "\n]}\n";
}

std::vector<FeatureLayer> read_layer_dir(const std::filesystem::path& dir) {
    std::vector<FeatureLayer> layers;
    for (auto cls : kAllLayerClasses) {
        const auto path = dir / (std::string(layer_file_stem(cls)) + ".geojson");
        if (std::filesystem::exists(path)) layers.push_back(read_layer_geojson(path, cls));
    }
    return layers;
}

void write_layer_dir(const std::filesystem::path& dir, std::span<const FeatureLayer> layers) {
    std::filesystem::create_directories(dir);
    for (const auto& layer : layers) {
        const auto path = dir / (std::string(layer_file_stem(layer.cls)) + ".geojson");
        auto out = open_out(path);
        write_layer_geojson(out, layer);
        finish(out, path);
    }
}

ElevationGrid read_esri_ascii(std::istream& in) {
    ElevationGrid grid;
    bool has_cols = false, has_rows = false, has_x = false, has_y = false, has_cs = false;
    bool x_center = false, y_center = false;
    std::string token;
    // Header keys are case-insensitive and the NODATA_value line is optional.
    for (;;) {
        const auto pos = in.tellg();
        if (!(in >> token)) throw Error(Errc::ParseError, "esri grid: truncated header");
        const std::string key = lower(token);
        const auto value = [&]() {
            std::string v;
            if (!(in >> v)) throw Error(Errc::ParseError, "esri grid: missing value for " + token);
            return parse_double(v);
        };
        if (key == "ncols") {
            grid.n_cols = static_cast<int>(value());
            has_cols = true;
        } else if (key == "nrows") {
            grid.n_rows = static_cast<int>(value());
            has_rows = true;
        } else if (key == "xllcorner" || key == "xllcenter") {
            grid.origin.easting = value();
            x_center = key == "xllcenter";
            has_x = true;
        } else if (key == "yllcorner" || key == "yllcenter") {
            grid.origin.northing = value();
            y_center = key == "yllcenter";
            has_y = true;
        } else if (key == "cellsize") {
            grid.cell_size = value();
            has_cs = true;
        } else if (key == "nodata_value") {
            grid.nodata = value();
        } else {
            in.clear();
            in.seekg(pos);
            break;
        }
    }
    if (!(has_cols && has_rows && has_x && has_y && has_cs)) {
        throw Error(Errc::ParseError, "esri grid: header must define ncols, nrows, xllcorner, yllcorner, cellsize");
    }
    if (grid.n_cols < 1 || grid.n_rows < 1 || !(grid.cell_size > 0.0)) {
        throw Error(Errc::ParseError, "esri grid: invalid dimensions");
    }
    if (x_center) grid.origin.easting -= grid.cell_size / 2;
    if (y_center) grid.origin.northing -= grid.cell_size / 2;

    const std::size_t n = static_cast<std::size_t>(grid.n_cols) * static_cast<std::size_t>(grid.n_rows);
    grid.values.reserve(n);
    while (grid.values.size() < n && in >> token) grid.values.push_back(parse_double(token));
    if (grid.values.size() != n) {
        throw Error(Errc::ParseError, "esri grid: expected " + std::to_string(n) + " values, found " +
                                          std::to_string(grid.values.size()));
    }
    if (in >> token) throw Error(Errc::ParseError, "esri grid: trailing data after values");
    grid.validate();
    return grid;
}

ElevationGrid read_esri_ascii(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_esri_ascii(in);
}

void write_esri_ascii(std::ostream& out, const ElevationGrid& grid) {
    grid.validate();
    out << "ncols         " << grid.n_cols << '\n'
        << "nrows         " << grid.n_rows << '\n'
        << "xllcorner     " << format_double(grid.origin.easting) << '\n'
        << "yllcorner     " << format_double(grid.origin.northing) << '\n'
        << "cellsize      " << format_double(grid.cell_size) << '\n'
        << "NODATA_value  " << format_double(grid.nodata) << '\n';
    std::string row;
    for (int r = 0; r < grid.n_rows; ++r) {
        row.clear();
        for (int c = 0; c < grid.n_cols; ++c) {
            if (c) row += ' ';
            row += format_double(grid.at(c, r));
        }
        row += '\n';
        out << row;
    }
}

void write_esri_ascii(const std::filesystem::path& path, const ElevationGrid& grid) {
    auto out = open_out(path);
    write_esri_ascii(out, grid);
    finish(out, path);
}

std::vector<NamedPlace> read_places_tsv(std::istream& in) {
    std::vector<NamedPlace> places;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (line_no == 1 && !cols.empty() && lower(cols[0]) == "name") continue;
        if (cols.size() != 3) {
            throw Error(Errc::ParseError, "places line " + std::to_string(line_no) + ": expected 3 columns");
        }
        if (cols[0].empty()) throw Error(Errc::ParseError, "places line " + std::to_string(line_no) + ": empty name");
        places.push_back({cols[0], {parse_double(cols[1]), parse_double(cols[2])}});
    }
    return places;
}

std::vector<NamedPlace> read_places_tsv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_places_tsv(in);
}

void write_places_tsv(std::ostream& out, std::span<const NamedPlace> places) {
    out << "name\teasting\tnorthing\n";
    for (const auto& p : places) {
        out << p.name << '\t' << format_double(p.location.easting) << '\t' << format_double(p.location.northing)
            << '\n';
    }
}

void write_places_tsv(const std::filesystem::path& path, std::span<const NamedPlace> places) {
    auto out = open_out(path);
    write_places_tsv(out, places);
    finish(out, path);
}

namespace {

constexpr const char* kAttributeHeader =
    "route_id\tlength_m\ttotal_gain\ttotal_loss\tgrade\tis_circular\tis_out_and_back\tstart_place\tend_place\t"
    "along_surfacewater\talong_coast\tis_coastal\tin_national_parks\tin_greenspace\tin_woodland\tin_urban";

const char* bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw Error(Errc::ParseError, "not a boolean: '" + s + "'");
}

}  // namespace

void write_attributes_tsv(std::ostream& out, std::span<const AttributeRecord> records) {
    out << kAttributeHeader << '\n';
    for (const auto& rec : records) {
        const auto& a = rec.attrs;
        out << rec.route_id << '\t' << format_double(a.length_m) << '\t' << format_double(a.total_gain) << '\t'
            << format_double(a.total_loss) << '\t' << format_double(a.grade) << '\t' << bool_text(a.is_circular)
            << '\t' << bool_text(a.is_out_and_back) << '\t' << a.start_place.value_or("") << '\t'
            << a.end_place.value_or("") << '\t' << format_double(a.along_surfacewater) << '\t'
            << format_double(a.along_coast) << '\t' << bool_text(a.is_coastal) << '\t'
            << format_double(a.in_national_parks) << '\t' << format_double(a.in_greenspace) << '\t'
            << format_double(a.in_woodland) << '\t' << format_double(a.in_urban) << '\n';
    }
}

void write_attributes_tsv(const std::filesystem::path& path, std::span<const AttributeRecord> records) {
    auto out = open_out(path);
    write_attributes_tsv(out, records);
    finish(out, path);
}

std::vector<AttributeRecord> read_attributes_tsv(std::istream& in) {
    std::vector<AttributeRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line_no == 1) {
            if (line != kAttributeHeader) throw Error(Errc::ParseError, "attributes: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        const auto c = split(line, '\t');
        if (c.size() != 16) {
            throw Error(Errc::ParseError, "attributes line " + std::to_string(line_no) + ": expected 16 columns");
        }
        AttributeRecord rec;
        rec.route_id = c[0];
        auto& a = rec.attrs;
        a.length_m = parse_double(c[1]);
        a.total_gain = parse_double(c[2]);
        a.total_loss = parse_double(c[3]);
        a.grade = parse_double(c[4]);
        a.is_circular = parse_bool(c[5]);
        a.is_out_and_back = parse_bool(c[6]);
        if (!c[7].empty()) a.start_place = c[7];
        if (!c[8].empty()) a.end_place = c[8];
        a.along_surfacewater = parse_double(c[9]);
        a.along_coast = parse_double(c[10]);
        a.is_coastal = parse_bool(c[11]);
        a.in_national_parks = parse_double(c[12]);
        a.in_greenspace = parse_double(c[13]);
        a.in_woodland = parse_double(c[14]);
        a.in_urban = parse_double(c[15]);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<AttributeRecord> read_attributes_tsv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_attributes_tsv(in);
}

}  // namespace trailrank::io
