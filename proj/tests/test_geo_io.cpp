#include <doctest.h>

#include <fstream>
#include <limits>
#include <sstream>

#include "support.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/geo_io.hpp"

using namespace trailrank;

namespace {

Errc parse_error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        io::read_routes_jsonl(in);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse failure");
    return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("geo_io") {

TEST_CASE("format_double round trips") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 123456.789, 1e-300, 6.02214076e23}) {
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(1.5) == "1.5");
    CHECK(io::parse_double(" +2 ") == 2.0);
    CHECK_THROWS_AS(io::parse_double("abc"), Error);
    CHECK_THROWS_AS(io::parse_double("1.5x"), Error);
}

TEST_CASE("routes round trip") {
    const std::vector<RoutePolyline> routes = {{"a", {{0, 0}, {1.25, 2}, {3, 4.125}}},
                                               {"b\"q", {{200000.1, 100000.7}, {200010, 100020}}}};
    std::ostringstream out;
    io::write_routes_jsonl(out, routes);
    std::istringstream in(out.str());
    const auto back = io::read_routes_jsonl(in);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].id == routes[i].id);
        CHECK(back[i].points == routes[i].points);
    }
}

TEST_CASE("route ingestion accepts bare geometries and property ids") {
    std::istringstream in(
        R"({"type":"Feature","properties":{"route_id":7},"geometry":{"type":"LineString","coordinates":[[0,0],[0,0],[5,0]]}})"
        "\n\n"
        R"({"id":"x","type":"LineString","coordinates":[[1,1],[2,2,10]]})"
        "\n");
    const auto routes = io::read_routes_jsonl(in);
    REQUIRE(routes.size() == 2);
    CHECK(routes[0].id == "7");
    CHECK(routes[0].points.size() == 2);
    CHECK(routes[1].id == "x");
}

TEST_CASE("route ingestion errors") {
    CHECK(parse_error_of("{not json}\n") == Errc::ParseError);
    CHECK(parse_error_of(R"({"type":"LineString","coordinates":[[0,0],[1,1]]})") == Errc::ParseError);
    CHECK(parse_error_of(R"({"id":"p","type":"Point","coordinates":[0,0]})") == Errc::InvalidGeometry);
    CHECK(parse_error_of(R"({"id":"d","type":"LineString","coordinates":[[1,1],[1,1]]})") == Errc::DegenerateRoute);
    CHECK(parse_error_of(R"({"id":"s","type":"LineString","coordinates":[[1,"a"],[1,1]]})") == Errc::ParseError);
}

TEST_CASE("layers round trip") {
    FeatureLayer layer{LayerClass::SurfaceWater,
                       {Geometry::polygon({{0, 0}, {10, 0}, {10, 10}, {0, 0}}), Geometry::line({{0, 5}, {20, 5}, {30, 9}})}};
    test::TempDir dir("layers");
    io::write_layer_dir(dir.path(), std::vector<FeatureLayer>{layer});
    const auto back = io::read_layer_dir(dir.path());
    REQUIRE(back.size() == 1);
    CHECK(back[0].cls == LayerClass::SurfaceWater);
    REQUIRE(back[0].geometries.size() == 2);
    CHECK(back[0].geometries[0].kind == Geometry::Kind::Polygon);
    CHECK(back[0].geometries[0].parts == layer.geometries[0].parts);
    CHECK(back[0].geometries[1].parts == layer.geometries[1].parts);
}

TEST_CASE("layer geometry validation") {
    const auto read = [](const std::string& geom) {
        std::istringstream in(R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{},"geometry":)" +
                              geom + "}]}");
        return io::read_layer_geojson(in, LayerClass::Urban);
    };
    CHECK(read(R"({"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,5]]]]})")
              .geometries.size() == 2);
    CHECK_THROWS_AS(read(R"({"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]})"), Error);
    CHECK_THROWS_AS(read(R"({"type":"Polygon","coordinates":[[[0,0],[10,10],[10,0],[0,10],[0,0]]]})"), Error);
}

TEST_CASE("esri grid round trip") {
    const auto g = test::make_grid({200000, 100000}, 50, 3, 2, [](double e, double n) { return (e - 200000) + n / 1e4; });
    auto holed = g;
    holed.values[4] = holed.nodata;
    std::ostringstream out;
    io::write_esri_ascii(out, holed);
    std::istringstream in(out.str());
    const auto back = io::read_esri_ascii(in);
    CHECK(back.n_cols == 3);
    CHECK(back.n_rows == 2);
    CHECK(back.cell_size == 50);
    CHECK(back.origin == holed.origin);
    CHECK(back.nodata == holed.nodata);
    CHECK(back.values == holed.values);
}

TEST_CASE("esri grid header variants and errors") {
    std::istringstream centre("NCOLS 2\nNROWS 1\nXLLCENTER 5\nYLLCENTER 5\nCELLSIZE 10\n1 2\n");
    const auto g = io::read_esri_ascii(centre);
    CHECK(g.origin == Point2D{0, 0});
    CHECK(g.nodata == -9999.0);

    std::istringstream short_values("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n");
    CHECK_THROWS_AS(io::read_esri_ascii(short_values), Error);
    std::istringstream missing("ncols 2\nnrows 2\nxllcorner 0\ncellsize 1\n1 2 3 4\n");
    CHECK_THROWS_AS(io::read_esri_ascii(missing), Error);
}

TEST_CASE("places round trip") {
    const std::vector<NamedPlace> places = {{"Priddy, Somerset", {1, 2.5}}, {"Wells", {-3, 4}}};
    std::ostringstream out;
    io::write_places_tsv(out, places);
    std::istringstream in(out.str());
    const auto back = io::read_places_tsv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "Priddy, Somerset");
    CHECK(back[1].location == places[1].location);

    std::istringstream bad("name\teasting\tnorthing\nA\t1\n");
    CHECK_THROWS_AS(io::read_places_tsv(bad), Error);
}

TEST_CASE("attributes round trip") {
    RouteAttributes a;
    a.length_m = 10234.567;
    a.total_gain = 130.25;
    a.total_loss = 129.75;
    a.grade = a.total_gain / a.length_m * 100;
    a.is_circular = true;
    a.start_place = "Priddy, Somerset";
    a.along_coast = 61.386138613861384;
    a.is_coastal = true;
    a.in_urban = 1.0 / 3.0;
    const std::vector<io::AttributeRecord> recs = {{"r1", a}, {"r2", RouteAttributes{}}};
    std::ostringstream out;
    io::write_attributes_tsv(out, recs);
    std::istringstream in(out.str());
    const auto back = io::read_attributes_tsv(in);
    REQUIRE(back.size() == 2);
    const auto& b = back[0].attrs;
    CHECK(back[0].route_id == "r1");
    CHECK(b.length_m == a.length_m);
    CHECK(b.grade == a.grade);
    CHECK(b.is_circular);
    CHECK_FALSE(b.is_out_and_back);
    CHECK(b.start_place == a.start_place);
    CHECK_FALSE(b.end_place.has_value());
    CHECK(b.along_coast == a.along_coast);
    CHECK(b.in_urban == a.in_urban);
    CHECK(back[1].attrs.length_m == 0.0);
}

TEST_CASE("split") {
    CHECK(io::split("a\tb\t\tc", '\t') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(io::split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("missing files are io errors") {
    try {
        io::read_places_tsv(std::filesystem::path("/nonexistent/places.tsv"));
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::IoError);
    }
}

}
