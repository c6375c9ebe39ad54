#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "trailrank/describe.hpp"
#include "trailrank/embed.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/eval.hpp"
#include "trailrank/geo_core.hpp"
#include "trailrank/pipeline.hpp"
#include "trailrank/synth.hpp"

namespace py = pybind11;
using namespace trailrank;

namespace {

RoutePolyline to_route(const std::string& id, const std::vector<std::pair<double, double>>& pts) {
    std::vector<Point2D> points;
    points.reserve(pts.size());
    for (const auto& [e, n] : pts) points.push_back({e, n});
    return normalize_route(id, std::move(points));
}

std::vector<std::pair<double, double>> to_pairs(const RoutePolyline& r) {
    std::vector<std::pair<double, double>> out;
    out.reserve(r.points.size());
    for (const auto& p : r.points) out.emplace_back(p.easting, p.northing);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Route attributes, descriptions, ranking and evaluation";

    py::register_exception<Error>(m, "TrailrankError", PyExc_RuntimeError);

    py::class_<RouteAttributes>(m, "RouteAttributes")
        .def(py::init<>())
        .def_readwrite("length_m", &RouteAttributes::length_m)
        .def_readwrite("total_gain", &RouteAttributes::total_gain)
        .def_readwrite("total_loss", &RouteAttributes::total_loss)
        .def_readwrite("grade", &RouteAttributes::grade)
        .def_readwrite("is_circular", &RouteAttributes::is_circular)
        .def_readwrite("is_out_and_back", &RouteAttributes::is_out_and_back)
        .def_readwrite("start_place", &RouteAttributes::start_place)
        .def_readwrite("end_place", &RouteAttributes::end_place)
        .def_readwrite("along_surfacewater", &RouteAttributes::along_surfacewater)
        .def_readwrite("along_coast", &RouteAttributes::along_coast)
        .def_readwrite("is_coastal", &RouteAttributes::is_coastal)
        .def_readwrite("in_national_parks", &RouteAttributes::in_national_parks)
        .def_readwrite("in_greenspace", &RouteAttributes::in_greenspace)
        .def_readwrite("in_woodland", &RouteAttributes::in_woodland)
        .def_readwrite("in_urban", &RouteAttributes::in_urban);

    m.def("compute_grade", &compute_grade, py::arg("total_gain"), py::arg("length_m"));
    m.def("format_grade", &format_grade, py::arg("grade"));
    m.def("format_km", &format_km, py::arg("length_m"));
    m.def("int_to_words", &int_to_words, py::arg("n"));
    m.def("estimate_token_count", [](const std::string& t) { return estimate_token_count(t); }, py::arg("text"));
    m.def("description_grammar", [] { return std::string(description_grammar()); });

    m.def(
        "route_length", [](const std::vector<std::pair<double, double>>& pts) { return route_length(to_route("r", pts)); },
        py::arg("points"));
    m.def(
        "is_circular", [](const std::vector<std::pair<double, double>>& pts) { return is_circular(to_route("r", pts)); },
        py::arg("points"));
    m.def(
        "is_out_and_back",
        [](const std::vector<std::pair<double, double>>& pts) { return is_out_and_back(to_route("r", pts)); },
        py::arg("points"));
    m.def(
        "filter_route",
        [](const std::vector<std::pair<double, double>>& pts) {
            return std::string(filter_verdict_name(filter_route(to_route("r", pts))));
        },
        py::arg("points"));

    m.def(
        "describe",
        [](const std::string& route_id, const RouteAttributes& attrs, std::uint64_t seed, double swap_probability,
           std::optional<bool> km_words, std::optional<bool> gain_words) {
            DescriptionConfig cfg;
            cfg.seed = seed;
            cfg.word_swap_probability = swap_probability;
            cfg.overrides.km_words = km_words;
            cfg.overrides.gain_words = gain_words;
            cfg.validate();
            return generate_description(route_id, attrs, cfg).text;
        },
        py::arg("route_id"), py::arg("attrs"), py::arg("seed") = 0, py::arg("swap_probability") = 0.5,
        py::arg("km_words") = py::none(), py::arg("gain_words") = py::none());

    m.def(
        "embed", [](const std::string& text, int dimension) { return reference_embed(text, dimension).values; },
        py::arg("text"), py::arg("dimension") = 256);
    m.def(
        "cosine",
        [](std::vector<double> a, std::vector<double> b) {
            return cosine_similarity({std::move(a), false}, {std::move(b), false});
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "rank",
        [](std::vector<double> query, const std::vector<std::pair<std::string, std::vector<double>>>& docs, int jobs) {
            std::vector<Document> d;
            d.reserve(docs.size());
            for (const auto& [id, v] : docs) d.push_back({id, {v, false}});
            const auto ranked = rank_documents("q", {std::move(query), false}, d, jobs);
            std::vector<std::pair<std::string, double>> out;
            out.reserve(ranked.entries.size());
            for (const auto& e : ranked.entries) out.emplace_back(e.route_id, e.score);
            return out;
        },
        py::arg("query"), py::arg("documents"), py::arg("jobs") = 1);
    m.def(
        "cumulative_mean", [](const std::vector<double>& v) { return cumulative_mean(v); }, py::arg("values"));

    m.def(
        "synth_routes",
        [](std::size_t n, std::uint64_t seed) {
            SynthSpec spec;
            spec.n_routes = n;
            spec.seed = seed;
            const auto corpus = generate_corpus(spec);
            py::list out;
            for (std::size_t i = 0; i < corpus.routes.size(); ++i) {
                py::dict row;
                row["id"] = corpus.routes[i].id;
                row["points"] = to_pairs(corpus.routes[i]);
                row["shape"] = std::string(route_shape_name(corpus.truth[i].shape));
                row["attrs"] = corpus.truth[i].attrs;
                out.append(row);
            }
            return out;
        },
        py::arg("n"), py::arg("seed") = 1);

    m.def(
        "run_pipeline",
        [](const std::filesystem::path& workdir, std::size_t n_routes, std::uint64_t seed, int jobs, bool force) {
            PipelineConfig cfg;
            cfg.workdir = workdir;
            cfg.synth.n_routes = n_routes;
            cfg.synth.seed = seed;
            cfg.description.seed = seed;
            cfg.jobs = jobs;
            py::gil_scoped_release release;
            Pipeline p(cfg);
            std::vector<std::pair<std::string, bool>> out;
            for (const auto& o : p.run_all(force)) out.emplace_back(std::string(stage_name(o.stage)), o.skipped);
            return out;
        },
        py::arg("workdir"), py::arg("n_routes") = 1000, py::arg("seed") = 1, py::arg("jobs") = 1,
        py::arg("force") = false);
}
