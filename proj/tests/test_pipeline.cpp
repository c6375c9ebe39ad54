#include <doctest.h>

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/eval.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/pipeline.hpp"

using namespace trailrank;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

PipelineConfig small_config(const std::filesystem::path& workdir, std::size_t n = 100) {
    PipelineConfig c;
    c.workdir = workdir;
    c.synth.n_routes = n;
    c.synth.seed = 5;
    c.jobs = 2;
    return c;
}

struct QuietLogs {
    QuietLogs() : prev(spdlog::get_level()) { spdlog::set_level(spdlog::level::warn); }
    ~QuietLogs() { spdlog::set_level(prev); }
    spdlog::level::level_enum prev;
};

#ifdef TRAILRANK_CLI
int run_cli(const std::string& args, const std::filesystem::path& workdir) {
    const std::string cmd = "TRAILRANK_WORKDIR='" + workdir.string() + "' '" + TRAILRANK_CLI + "' " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("stage names") {
    for (auto s : {Stage::Synth, Stage::Attributes, Stage::Describe, Stage::Embed, Stage::Rank, Stage::Evaluate}) {
        CHECK(stage_from_name(stage_name(s)) == s);
    }
    CHECK_FALSE(stage_from_name("all").has_value());
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(Errc::InvalidArgument) == kExitUsage);
    CHECK(exit_code_for(Errc::InfeasibleSpec) == kExitUsage);
    CHECK(exit_code_for(Errc::TransportError) == kExitProvider);
    CHECK(exit_code_for(Errc::MalformedResponse) == kExitProvider);
    CHECK(exit_code_for(Errc::DimensionMismatch) == kExitProvider);
    CHECK(exit_code_for(Errc::ParseError) == kExitData);
    CHECK(exit_code_for(Errc::MissingAttributes) == kExitData);
    const StageError e(Stage::Rank, Error(Errc::ZeroVector, "query 'q01'"));
    CHECK(std::string(e.what()).find("rank") != std::string::npos);
    CHECK(e.code() == Errc::ZeroVector);
}

TEST_CASE("ini config") {
    test::TempDir dir("ini");
    std::ofstream(dir / "c.ini") << "[paths]\nworkdir = work\n\n[provider]\nkind = reference\ndimension = 128\n\n"
                                    "[description]\nseed = 9\nword_swap_probability = 0.25\n\n"
                                    "[synth]\nn_routes = 42\nwoodland_fraction = 0.6\n\n[evaluate]\nthin = true\n\n"
                                    "[run]\njobs = 3\n";
    const auto c = PipelineConfig::from_ini(dir / "c.ini");
    CHECK(c.workdir == dir / "work");
    CHECK(c.provider.dimension == 128);
    CHECK(c.description.seed == 9);
    CHECK(c.description.word_swap_probability == 0.25);
    CHECK(c.synth.n_routes == 42);
    CHECK(c.synth.class_fraction[static_cast<std::size_t>(LayerClass::Woodland)] == 0.6);
    CHECK(c.thin);
    CHECK(c.jobs == 3);
    CHECK(c.uses_synthetic_corpus());

    std::ofstream(dir / "bad.ini") << "[provider]\ncolour = blue\n";
    CHECK_THROWS_AS(PipelineConfig::from_ini(dir / "bad.ini"), Error);
    std::ofstream(dir / "bad2.ini") << "[nope]\nx = 1\n";
    CHECK_THROWS_AS(PipelineConfig::from_ini(dir / "bad2.ini"), Error);
    std::ofstream(dir / "bad3.ini") << "[run]\njobs = many\n";
    CHECK_THROWS_AS(PipelineConfig::from_ini(dir / "bad3.ini"), Error);
}

TEST_CASE("workdir environment override") {
    PipelineConfig c;
    ::setenv("TRAILRANK_WORKDIR", "/tmp/somewhere-else", 1);
    c.apply_environment();
    ::unsetenv("TRAILRANK_WORKDIR");
    CHECK(c.workdir == "/tmp/somewhere-else");
}

TEST_CASE("workdir lock") {
    test::TempDir dir("lock");
    Pipeline first(small_config(dir.path()));
    CHECK_THROWS_AS(Pipeline(small_config(dir.path())), Error);
}

TEST_CASE("full chain, then everything is skipped") {
    QuietLogs quiet;
    test::TempDir dir("chain");
    Pipeline p(small_config(dir.path()));
    const auto first = p.run_all();
    REQUIRE(first.size() == 6);
    for (const auto& o : first) CHECK_FALSE(o.skipped);
    const auto curves = read_curves_csv(p.curves_path());
    CHECK(curves.size() == 46);
    CHECK(std::filesystem::exists(p.report_path()));
    CHECK(std::filesystem::exists(p.plot_path("length_m")));
    const auto csv = slurp(p.curves_path());

    const auto second = p.run_all();
    for (const auto& o : second) CHECK(o.skipped);
    CHECK(slurp(p.curves_path()) == csv);

    const auto forced = p.run(Stage::Evaluate, true);
    CHECK_FALSE(forced.skipped);
    CHECK(slurp(p.curves_path()) == csv);
}

TEST_CASE("config changes invalidate later stages") {
    QuietLogs quiet;
    test::TempDir dir("refresh");
    {
        Pipeline p(small_config(dir.path(), 60));
        p.run_all();
    }
    auto c = small_config(dir.path(), 60);
    c.description.seed = 1234;
    Pipeline p(c);
    const auto outcome = p.run_all();
    CHECK(outcome[0].skipped);  // synth
    CHECK(outcome[1].skipped);  // attributes
    CHECK_FALSE(outcome[2].skipped);
    CHECK_FALSE(outcome[5].skipped);
}

TEST_CASE("short routes are rejected") {
    QuietLogs quiet;
    test::TempDir dir("reject");
    {
        Pipeline p(small_config(dir.path(), 30));
        p.run(Stage::Synth);
    }
    const auto corpus = dir.path() / "corpus";
    auto routes = io::read_routes_jsonl(corpus / "routes.jsonl");
    const Point2D s = routes[0].points.front();
    routes.push_back({"tiny", {s, {s.easting + 450, s.northing}, {s.easting + 900, s.northing}}});
    io::write_routes_jsonl(corpus / "routes.jsonl", routes);

    auto c = small_config(dir.path() / "work", 30);
    c.routes = corpus / "routes.jsonl";
    c.layers = corpus / "layers";
    c.dem = corpus / "dem.asc";
    c.places = corpus / "places.tsv";
    Pipeline p(c);
    p.run(Stage::Attributes);
    const auto kept = io::read_attributes_tsv(p.attributes_path());
    CHECK(kept.size() == 30);
    for (const auto& r : kept) CHECK(r.route_id != "tiny");
    CHECK(slurp(p.rejected_path()) == "route_id\treason\ntiny\tTooShort\n");
}

TEST_CASE("missing inputs name the stage") {
    QuietLogs quiet;
    test::TempDir dir("missing");
    auto c = small_config(dir.path());
    c.routes = dir / "absent.jsonl";
    Pipeline p(c);
    try {
        p.run(Stage::Attributes);
        FAIL("expected a stage error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("attributes") != std::string::npos);
        CHECK(exit_code_for(e.code()) == kExitData);
    }
}

#ifdef TRAILRANK_CLI
TEST_CASE("command line exit statuses") {
    test::TempDir dir("cli");
    CHECK(run_cli("--help", dir / "w0") == 0);
    CHECK(run_cli("bogus", dir / "w0") == 1);
    CHECK(run_cli("all --jobs 0", dir / "w0") == 1);
    CHECK(run_cli("all --routes 40 --seed 3 -q", dir / "w1") == 0);
    CHECK(std::filesystem::exists(dir / "w1" / "curves.csv"));
    CHECK(run_cli("all --routes 40 --seed 3 -q", dir / "w1") == 0);

    std::ofstream(dir / "bad.ini") << "[paths]\nroutes = nowhere.jsonl\n";
    CHECK(run_cli("attributes -q --config '" + (dir / "bad.ini").string() + "'", dir / "w2") == 2);

    std::ofstream(dir / "unknown.ini") << "[run]\ncolour = red\n";
    CHECK(run_cli("all -q --config '" + (dir / "unknown.ini").string() + "'", dir / "w3") == 1);

    std::ofstream(dir / "remote.ini") << "[provider]\nkind = remote\nendpoint = http://127.0.0.1:1/embed\n"
                                         "model_name = m\nretries = 0\ntimeout_seconds = 2\n";
    CHECK(run_cli("all -q --routes 20 --config '" + (dir / "remote.ini").string() + "'", dir / "w4") == 3);
}
#endif

}
