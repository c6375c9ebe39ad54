#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "support.hpp"
#include "trailrank/errors.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/synth.hpp"

using namespace trailrank;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Errc spec_error(const SynthSpec& s) {
    try {
        s.validate();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("truncated log-normal mean solver") {
    const double mu = solve_length_mu(11289, 1200, 48000, 0.6);
    CHECK(truncated_lognormal_mean(mu, 0.6, 1200, 48000) == doctest::Approx(11289).epsilon(1e-9));
    // Untruncated limit: exp(mu + sigma^2 / 2).
    CHECK(truncated_lognormal_mean(std::log(5000.0), 0.2, 1.0, 1e9) ==
          doctest::Approx(5000 * std::exp(0.02)).epsilon(1e-9));
}

TEST_CASE("empty corpus") {
    SynthSpec spec;
    spec.n_routes = 0;
    const auto c = generate_corpus(spec);
    CHECK(c.routes.empty());
    CHECK(c.truth.empty());
    CHECK(c.places.empty());
}

TEST_CASE("infeasible specs") {
    SynthSpec s;
    CHECK_NOTHROW(s.validate());
    s.coastal_fraction = 0.5;  // more coastal routes than routes near a coast
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    s = {};
    s.out_and_back_fraction = 0.6;
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    s = {};
    s.min_length = 900;
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    s = {};
    s.target_mean_length = 60000;
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    s = {};
    s.circular_fraction = 0.95;
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    s = {};
    s.class_fraction[2] = 1.5;
    CHECK(spec_error(s) == Errc::InfeasibleSpec);
    CHECK_THROWS_AS(generate_corpus(s), Error);
}

TEST_CASE("same seed, same bytes") {
    SynthSpec spec;
    spec.seed = 77;
    spec.n_routes = 50;
    test::TempDir a("synth-a"), b("synth-b");
    write_corpus(generate_corpus(spec, 1), a.path());
    write_corpus(generate_corpus(spec, 4), b.path());
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), a.path());
        CAPTURE(rel.string());
        CHECK(slurp(entry.path()) == slurp(b.path() / rel));
        ++files;
    }
    CHECK(files >= 5);

    spec.seed = 78;
    test::TempDir c("synth-c");
    write_corpus(generate_corpus(spec), c.path());
    CHECK(slurp(a / "routes.jsonl") != slurp(c / "routes.jsonl"));
}

TEST_CASE("written corpus reads back") {
    SynthSpec spec;
    spec.n_routes = 20;
    const auto corpus = generate_corpus(spec);
    test::TempDir dir("synth-io");
    write_corpus(corpus, dir.path());
    const auto routes = io::read_routes_jsonl(dir / "routes.jsonl");
    REQUIRE(routes.size() == corpus.routes.size());
    CHECK(routes[0].points == corpus.routes[0].points);
    CHECK(io::read_layer_dir(dir / "layers").size() == 6);
    const auto grid = io::read_esri_ascii(dir / "dem.asc");
    CHECK(grid.values == corpus.grid.values);
    CHECK(io::read_places_tsv(dir / "places.tsv").size() == corpus.places.size());
    const auto truth = read_ground_truth_tsv(dir / "ground_truth.tsv");
    REQUIRE(truth.size() == corpus.truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(truth[i].route_id == corpus.truth[i].route_id);
        CHECK(truth[i].shape == corpus.truth[i].shape);
        CHECK(truth[i].attrs.length_m == corpus.truth[i].attrs.length_m);
        CHECK(truth[i].attrs.along_coast == corpus.truth[i].attrs.along_coast);
        CHECK(truth[i].attrs.start_place == corpus.truth[i].attrs.start_place);
    }
}

TEST_CASE("corpus statistics follow the spec") {
    SynthSpec spec;
    spec.seed = 3;
    spec.n_routes = 1000;
    const auto corpus = generate_corpus(spec, 2);
    REQUIRE(corpus.truth.size() == 1000);
    double total = 0;
    std::size_t circular = 0, oab = 0, coastal = 0, predominant = 0;
    for (const auto& t : corpus.truth) {
        total += t.attrs.length_m;
        CHECK(t.attrs.length_m >= spec.min_length - 1e-6);
        CHECK(t.attrs.length_m <= spec.max_length + 1e-6);
        circular += t.attrs.is_circular;
        oab += t.attrs.is_out_and_back;
        coastal += t.attrs.is_coastal;
        predominant += std::abs(t.attrs.total_gain - t.attrs.total_loss) >= 100.0;
        CHECK((!t.attrs.is_out_and_back || t.attrs.is_circular));
        CHECK((t.shape == RouteShape::OutAndBack) == t.attrs.is_out_and_back);
    }
    CHECK(total / 1000 == doctest::Approx(spec.target_mean_length).epsilon(0.05));
    CHECK(circular / 1000.0 == doctest::Approx(spec.circular_fraction).epsilon(0.2));
    CHECK(oab / 1000.0 == doctest::Approx(spec.out_and_back_fraction).epsilon(0.3));
    CHECK(coastal / 1000.0 == doctest::Approx(spec.coastal_fraction).epsilon(0.3));
    CHECK(predominant / 1000.0 == doctest::Approx(spec.predominant_fraction).epsilon(0.3));
}

TEST_CASE("every generated route survives the filter") {
    SynthSpec spec;
    spec.seed = 12;
    spec.n_routes = 200;
    for (const auto& r : generate_corpus(spec).routes) CHECK(filter_route(r) == FilterVerdict::Keep);
}

}
