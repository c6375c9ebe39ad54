// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "trailrank/describe.hpp"
#include "trailrank/embed.hpp"
#include "trailrank/eval.hpp"
#include "trailrank/geo_core.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/pipeline.hpp"
#include "trailrank/synth.hpp"

using namespace trailrank;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s) {
        o.pass = false;
        o.detail += " (over the " + std::to_string(static_cast<int>(limit_s)) + " s limit)";
    }
    if (!o.pass) ++g_failures;
    std::printf("[%s] %2d %-28s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int hardware_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// rankings.tsv -> query_id -> route ids in rank order
std::map<std::string, std::vector<std::string>> read_rank_order(const std::filesystem::path& path) {
    std::map<std::string, std::vector<std::string>> out;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto cols = io::split(line, '\t');
        auto& v = out[cols.at(0)];
        if (std::stoul(cols.at(1)) != v.size() + 1) throw std::runtime_error("rankings out of order");
        v.push_back(cols.at(2));
    }
    return out;
}

Outcome grade_anchor() {
    if (format_grade(compute_grade(130, 10000)) != "1.3") return {false, "130 m over 10 km does not render 1.3"};
    for (int len = 25051; len <= 25929; ++len) {
        if (format_grade(compute_grade(739, len)) != "2.9") {
            return {false, "gain 739 over " + std::to_string(len) + " m renders " + format_grade(compute_grade(739, len))};
        }
    }
    return {true, "1.3 and 2.9 across 879 lengths"};
}

Outcome km_anchor() {
    DescriptionConfig cfg;
    cfg.overrides.km_words = false;
    for (int len = 2869; len <= 2927; ++len) {
        RouteAttributes a;
        a.length_m = len;
        a.total_gain = 142;
        a.total_loss = 142;
        a.grade = compute_grade(a.total_gain, a.length_m);
        a.start_place = "Glenuig Bay, Highland";
        a.end_place = "Smirisary, Highland";
        a.along_coast = 62;
        a.is_coastal = true;
        const auto d = generate_description("glenuig", a, cfg);
        if (!d.text.starts_with("This is a 2 km coastal walk")) return {false, "length " + std::to_string(len) + ": " + d.text};
    }
    return {true, "59 lengths open with \"This is a 2 km coastal walk\""};
}

Outcome golden_description() {
    const std::string expected =
        "This is a circular, ten km walk that begins and ends in Priddy, Somerset. Total elevation gain is 130 metres, "
        "and elevation grade is 1.3.";
    RouteAttributes a;
    a.length_m = 10000;
    a.total_gain = 130;
    a.total_loss = 130;
    a.grade = compute_grade(a.total_gain, a.length_m);
    a.is_circular = true;
    a.start_place = "Priddy, Somerset";
    a.end_place = "Priddy, Somerset";
    DescriptionConfig cfg;
    cfg.overrides.km_words = true;
    cfg.overrides.gain_words = false;
    const auto d = generate_description("priddy", a, cfg);
    if (d.text != expected) return {false, "got: " + d.text};
    // The published count is 138; the sentence itself has 137 characters.
    return {true, "byte-identical, " + std::to_string(d.char_length) + " chars (published count 138)"};
}

Outcome filter_anchor() {
    const auto line = [](double len) {
        RoutePolyline r{"f", {{0, 0}}};
        for (double s = 0; s < len;) {
            s = std::min(len, s + 400);
            r.points.push_back({s, 0});
        }
        return r;
    };
    const bool ok = filter_route(line(999)) == FilterVerdict::TooShort &&
                    filter_route(line(50001)) == FilterVerdict::TooLong &&
                    filter_route(line(1000)) == FilterVerdict::Keep && filter_route(line(50000)) == FilterVerdict::Keep;
    return {ok, ok ? "999 short, 50001 long, 1000 and 50000 kept" : "boundary verdicts wrong"};
}

Outcome predominance_rate() {
    SynthSpec spec;
    spec.seed = 2024;
    spec.n_routes = 10000;
    const int jobs = hardware_jobs();
    const auto corpus = generate_corpus(spec, jobs);
    const GeoContext ctx(corpus.grid, corpus.layers, corpus.places);
    std::vector<std::size_t> hits(corpus.routes.size(), 0);
    const DescriptionConfig cfg;
    std::vector<std::jthread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < corpus.routes.size(); i = next++) {
                const auto a = compute_attributes(corpus.routes[i], ctx);
                hits[i] = generate_description(corpus.routes[i].id, a, cfg).text.find("predominantly") != std::string::npos;
            }
        });
    }
    pool.clear();
    const double rate = 100.0 * static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::size_t{0})) /
                        static_cast<double>(hits.size());
    return {std::abs(rate - 8.0) <= 2.0, fmt("%.2f%% of 10000 descriptions", rate)};
}

Outcome token_anchor() {
    std::string text = "This is a 7 km coastal walk. ";
    while (text.size() < 589) text += "x";
    text.resize(589);
    const auto n = estimate_token_count(text);
    const bool ok = n == 131 && std::abs(static_cast<double>(n) - 129.0) <= 12.9;
    return {ok, std::to_string(n) + " tokens for 589 chars"};
}

Outcome curve_endpoints(const std::filesystem::path& workdir) {
    auto cfg = PipelineConfig{};
    cfg.workdir = workdir;
    cfg.synth.n_routes = 1000;
    cfg.synth.seed = 11;
    cfg.jobs = hardware_jobs();
    Pipeline p(cfg);
    p.run_all(true);

    const auto attrs = io::read_attributes_tsv(p.attributes_path());
    std::map<std::string, RouteAttributes> by_id;
    for (const auto& r : attrs) by_id[r.route_id] = r.attrs;
    const auto order = read_rank_order(p.rankings_path());
    const auto curves = read_curves_csv(p.curves_path());
    if (curves.size() != 46) return {false, std::to_string(curves.size()) + " curves, expected 46"};

    double worst = 0;
    for (const auto& c : curves) {
        long double sum = 0;
        for (const auto& r : attrs) sum += attribute_value(r.attrs, c.attribute);
        const double mean = static_cast<double>(sum / attrs.size());
        if (c.ranks.back() != attrs.size()) return {false, c.query_id + "/" + c.attribute + " is not full length"};
        const double rel = mean == 0 ? std::abs(c.values.back()) : std::abs(c.values.back() - mean) / std::abs(mean);
        worst = std::max(worst, rel);
        const double top = attribute_value(by_id.at(order.at(c.query_id).front()), c.attribute);
        if (c.values.front() != top) return {false, c.query_id + "/" + c.attribute + " leftmost point differs"};
    }
    return {worst <= 1e-9, "46 curves, worst endpoint error " + fmt("%.2e", worst)};
}

Outcome geometry_oracles() {
    // Mixed corpus for the invariants.
    SynthSpec spec;
    spec.seed = 808;
    spec.n_routes = 200;
    const auto corpus = generate_corpus(spec, hardware_jobs());
    const GeoContext ctx(corpus.grid, corpus.layers, corpus.places);
    const double de = 3217.75, dn = -1408.5;
    const GeoContext moved(test::translate(corpus.grid, de, dn), test::translate(corpus.layers, de, dn),
                           test::translate(corpus.places, de, dn));
    const auto pct = [](const RouteAttributes& a) {
        return std::array<double, 6>{a.along_surfacewater, a.along_coast, a.in_national_parks,
                                     a.in_greenspace,      a.in_woodland, a.in_urban};
    };
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    std::size_t violations = 0;
    std::string first;
    std::map<std::string, int> kinds;
    double worst_swap = 0;
    const auto note = [&](const std::string& what) {
        if (violations++ == 0) first = what;
        ++kinds[what.substr(what.find(' ') + 1, 18)];
    };
    for (const auto& route : corpus.routes) {
        const auto a = compute_attributes(route, ctx);
        const auto r = compute_attributes(reversed(route), ctx);
        if (rel(r.length_m, a.length_m) > 1e-9) note(route.id + " reversal length");
        for (std::size_t k = 0; k < 6; ++k) {
            if (std::abs(pct(r)[k] - pct(a)[k]) > 1.0) note(route.id + " reversal percent");
        }
        // Reversal moves the 10 m samples, so gain and loss swap only up to sampling.
        const auto close = [](double x, double y) { return std::abs(x - y) <= std::max(0.01 * std::abs(y), 2.0); };
        worst_swap = std::max({worst_swap, std::abs(r.total_gain - a.total_loss), std::abs(r.total_loss - a.total_gain)});
        if (!close(r.total_gain, a.total_loss) || !close(r.total_loss, a.total_gain)) note(route.id + " reversal gain/loss");
        if (r.start_place != a.end_place || r.end_place != a.start_place) note(route.id + " reversal places");
        if (r.is_circular != a.is_circular || r.is_out_and_back != a.is_out_and_back) note(route.id + " reversal flags");

        const auto t = compute_attributes(test::translate(route, de, dn), moved);
        if (rel(t.length_m, a.length_m) > 1e-9) note(route.id + " translation length");
        for (std::size_t k = 0; k < 6; ++k) {
            if (std::abs(pct(t)[k] - pct(a)[k]) > 1.0) note(route.id + " translation percent");
        }
        if (std::abs(t.total_gain - a.total_gain) > 1e-6 * std::max(1.0, a.total_gain)) note(route.id + " translation gain");
        if (t.start_place != a.start_place || t.end_place != a.end_place) note(route.id + " translation places");
        if (t.is_circular != a.is_circular || t.is_out_and_back != a.is_out_and_back || t.is_coastal != a.is_coastal) {
            note(route.id + " translation flags");
        }

        for (const double s : {0.5, 2.0, 3.0}) {
            const Point2D c = route.points.front();
            const GeoContext stretched(test::scale(corpus.grid, c, s), {}, {});
            const auto sc = compute_attributes(test::scale(route, c, s), stretched);
            if (rel(sc.length_m, s * a.length_m) > 1e-9) note(route.id + " scaled length");
            if (rel(sc.grade, a.grade / s) > 0.02 && std::abs(sc.grade - a.grade / s) > 0.05) {
                note(route.id + " scaled grade " + std::to_string(sc.grade) + " vs " + std::to_string(a.grade / s));
            }
        }
    }

    // Out-and-back classifier on constructed retraces and loops.
    SynthSpec shapes;
    shapes.seed = 909;
    shapes.n_routes = 600;
    shapes.circular_fraction = 1.0;
    shapes.out_and_back_fraction = 0.5;
    shapes.predominant_fraction = 0.0;
    const auto sc = generate_corpus(shapes, hardware_jobs());
    std::size_t retrace = 0, loops = 0, agree = 0;
    for (std::size_t i = 0; i < sc.routes.size() && (retrace < 100 || loops < 100); ++i) {
        const auto shape = sc.truth[i].shape;
        if (shape == RouteShape::OutAndBack && retrace < 100) {
            ++retrace;
        } else if (shape == RouteShape::Loop && loops < 100) {
            ++loops;
        } else {
            continue;
        }
        agree += is_out_and_back(sc.routes[i]) == (shape == RouteShape::OutAndBack);
    }
    std::string detail = std::to_string(corpus.routes.size()) + " routes, " + std::to_string(violations) +
                         " invariant violations; out-and-back " + std::to_string(agree) + "/" +
                         std::to_string(retrace + loops) + " (" + std::to_string(retrace) + " retrace, " +
                         std::to_string(loops) + " loop)";
    detail += "; worst gain/loss swap error " + fmt("%.3f m", worst_swap);
    if (!first.empty()) detail += "; first: " + first;
    for (const auto& [k, n] : kinds) detail += "; " + k + " x" + std::to_string(n);
    return {violations == 0 && retrace == 100 && loops == 100 && agree == 200, detail};
}

Outcome ranking_oracle() {
    std::mt19937_64 gen(90210);
    std::normal_distribution<double> n;
    const int dim = 256;
    std::vector<Document> docs(10000);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::vector<double> v(dim);
        for (auto& c : v) c = n(gen);
        docs[i] = {"doc" + std::to_string(i), normalized(std::move(v))};
    }
    for (std::size_t i = 0; i < 300; ++i) docs[9000 + i].vector = docs[i].vector;  // exact ties
    std::shuffle(docs.begin(), docs.end(), gen);
    std::vector<double> qv(dim);
    for (auto& c : qv) c = n(gen);
    const auto q = normalized(qv);

    const auto ranked = rank_documents("q", q, docs, hardware_jobs());

    double qq = 0;
    for (const double c : q.values) qq += c * c;
    std::vector<std::pair<double, std::string>> oracle;
    oracle.reserve(docs.size());
    for (const auto& d : docs) {
        double s = 0, n2 = 0;
        for (int k = 0; k < dim; ++k) {
            s += q.values[static_cast<std::size_t>(k)] * d.vector.values[static_cast<std::size_t>(k)];
            n2 += d.vector.values[static_cast<std::size_t>(k)] * d.vector.values[static_cast<std::size_t>(k)];
        }
        oracle.emplace_back(std::clamp(s / (std::sqrt(qq) * std::sqrt(n2)), -1.0, 1.0), d.route_id);
    }
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        mismatches += ranked.entries[i].route_id != oracle[i].second || ranked.entries[i].score != oracle[i].first;
    }
    return {mismatches == 0 && ranked.entries.size() == 10000,
            "10000 docs (300 tied pairs), " + std::to_string(mismatches) + " mismatches"};
}

Outcome determinism(const std::filesystem::path& base) {
    const auto run = [&](const std::filesystem::path& workdir) -> int {
#ifdef TRAILRANK_CLI
        const std::string cmd = "TRAILRANK_WORKDIR='" + workdir.string() + "' '" + TRAILRANK_CLI +
                                "' all -q --routes 1000 --seed 31 --jobs " + std::to_string(hardware_jobs());
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
        PipelineConfig cfg;
        cfg.workdir = workdir;
        cfg.synth.n_routes = 1000;
        cfg.synth.seed = 31;
        cfg.description.seed = 31;
        Pipeline p(cfg);
        p.run_all();
        return 0;
#endif
    };
    const auto work = base / "det";
    std::filesystem::remove_all(work);
    if (const int rc = run(work); rc != 0) return {false, "first run exited " + std::to_string(rc)};
    std::map<std::string, std::string> first;
    for (const auto& e : std::filesystem::directory_iterator(work)) {
        const auto ext = e.path().extension();
        if (ext == ".csv" || ext == ".svg") first[e.path().filename().string()] = slurp(e.path());
    }
    std::filesystem::remove_all(work);
    if (const int rc = run(work); rc != 0) return {false, "second run exited " + std::to_string(rc)};
    std::size_t same = 0;
    for (const auto& [name, bytes] : first) same += slurp(work / name) == bytes;
    const bool ok = same == first.size() && first.size() >= 2 && first.count("curves.csv");
    return {ok, std::to_string(same) + "/" + std::to_string(first.size()) + " CSV/SVG files byte-identical"};
}

Outcome seaside_direction(const std::filesystem::path& workdir) {
    // Reuses the 1000-route run from the endpoint check.
    const auto attrs = io::read_attributes_tsv(workdir / "attributes.tsv");
    std::map<std::string, double> coast;
    double total = 0;
    for (const auto& r : attrs) {
        coast[r.route_id] = r.attrs.along_coast;
        total += r.attrs.along_coast;
    }
    const double corpus_mean = total / static_cast<double>(attrs.size());
    const auto& queries = builtin_queries();
    const auto q = std::find_if(queries.begin(), queries.end(),
                                [](const Query& x) { return x.text == "what is a walk by the seaside"; });
    const auto order = read_rank_order(workdir / "rankings.tsv").at(q->id);
    double top = 0;
    for (std::size_t i = 0; i < 100; ++i) top += coast.at(order[i]);
    top /= 100.0;
    return {top > corpus_mean, "top-100 mean along_coast " + fmt("%.2f", top) + " vs corpus " + fmt("%.2f", corpus_mean)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    test::TempDir scratch("acceptance");
    const auto run1000 = scratch / "run1000";

    criterion(1, "grade formula anchor", 1, grade_anchor);
    criterion(2, "km truncation anchor", 1, km_anchor);
    criterion(3, "golden description", 1, golden_description);
    criterion(4, "filter boundaries", 0, filter_anchor);
    criterion(5, "predominance rate", 30, predominance_rate);
    criterion(6, "token estimate anchor", 0, token_anchor);
    criterion(7, "curve endpoints", 60, [&] { return curve_endpoints(run1000); });
    criterion(8, "geometry oracle suite", 0, geometry_oracles);
    criterion(9, "ranking oracle", 5, ranking_oracle);
    criterion(10, "end-to-end determinism", 600, [&] { return determinism(scratch.path()); });
    criterion(11, "seaside directional check", 0, [&] { return seaside_direction(run1000); });

    std::printf("%s: %d of 11 criteria failed\n", g_failures ? "FAILED" : "OK", g_failures);
    return g_failures == 0 ? 0 : 1;
}
