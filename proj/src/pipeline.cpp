#include "trailrank/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <spdlog/spdlog.h>
#include <sstream>

#include "json.hpp"
#include "trailrank/eval.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/parallel.hpp"
#include "trailrank/rng.hpp"

namespace fs = std::filesystem;

namespace trailrank {

// ---------------------------------------------------------------------------
// Config

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        return io::parse_double(v);
    } catch (const Error&) {
        throw Error(Errc::InvalidArgument, "config key '" + key + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw Error(Errc::InvalidArgument, "config key '" + key + "' expects an unsigned integer, got '" + v + "'");
    }
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const auto u = to_u64(key, v);
    if (u > 1'000'000'000) throw Error(Errc::InvalidArgument, "config key '" + key + "' is too large");
    return static_cast<int>(u);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(Errc::InvalidArgument, "config key '" + key + "' expects a boolean, got '" + v + "'");
}

std::size_t class_index(std::string_view stem) {
    const auto cls = layer_class_from_stem(stem);
    return static_cast<std::size_t>(*cls);
}

}  // namespace

PipelineConfig PipelineConfig::from_ini(const fs::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(Errc::InvalidArgument, "cannot read config: " + std::string(e.what()));
    }
    PipelineConfig c;
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const auto resolve = [&](const std::string& v) {
        const fs::path p(v);
        return p.is_absolute() ? p : base / p;
    };

    for (const auto& [section, body] : tree) {
        for (const auto& [key, node] : body) {
            const std::string v = node.get_value<std::string>();
            const std::string full = section + "." + key;
            bool known = true;
            if (section == "paths") {
                if (key == "workdir") c.workdir = resolve(v);
                else if (key == "routes") c.routes = resolve(v);
                else if (key == "layers") c.layers = resolve(v);
                else if (key == "dem") c.dem = resolve(v);
                else if (key == "places") c.places = resolve(v);
                else if (key == "queries") c.queries = resolve(v);
                else known = false;
            } else if (section == "provider") {
                auto& p = c.provider;
                if (key == "kind") {
                    if (v == "reference") p.kind = ProviderKind::Reference;
                    else if (v == "remote") p.kind = ProviderKind::Remote;
                    else throw Error(Errc::InvalidArgument, "provider.kind must be reference or remote");
                } else if (key == "dimension") p.dimension = to_int(full, v);
                else if (key == "endpoint") p.endpoint = v;
                else if (key == "model_name") p.model_name = v;
                else if (key == "max_tokens") p.max_tokens = to_int(full, v);
                else if (key == "batch_size") p.batch_size = to_int(full, v);
                else if (key == "timeout_seconds") p.timeout_seconds = to_double(full, v);
                else if (key == "retries") p.retries = to_int(full, v);
                else known = false;
            } else if (section == "description") {
                auto& d = c.description;
                if (key == "seed") d.seed = to_u64(full, v);
                else if (key == "word_swap_probability") d.word_swap_probability = to_double(full, v);
                else if (key == "mention_threshold") d.mention_threshold = to_double(full, v);
                else if (key == "predominance_threshold") d.predominance_threshold = to_double(full, v);
                else if (key == "most_probability") d.most_probability = to_double(full, v);
                else known = false;
            } else if (section == "synth") {
                auto& s = c.synth;
                if (key == "seed") s.seed = to_u64(full, v);
                else if (key == "n_routes") s.n_routes = to_u64(full, v);
                else if (key == "target_mean_length") s.target_mean_length = to_double(full, v);
                else if (key == "min_length") s.min_length = to_double(full, v);
                else if (key == "max_length") s.max_length = to_double(full, v);
                else if (key == "length_sigma") s.length_sigma = to_double(full, v);
                else if (key == "circular_fraction") s.circular_fraction = to_double(full, v);
                else if (key == "out_and_back_fraction") s.out_and_back_fraction = to_double(full, v);
                else if (key == "coastal_fraction") s.coastal_fraction = to_double(full, v);
                else if (key == "full_coverage_probability") s.full_coverage_probability = to_double(full, v);
                else if (key == "predominant_fraction") s.predominant_fraction = to_double(full, v);
                else if (key == "unnamed_fraction") s.unnamed_fraction = to_double(full, v);
                else if (key == "amplitude_min") s.amplitude_min = to_double(full, v);
                else if (key == "amplitude_max") s.amplitude_max = to_double(full, v);
                else if (key == "min_wavelength") s.min_wavelength = to_double(full, v);
                else if (key == "cell_size") s.cell_size = to_double(full, v);
                else if (key.ends_with("_fraction") && layer_class_from_stem(key.substr(0, key.size() - 9))) {
                    s.class_fraction[class_index(key.substr(0, key.size() - 9))] = to_double(full, v);
                } else known = false;
            } else if (section == "evaluate") {
                if (key == "thin") c.thin = to_bool(full, v);
                else known = false;
            } else if (section == "run") {
                if (key == "jobs") c.jobs = std::max(1, to_int(full, v));
                else if (key == "sample_step") c.sample_step = to_double(full, v);
                else known = false;
            } else {
                throw Error(Errc::InvalidArgument, "unknown config section [" + section + "]");
            }
            if (!known) throw Error(Errc::InvalidArgument, "unknown config key '" + full + "'");
        }
    }
    return c;
}

void PipelineConfig::apply_environment() {
    if (const char* w = std::getenv("TRAILRANK_WORKDIR"); w && *w) workdir = w;
}

fs::path PipelineConfig::routes_path() const { return routes.empty() ? corpus_dir() / "routes.jsonl" : routes; }
fs::path PipelineConfig::layers_path() const { return layers.empty() ? corpus_dir() / "layers" : layers; }
fs::path PipelineConfig::dem_path() const { return dem.empty() ? corpus_dir() / "dem.asc" : dem; }
fs::path PipelineConfig::places_path() const { return places.empty() ? corpus_dir() / "places.tsv" : places; }

// ---------------------------------------------------------------------------
// Stages

std::string_view stage_name(Stage s) noexcept {
    switch (s) {
        case Stage::Synth: return "synth";
        case Stage::Attributes: return "attributes";
        case Stage::Describe: return "describe";
        case Stage::Embed: return "embed";
        case Stage::Rank: return "rank";
        case Stage::Evaluate: return "evaluate";
    }
    return "";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
    for (const auto s : {Stage::Synth, Stage::Attributes, Stage::Describe, Stage::Embed, Stage::Rank, Stage::Evaluate}) {
        if (stage_name(s) == name) return s;
    }
    return std::nullopt;
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(cause.code(), "stage '" + std::string(stage_name(stage)) + "' failed: " + cause.what()), stage_(stage) {}

int exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::TransportError:
        case Errc::MalformedResponse:
        case Errc::DimensionMismatch: return kExitProvider;
        case Errc::InvalidArgument:
        case Errc::InfeasibleSpec: return kExitUsage;
        default: return kExitData;
    }
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    std::error_code ec;
    fs::create_directories(config_.workdir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create workdir " + config_.workdir.string() + ": " + ec.message());
    const auto lock = config_.workdir / ".lock";
    lock_fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw Error(Errc::IoError, "cannot open lock file " + lock.string());
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(lock_fd_);
        lock_fd_ = -1;
        throw Error(Errc::IoError, "workdir " + config_.workdir.string() + " is in use by another pipeline");
    }
}

Pipeline::~Pipeline() {
    if (lock_fd_ >= 0) {
        ::flock(lock_fd_, LOCK_UN);
        ::close(lock_fd_);
    }
}

fs::path Pipeline::plot_path(std::string_view attribute) const {
    return config_.workdir / ("plot_" + std::string(attribute) + ".svg");
}

namespace {

std::vector<Query> active_queries(const PipelineConfig& c) {
    return c.queries ? read_queries_tsv(*c.queries) : builtin_queries();
}

std::vector<std::string> plotted_attributes(const std::vector<Query>& queries) {
    std::vector<std::string> out;
    for (const auto& q : queries) {
        for (const auto& a : q.relevant_attributes) {
            if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
        }
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Newest modification time under a path (files or directory trees).
std::optional<fs::file_time_type> newest(const fs::path& p) {
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    if (!fs::is_directory(p, ec)) return fs::last_write_time(p, ec);
    std::optional<fs::file_time_type> best;
    for (const auto& e : fs::recursive_directory_iterator(p, ec)) {
        if (!e.is_regular_file()) continue;
        const auto t = e.last_write_time(ec);
        if (!best || t > *best) best = t;
    }
    return best;
}

std::optional<fs::file_time_type> oldest(const fs::path& p) {
    std::error_code ec;
    if (!fs::exists(p, ec)) return std::nullopt;
    if (!fs::is_directory(p, ec)) return fs::last_write_time(p, ec);
    std::optional<fs::file_time_type> best;
    for (const auto& e : fs::recursive_directory_iterator(p, ec)) {
        if (!e.is_regular_file()) continue;
        const auto t = e.last_write_time(ec);
        if (!best || t < *best) best = t;
    }
    return best;
}

}  // namespace

std::vector<fs::path> Pipeline::inputs(Stage s) const {
    const auto& c = config_;
    std::vector<fs::path> in;
    if (c.queries && (s == Stage::Embed || s == Stage::Rank || s == Stage::Evaluate)) in.push_back(*c.queries);
    switch (s) {
        case Stage::Synth: break;
        case Stage::Attributes:
            in.insert(in.end(), {c.routes_path(), c.layers_path(), c.dem_path(), c.places_path()});
            break;
        case Stage::Describe: in.push_back(attributes_path()); break;
        case Stage::Embed: in.push_back(descriptions_path()); break;
        case Stage::Rank: in.insert(in.end(), {descriptions_path(), embeddings_path()}); break;
        case Stage::Evaluate: in.insert(in.end(), {rankings_path(), attributes_path()}); break;
    }
    return in;
}

std::vector<fs::path> Pipeline::outputs(Stage s) const {
    switch (s) {
        case Stage::Synth: return {config_.corpus_dir()};
        case Stage::Attributes: return {attributes_path(), rejected_path()};
        case Stage::Describe: return {descriptions_path()};
        case Stage::Embed: return {embeddings_path()};
        case Stage::Rank: return {rankings_path()};
        case Stage::Evaluate: {
            std::vector<fs::path> out{curves_path(), report_path()};
            for (const auto& a : plotted_attributes(active_queries(config_))) out.push_back(plot_path(a));
            return out;
        }
    }
    return {};
}

std::string Pipeline::fingerprint(Stage s) const {
    const auto& c = config_;
    std::ostringstream f;
    f << "stage=" << stage_name(s) << '\n';
    const auto provider = [&] {
        f << "model=" << c.provider.cache_model_name() << "\ndimension=" << c.provider.dimension << '\n';
        if (c.provider.kind == ProviderKind::Remote) f << "endpoint=" << c.provider.endpoint << '\n';
    };
    const auto queries = [&] { f << "queries=" << (c.queries ? c.queries->string() : "builtin") << '\n'; };
    switch (s) {
        case Stage::Synth: {
            const auto& y = c.synth;
            f << y.seed << ' ' << y.n_routes << ' ' << io::format_double(y.target_mean_length) << ' '
              << io::format_double(y.min_length) << ' ' << io::format_double(y.max_length) << ' '
              << io::format_double(y.length_sigma) << ' ' << io::format_double(y.circular_fraction) << ' '
              << io::format_double(y.out_and_back_fraction) << ' ' << io::format_double(y.coastal_fraction) << ' '
              << io::format_double(y.full_coverage_probability) << ' ' << io::format_double(y.predominant_fraction)
              << ' ' << io::format_double(y.unnamed_fraction) << ' ' << io::format_double(y.amplitude_min) << ' '
              << io::format_double(y.amplitude_max) << ' ' << io::format_double(y.min_wavelength) << ' '
              << io::format_double(y.cell_size);
            for (const double v : y.class_fraction) f << ' ' << io::format_double(v);
            break;
        }
        case Stage::Attributes:
            f << c.routes_path().string() << '\n' << c.layers_path().string() << '\n' << c.dem_path().string()
              << '\n' << c.places_path().string() << "\nstep=" << io::format_double(c.sample_step);
            break;
        case Stage::Describe: {
            const auto& d = c.description;
            f << d.seed << ' ' << io::format_double(d.word_swap_probability) << ' '
              << io::format_double(d.mention_threshold) << ' ' << io::format_double(d.predominance_threshold) << ' '
              << io::format_double(d.most_probability);
            break;
        }
        case Stage::Embed:
        case Stage::Rank:
            provider();
            queries();
            break;
        case Stage::Evaluate:
            queries();
            f << "thin=" << c.thin;
            break;
    }
    return hex64(rng::fnv1a64(f.str()));
}

bool Pipeline::up_to_date(Stage s) const {
    const auto stamp = config_.workdir / ".stamps" / stage_name(s);
    std::ifstream in(stamp);
    std::string recorded;
    if (!in || !std::getline(in, recorded) || recorded != fingerprint(s)) return false;

    std::optional<fs::file_time_type> newest_input;
    for (const auto& p : inputs(s)) {
        const auto t = newest(p);
        if (!t) return false;
        if (!newest_input || *t > *newest_input) newest_input = t;
    }
    for (const auto& p : outputs(s)) {
        const auto t = oldest(p);
        if (!t) return false;
        if (newest_input && *t < *newest_input) return false;
    }
    return true;
}

void Pipeline::record(Stage s) const {
    const auto dir = config_.workdir / ".stamps";
    fs::create_directories(dir);
    std::ofstream out(dir / stage_name(s), std::ios::trunc);
    out << fingerprint(s) << '\n';
    if (!out.flush()) throw Error(Errc::IoError, "cannot write stamp for stage " + std::string(stage_name(s)));
}

StageOutcome Pipeline::run(Stage s, bool force) {
    try {
        if (!force && up_to_date(s)) {
            spdlog::info("stage {}: up to date, skipped", stage_name(s));
            return {s, true};
        }
        // Drop the stamp first so an interrupted stage never looks current.
        std::error_code ec;
        fs::remove(config_.workdir / ".stamps" / stage_name(s), ec);
        spdlog::info("stage {}: running", stage_name(s));
        execute(s);
        record(s);
        return {s, false};
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(s, e);
    } catch (const std::filesystem::filesystem_error& e) {
        throw StageError(s, Error(Errc::IoError, e.what()));
    }
}

std::vector<StageOutcome> Pipeline::run_all(bool force) {
    std::vector<StageOutcome> out;
    if (config_.uses_synthetic_corpus()) out.push_back(run(Stage::Synth, force));
    for (const auto s : {Stage::Attributes, Stage::Describe, Stage::Embed, Stage::Rank, Stage::Evaluate}) {
        out.push_back(run(s, force));
    }
    return out;
}

void Pipeline::execute(Stage s) {
    switch (s) {
        case Stage::Synth: run_synth(); break;
        case Stage::Attributes: run_attributes(); break;
        case Stage::Describe: run_describe(); break;
        case Stage::Embed: run_embed(); break;
        case Stage::Rank: run_rank(); break;
        case Stage::Evaluate: run_evaluate(); break;
    }
}

void Pipeline::run_synth() {
    const auto corpus = generate_corpus(config_.synth, config_.jobs);
    std::error_code ec;
    fs::remove_all(config_.corpus_dir(), ec);
    write_corpus(corpus, config_.corpus_dir());
    spdlog::info("synth: wrote {} routes to {}", corpus.routes.size(), config_.corpus_dir().string());
}

void Pipeline::run_attributes() {
    const auto& c = config_;
    auto routes = io::read_routes_jsonl(c.routes_path());
    auto grid = io::read_esri_ascii(c.dem_path());
    auto layers = io::read_layer_dir(c.layers_path());
    auto places = fs::exists(c.places_path()) ? io::read_places_tsv(c.places_path()) : std::vector<NamedPlace>{};
    const GeoContext ctx(std::move(grid), std::move(layers), std::move(places), c.sample_step);

    std::vector<FilterVerdict> verdicts(routes.size());
    for (std::size_t i = 0; i < routes.size(); ++i) verdicts[i] = filter_route(routes[i]);

    std::vector<std::optional<RouteAttributes>> computed(routes.size());
    parallel_for(routes.size(), c.jobs, [&](std::size_t i) {
        if (verdicts[i] != FilterVerdict::Keep) return;
        try {
            computed[i] = compute_attributes(routes[i], ctx);
        } catch (const Error& e) {
            throw Error(e.code(), "route '" + routes[i].id + "': " + e.what());
        }
    });

    std::vector<io::AttributeRecord> kept;
    std::ofstream rejected(rejected_path(), std::ios::binary | std::ios::trunc);
    if (!rejected) throw Error(Errc::IoError, "cannot write " + rejected_path().string());
    rejected << "route_id\treason\n";
    for (std::size_t i = 0; i < routes.size(); ++i) {
        if (verdicts[i] == FilterVerdict::Keep) {
            kept.push_back({routes[i].id, std::move(*computed[i])});
        } else {
            spdlog::info("attributes: route {} rejected ({})", routes[i].id, filter_verdict_name(verdicts[i]));
            rejected << routes[i].id << '\t' << filter_verdict_name(verdicts[i]) << '\n';
        }
    }
    if (!rejected.flush()) throw Error(Errc::IoError, "write failed for " + rejected_path().string());
    io::write_attributes_tsv(attributes_path(), kept);
    spdlog::info("attributes: kept {} of {} routes", kept.size(), routes.size());
}

void Pipeline::run_describe() {
    const auto records = io::read_attributes_tsv(attributes_path());
    std::vector<Description> out(records.size());
    parallel_for(records.size(), config_.jobs, [&](std::size_t i) {
        out[i] = generate_description(records[i].route_id, records[i].attrs, config_.description);
    });
    write_descriptions_jsonl(descriptions_path(), out);
    spdlog::info("describe: wrote {} descriptions", out.size());
}

namespace {

std::vector<std::string> texts_of(const std::vector<Description>& docs) {
    std::vector<std::string> t;
    t.reserve(docs.size());
    for (const auto& d : docs) t.push_back(d.text);
    return t;
}

std::vector<std::string> texts_of(const std::vector<Query>& queries) {
    std::vector<std::string> t;
    t.reserve(queries.size());
    for (const auto& q : queries) t.push_back(q.text);
    return t;
}

}  // namespace

void Pipeline::run_embed() {
    const auto docs = read_descriptions_jsonl(descriptions_path());
    const auto queries = active_queries(config_);
    EmbeddingCache cache(embeddings_path());
    const auto before = cache.size();
    embed_texts(config_.provider, texts_of(docs), cache);
    embed_texts(config_.provider, texts_of(queries), cache);
    // Touch the cache so it is newer than its inputs even when nothing was added.
    if (!fs::exists(embeddings_path())) {
        std::ofstream(embeddings_path(), std::ios::binary) << "TRV1";
    } else {
        fs::last_write_time(embeddings_path(), fs::file_time_type::clock::now());
    }
    spdlog::info("embed: {} new vectors, cache holds {}", cache.size() - before, cache.size());
}

void Pipeline::run_rank() {
    const auto docs = read_descriptions_jsonl(descriptions_path());
    const auto queries = active_queries(config_);
    EmbeddingCache cache(embeddings_path());
    auto doc_vecs = embed_texts(config_.provider, texts_of(docs), cache);
    const auto query_vecs = embed_texts(config_.provider, texts_of(queries), cache);

    std::vector<Document> corpus(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) corpus[i] = {docs[i].route_id, std::move(doc_vecs[i])};

    std::ofstream out(rankings_path(), std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + rankings_path().string());
    out << "query_id\trank\troute_id\tscore\n";
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const auto ranked = rank_documents(queries[q].id, query_vecs[q], corpus, config_.jobs);
        for (std::size_t r = 0; r < ranked.entries.size(); ++r) {
            out << ranked.query_id << '\t' << r + 1 << '\t' << ranked.entries[r].route_id << '\t'
                << io::format_double(ranked.entries[r].score) << '\n';
        }
    }
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + rankings_path().string());
    spdlog::info("rank: ranked {} documents for {} queries", corpus.size(), queries.size());
}

namespace {

std::vector<RankedList> read_rankings(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "query_id\trank\troute_id\tscore") {
        throw Error(Errc::ParseError, path.string() + ": unexpected header");
    }
    std::vector<RankedList> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = io::split(line, '\t');
        if (c.size() != 4) throw Error(Errc::ParseError, path.string() + ": expected 4 columns");
        if (out.empty() || out.back().query_id != c[0]) out.push_back({c[0], {}});
        out.back().entries.push_back({c[2], io::parse_double(c[3])});
    }
    return out;
}

}  // namespace

void Pipeline::run_evaluate() {
    const auto queries = active_queries(config_);
    const auto rankings = read_rankings(rankings_path());
    AttributeTable attrs;
    for (auto& r : io::read_attributes_tsv(attributes_path())) attrs.emplace(r.route_id, std::move(r.attrs));

    auto report = evaluate(rankings, attrs, queries, config_.jobs);
    report.provider = config_.provider.cache_model_name();
    emit_csv(report, curves_path(), config_.thin);

    for (const auto& attr : plotted_attributes(queries)) {
        std::vector<CumulativeCurve> curves;
        for (const auto& c : report.curves) {
            if (c.attribute == attr) curves.push_back(c);
        }
        emit_plot(curves, plot_path(attr), attr);
    }

    nlohmann::ordered_json j;
    j["provider"] = report.provider;
    j["n_routes"] = report.n_routes;
    j["n_queries"] = queries.size();
    j["n_curves"] = report.curves.size();
    auto& corpus = j["corpus"];
    corpus = nlohmann::ordered_json::object();
    for (const auto& [name, s] : report.corpus) corpus[name] = {{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
    auto& curves = j["curves"];
    curves = nlohmann::ordered_json::array();
    for (const auto& c : report.curves) {
        curves.push_back({{"query_id", c.query_id},
                          {"query", c.query_text},
                          {"attribute", c.attribute},
                          {"top1", c.values.front()},
                          {"top100", c.values[std::min<std::size_t>(100, c.values.size()) - 1]},
                          {"all", c.values.back()}});
    }
    std::ofstream out(report_path(), std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + report_path().string());
    out << j.dump(2) << '\n';
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + report_path().string());
    spdlog::info("evaluate: wrote {} curves", report.curves.size());
}

}  // namespace trailrank
