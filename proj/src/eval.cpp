#include "trailrank/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trailrank/errors.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/parallel.hpp"

namespace trailrank {

namespace {

Query make_query(int n, std::string text, std::vector<std::string> attrs) {
    char id[16];
    std::snprintf(id, sizeof(id), "q%02d", n);
    return {id, std::move(text), std::move(attrs)};
}

const std::vector<std::string> kEffort = {"length_m", "grade", "total_gain"};
const std::vector<std::string> kLandscape = {"in_urban", "in_woodland", "in_national_parks", "along_surfacewater",
                                             "along_coast"};

}  // namespace

void Query::validate() const {
    if (text.empty()) throw Error(Errc::InvalidArgument, "query " + id + " has empty text");
    if (relevant_attributes.empty()) throw Error(Errc::InvalidArgument, "query " + id + " lists no attributes");
    for (const auto& a : relevant_attributes) {
        if (!is_evaluable_attribute(a)) {
            throw Error(Errc::InvalidArgument, "query " + id + " names unknown attribute '" + a + "'");
        }
    }
}

const std::vector<Query>& builtin_queries() {
    static const std::vector<Query> queries = [] {
        std::vector<Query> q;
        int n = 0;
        const auto add = [&](std::string text, std::vector<std::string> attrs) {
            q.push_back(make_query(++n, std::move(text), std::move(attrs)));
        };
        add("what is a short walk", {"length_m"});
        add("what is a very short walk", {"length_m"});
        add("what is a long walk", {"length_m"});
        add("what is a very long walk", {"length_m"});
        add("what is a walk by the seaside", {"is_coastal"});
        add("what is a walk through the woods", {"in_woodland"});
        add("what is an urban walk", {"in_urban"});
        add("what is a country walk", {"in_urban", "in_greenspace"});
        add("what is a walk for a beginner hiker", kEffort);
        add("what is a walk for an expert hiker", kEffort);
        add("what is a walk for a sporty person", kEffort);
        add("what is a walk for a person with limited mobility", kEffort);
        add("what is a walk for an elderly person", kEffort);
        add("what is a walk that can be completed in an hour", {"length_m"});
        add("what is a walk for someone who likes climbing uphill", {"grade", "total_gain"});
        add("what is a walk with a variety of landscapes", kLandscape);
        add("what is a walk for someone seeking greater challenges", kEffort);
        add("what is a walk for someone who enjoys town walks", {"in_urban"});
        add("what is a walk for someone who is interested in nature", kLandscape);
        add("what is a walk for someone who prefers wilderness to man-made", kLandscape);
        return q;
    }();
    return queries;
}

std::vector<Query> read_queries_tsv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "query file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = io::split(line, '\t');
    if (header.size() != 2 || header[0] != "text" || header[1] != "attributes") {
        throw Error(Errc::ParseError, "query file header must be 'text<TAB>attributes'");
    }
    std::vector<Query> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cols = io::split(line, '\t');
        if (cols.size() != 2) {
            throw Error(Errc::ParseError, "query file line " + std::to_string(line_no) + ": expected 2 columns");
        }
        std::vector<std::string> attrs;
        for (auto& a : io::split(cols[1], ';')) {
            const auto b = a.find_first_not_of(' ');
            const auto e = a.find_last_not_of(' ');
            if (b != std::string::npos) attrs.push_back(a.substr(b, e - b + 1));
        }
        auto q = make_query(static_cast<int>(out.size() + 1), cols[0], std::move(attrs));
        q.validate();
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Query> read_queries_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return read_queries_tsv(in);
}

const std::vector<std::string>& evaluable_attributes() {
    static const std::vector<std::string> names = {
        "length_m",      "total_gain",        "total_loss",    "grade",        "is_circular",
        "is_out_and_back", "along_surfacewater", "along_coast", "is_coastal",   "in_national_parks",
        "in_greenspace", "in_woodland",       "in_urban"};
    return names;
}

bool is_evaluable_attribute(std::string_view name) noexcept {
    const auto& n = evaluable_attributes();
    return std::find(n.begin(), n.end(), name) != n.end();
}

double attribute_value(const RouteAttributes& a, std::string_view name) {
    if (name == "length_m") return a.length_m;
    if (name == "total_gain") return a.total_gain;
    if (name == "total_loss") return a.total_loss;
    if (name == "grade") return a.grade;
    if (name == "is_circular") return a.is_circular ? 1.0 : 0.0;
    if (name == "is_out_and_back") return a.is_out_and_back ? 1.0 : 0.0;
    if (name == "along_surfacewater") return a.along_surfacewater;
    if (name == "along_coast") return a.along_coast;
    if (name == "is_coastal") return a.is_coastal ? 1.0 : 0.0;
    if (name == "in_national_parks") return a.in_national_parks;
    if (name == "in_greenspace") return a.in_greenspace;
    if (name == "in_woodland") return a.in_woodland;
    if (name == "in_urban") return a.in_urban;
    throw Error(Errc::InvalidArgument, "attribute '" + std::string(name) + "' cannot be averaged");
}

std::vector<double> cumulative_mean(std::span<const double> values) {
    if (values.empty()) throw Error(Errc::EmptyInput, "cumulative mean of an empty list");
    std::vector<double> out(values.size());
    double c = 0.0;
    for (std::size_t k = 1; k <= values.size(); ++k) {
        c += (values[k - 1] - c) / static_cast<double>(k);
        out[k - 1] = c;
    }
    return out;
}

EvaluationReport evaluate(std::span<const RankedList> rankings, const AttributeTable& attrs,
                          std::span<const Query> queries, int jobs) {
    std::unordered_map<std::string, const RankedList*> by_query;
    for (const auto& r : rankings) by_query[r.query_id] = &r;

    struct Job {
        const Query* query;
        const RankedList* ranking;
        std::string attribute;
    };
    std::vector<Job> work;
    for (const auto& q : queries) {
        q.validate();
        const auto it = by_query.find(q.id);
        if (it == by_query.end() || it->second->entries.empty()) {
            throw Error(Errc::EmptyInput, "no ranking for query " + q.id);
        }
        for (const auto& a : q.relevant_attributes) work.push_back({&q, it->second, a});
    }

    EvaluationReport report;
    report.curves.resize(work.size());
    parallel_for(work.size(), jobs, [&](std::size_t i) {
        const auto& job = work[i];
        std::vector<double> values;
        values.reserve(job.ranking->entries.size());
        for (const auto& e : job.ranking->entries) {
            const auto it = attrs.find(e.route_id);
            if (it == attrs.end()) throw Error(Errc::MissingAttributes, "no attributes for route " + e.route_id);
            values.push_back(attribute_value(it->second, job.attribute));
        }
        report.curves[i] = {job.query->id, job.query->text, job.attribute, cumulative_mean(values)};
    });

    report.n_routes = attrs.size();
    for (const auto& c : report.curves) {
        if (report.corpus.count(c.attribute) || attrs.empty()) continue;
        AttributeSummary s;
        s.min = INFINITY;
        s.max = -INFINITY;
        double sum = 0.0;
        for (const auto& [id, a] : attrs) {
            const double v = attribute_value(a, c.attribute);
            sum += v;
            s.min = std::min(s.min, v);
            s.max = std::max(s.max, v);
        }
        s.mean = sum / static_cast<double>(attrs.size());
        report.corpus[c.attribute] = s;
    }
    return report;
}

std::vector<std::size_t> thinned_ranks(std::size_t n, std::size_t max_points) {
    std::vector<std::size_t> ks;
    if (n == 0) return ks;
    max_points = std::max<std::size_t>(max_points, 2);
    if (n <= max_points) {
        ks.resize(n);
        for (std::size_t k = 0; k < n; ++k) ks[k] = k + 1;
        return ks;
    }
    const double top = std::log(static_cast<double>(n));
    for (std::size_t i = 0; i < max_points; ++i) {
        auto k = static_cast<std::size_t>(
            std::llround(std::exp(top * static_cast<double>(i) / static_cast<double>(max_points - 1))));
        k = std::clamp<std::size_t>(k, 1, n);
        if (ks.empty() || k > ks.back()) ks.push_back(k);
    }
    ks.back() = n;
    return ks;
}

void emit_csv(const EvaluationReport& report, std::ostream& out, bool thin) {
    out << "query_id,attribute,k,cumulative_mean\n";
    for (const auto& c : report.curves) {
        const auto write = [&](std::size_t k) {
            out << c.query_id << ',' << c.attribute << ',' << k << ',' << io::format_double(c.values[k - 1]) << '\n';
        };
        if (thin) {
            for (const auto k : thinned_ranks(c.values.size())) write(k);
        } else {
            for (std::size_t k = 1; k <= c.values.size(); ++k) write(k);
        }
    }
}

void emit_csv(const EvaluationReport& report, const std::filesystem::path& path, bool thin) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    emit_csv(report, out, thin);
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<CurveSamples> read_curves_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "query_id,attribute,k,cumulative_mean") {
        throw Error(Errc::ParseError, "curves CSV has an unexpected header");
    }
    std::vector<CurveSamples> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cols = io::split(line, ',');
        if (cols.size() != 4) {
            throw Error(Errc::ParseError, "curves CSV line " + std::to_string(line_no) + ": expected 4 columns");
        }
        if (out.empty() || out.back().query_id != cols[0] || out.back().attribute != cols[1]) {
            out.push_back({cols[0], cols[1], {}, {}});
        }
        out.back().ranks.push_back(static_cast<std::size_t>(io::parse_double(cols[2])));
        out.back().values.push_back(io::parse_double(cols[3]));
    }
    return out;
}

std::vector<CurveSamples> read_curves_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return read_curves_csv(in);
}

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 12> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf", "#393b79", "#ad494a"};

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_plot(std::span<const CumulativeCurve> curves, std::string_view y_label) {
    std::size_t n_max = 1;
    double y_min = INFINITY;
    double y_max = -INFINITY;
    for (const auto& c : curves) {
        if (c.values.empty()) throw Error(Errc::EmptyInput, "cannot plot an empty curve");
        n_max = std::max(n_max, c.values.size());
        for (const double v : c.values) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (curves.empty()) {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min < 1e-12) {
        const double pad = std::max(1.0, std::abs(y_max) * 0.1);
        y_min -= pad;
        y_max += pad;
    } else {
        const double pad = (y_max - y_min) * 0.05;
        y_min -= pad;
        y_max += pad;
    }

    const double pw = kPlotWidth - kLeft - kRight;
    const double ph = kPlotHeight - kTop - kBottom;
    const double x_span = std::max(1.0, std::log10(static_cast<double>(n_max)));
    const auto px = [&](std::size_t k) { return kLeft + pw * std::log10(static_cast<double>(k)) / x_span; };
    const auto py = [&](double v) { return kTop + ph * (y_max - v) / (y_max - y_min); };

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kPlotWidth << ' ' << kPlotHeight
      << "\" width=\"" << kPlotWidth << "\" height=\"" << kPlotHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kPlotWidth << "\" height=\"" << kPlotHeight << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    // x ticks at powers of ten
    for (std::size_t k = 1; static_cast<double>(k) <= std::pow(10.0, x_span) + 0.5; k *= 10) {
        const double x = px(k);
        s << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(kTop + ph) << "\" x2=\"" << fixed2(x) << "\" y2=\""
          << fixed2(kTop + ph + 5) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(kTop + ph + 18) << "\" text-anchor=\"middle\">" << k
          << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = y_min + (y_max - y_min) * i / 4.0;
        const double y = py(v);
        s << "<line x1=\"" << fixed2(kLeft - 5) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(kLeft)
          << "\" y2=\"" << fixed2(y) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << fixed2(kLeft - 8) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"end\">"
          << short_num(v) << "</text>\n";
    }
    s << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"" << fixed2(kPlotHeight - 10)
      << "\" text-anchor=\"middle\">rank k (log scale)</text>\n"
      << "<text x=\"15\" y=\"" << fixed2(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fixed2(kTop + ph / 2) << ")\">" << xml_escape(y_label) << "</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& c = curves[i];
        const char* color = kPalette[i % kPalette.size()];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto k : thinned_ranks(c.values.size(), 1024)) {
            if (!first) s << ' ';
            first = false;
            s << fixed2(px(k)) << ',' << fixed2(py(c.values[k - 1]));
        }
        if (c.values.size() == 1) s << ' ' << fixed2(kLeft + pw) << ',' << fixed2(py(c.values[0]));
        s << "\"/>\n";
        const double ly = kTop + 14 + 14.0 * static_cast<double>(i);
        s << "<line x1=\"" << fixed2(kLeft + pw - 250) << "\" y1=\"" << fixed2(ly - 4) << "\" x2=\""
          << fixed2(kLeft + pw - 230) << "\" y2=\"" << fixed2(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << fixed2(kLeft + pw - 225) << "\" y=\"" << fixed2(ly) << "\" font-size=\"9\">"
          << xml_escape(c.query_text.empty() ? c.query_id : c.query_text) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void emit_plot(std::span<const CumulativeCurve> curves, const std::filesystem::path& path,
               std::string_view y_label) {
    const auto svg = render_plot(curves, y_label);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    out << svg;
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace trailrank
