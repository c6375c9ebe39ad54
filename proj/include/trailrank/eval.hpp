#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trailrank/embed.hpp"
#include "trailrank/geo_core.hpp"

namespace trailrank {

struct Query {
    std::string id;
    std::string text;
    std::vector<std::string> relevant_attributes;

    void validate() const;
};

/// The twenty evaluation queries, ids q01..q20.
const std::vector<Query>& builtin_queries();

/// Query override file: tab-separated with header `text<TAB>attributes`,
/// attributes separated by ';'. Ids are assigned q01, q02, ... in file order.
std::vector<Query> read_queries_tsv(const std::filesystem::path& path);
std::vector<Query> read_queries_tsv(std::istream& in);

/// Names of the averaging-capable attributes (numeric and boolean fields).
const std::vector<std::string>& evaluable_attributes();
bool is_evaluable_attribute(std::string_view name) noexcept;

/// Numeric value of a named attribute; booleans map to 0/1.
/// Throws InvalidArgument for unknown or textual fields.
double attribute_value(const RouteAttributes& attrs, std::string_view name);

/// Running mean c_k = c_{k-1} + (v_k - c_{k-1}) / k. Throws EmptyInput.
std::vector<double> cumulative_mean(std::span<const double> values);

struct CumulativeCurve {
    std::string query_id;
    std::string query_text;
    std::string attribute;
    /// values[k-1] is the mean over the top k documents.
    std::vector<double> values;
};

struct AttributeSummary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct EvaluationReport {
    std::vector<CumulativeCurve> curves;
    std::size_t n_routes = 0;
    std::map<std::string, AttributeSummary> corpus;  // per evaluated attribute
    std::string provider;
};

using AttributeTable = std::unordered_map<std::string, RouteAttributes>;

/// One curve per (query, relevant attribute), in query order then attribute
/// order. Throws MissingAttributes for a ranked route without attributes and
/// EmptyInput for a query without a (non-empty) ranking.
EvaluationReport evaluate(std::span<const RankedList> rankings, const AttributeTable& attrs,
                          std::span<const Query> queries, int jobs = 1);

/// Ranks kept when thinning a curve of length n: at most `max_points`
/// log-spaced values of k, always including 1 and n.
std::vector<std::size_t> thinned_ranks(std::size_t n, std::size_t max_points = 4096);

// CSV: header `query_id,attribute,k,cumulative_mean`.
void emit_csv(const EvaluationReport& report, std::ostream& out, bool thin = false);
void emit_csv(const EvaluationReport& report, const std::filesystem::path& path, bool thin = false);

struct CurveSamples {
    std::string query_id;
    std::string attribute;
    std::vector<std::size_t> ranks;
    std::vector<double> values;
};

std::vector<CurveSamples> read_curves_csv(const std::filesystem::path& path);
std::vector<CurveSamples> read_curves_csv(std::istream& in);

inline constexpr double kPlotWidth = 800.0;
inline constexpr double kPlotHeight = 400.0;

/// Self-contained SVG: log10 rank on x, attribute value on y, one polyline
/// per curve, legend labelled with the query text. Throws EmptyInput for an
/// empty curve.
std::string render_plot(std::span<const CumulativeCurve> curves, std::string_view y_label);
void emit_plot(std::span<const CumulativeCurve> curves, const std::filesystem::path& path,
               std::string_view y_label);

}  // namespace trailrank
