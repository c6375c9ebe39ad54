#include "trailrank/describe.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <ostream>

#include "trailrank/errors.hpp"

namespace trailrank {

void DescriptionConfig::validate() const {
    if (!(word_swap_probability >= 0.0 && word_swap_probability <= 1.0)) {
        throw Error(Errc::InvalidArgument, "word_swap_probability must lie in [0, 1]");
    }
    if (!(mention_threshold >= 0.0 && mention_threshold <= 100.0)) {
        throw Error(Errc::InvalidArgument, "mention_threshold must lie in [0, 100]");
    }
    if (!(predominance_threshold >= 0.0)) {
        throw Error(Errc::InvalidArgument, "predominance_threshold must be non-negative");
    }
    if (!(most_probability >= 0.0 && most_probability <= 1.0)) {
        throw Error(Errc::InvalidArgument, "most_probability must lie in [0, 1]");
    }
}

namespace {

constexpr std::array<const char*, 20> kUnits = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

constexpr std::array<const char*, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                               "fifty", "sixty", "seventy", "eighty", "ninety"};

std::string below_hundred(int n) {
    if (n < 20) return kUnits[n];
    std::string out = kTens[n / 10];
    if (n % 10) {
        out += '-';
        out += kUnits[n % 10];
    }
    return out;
}

std::string below_thousand(int n) {
    if (n < 100) return below_hundred(n);
    std::string out = std::string(kUnits[n / 100]) + " hundred";
    if (n % 100) out += " and " + below_hundred(n % 100);
    return out;
}

}  // namespace

std::string int_to_words(std::int64_t n) {
    if (n < 0 || n > 99999) throw Error(Errc::OutOfRange, "cannot spell " + std::to_string(n));
    const int v = static_cast<int>(n);
    if (v < 1000) return below_thousand(v);
    std::string out = below_hundred(v / 1000) + " thousand";
    const int rest = v % 1000;
    if (rest == 0) return out;
    out += rest < 100 ? " and " : " ";
    out += below_thousand(rest);
    return out;
}

std::int64_t format_km(double length_m) {
    const auto km = static_cast<std::int64_t>(std::floor(length_m / 1000.0));
    return std::max<std::int64_t>(1, km);
}

std::int64_t round_half_away(double v) noexcept { return static_cast<std::int64_t>(std::round(v)); }

std::string format_grade(double grade) {
    const std::int64_t tenths = round_half_away(grade * 10.0);
    const std::int64_t mag = tenths < 0 ? -tenths : tenths;
    std::string out = tenths < 0 ? "-" : "";
    out += std::to_string(mag / 10) + "." + std::to_string(mag % 10);
    return out;
}

std::string render_number(std::int64_t value, std::string_view unit, bool words) {
    std::string out = (words && value >= 0 && value <= 99999) ? int_to_words(value) : std::to_string(value);
    if (!unit.empty()) {
        out += ' ';
        out += unit;
    }
    return out;
}

namespace {

std::string_view area_predicate(AreaKind kind) noexcept {
    switch (kind) {
        case AreaKind::NationalPark: return "is within a national park";
        case AreaKind::Woodland: return "is in a wooded area";
        case AreaKind::Urban: return "goes through an urban area";
        case AreaKind::Greenspace: return "is within green space";
        case AreaKind::Coast: return "is along the coast";
        case AreaKind::Water: return "is alongside a body of water";
    }
    return "";
}

std::string_view area_entirely(AreaKind kind) noexcept {
    switch (kind) {
        case AreaKind::NationalPark: return "within a national park";
        case AreaKind::Woodland: return "in a wooded area";
        case AreaKind::Urban: return "in an urban area";
        case AreaKind::Greenspace: return "within green space";
        case AreaKind::Coast: return "along the coast";
        case AreaKind::Water: return "alongside a body of water";
    }
    return "";
}

double area_value(const RouteAttributes& a, AreaKind kind) noexcept {
    switch (kind) {
        case AreaKind::NationalPark: return a.in_national_parks;
        case AreaKind::Woodland: return a.in_woodland;
        case AreaKind::Urban: return a.in_urban;
        case AreaKind::Greenspace: return a.in_greenspace;
        case AreaKind::Coast: return a.along_coast;
        case AreaKind::Water: return a.along_surfacewater;
    }
    return 0.0;
}

std::string location(const std::optional<std::string>& name) {
    return name ? "in " + *name : std::string("at an unnamed location");
}

}  // namespace

std::string render_area_clause(AreaKind kind, std::int64_t percent, SwapDraw draw) {
    if (percent >= 100) return "the walk is entirely " + std::string(area_entirely(kind));
    std::string out;
    if (draw.words && draw.most && percent >= 60) {
        out = "most of the walk ";
    } else {
        out = "about " + render_number(percent, "percent", draw.words) + " of the walk ";
    }
    out += area_predicate(kind);
    return out;
}

Description generate_description(std::string_view route_id, const RouteAttributes& attrs,
                                 const DescriptionConfig& config) {
    config.validate();
    auto rng = rng::stream_for(config.seed, route_id);
    const double p = config.word_swap_probability;

    // Fixed draw schedule: km, gain, then (swap, most) for each area slot.
    const bool km_words = config.overrides.km_words.value_or(rng.uniform() < p);
    if (config.overrides.km_words) rng.next();
    const bool gain_words = config.overrides.gain_words.value_or(rng.uniform() < p);
    if (config.overrides.gain_words) rng.next();
    std::array<SwapDraw, std::size(kAreaOrder)> area_draws{};
    for (auto& d : area_draws) {
        d.words = rng.uniform() < p;
        d.most = rng.uniform() < config.most_probability;
    }

    std::string text = "This is a ";
    if (attrs.is_circular) text += "circular, ";
    text += render_number(format_km(attrs.length_m), "km", km_words);
    if (attrs.is_coastal) text += " coastal";
    text += " walk that ";
    if (attrs.is_circular) {
        text += "begins and ends " + location(attrs.start_place ? attrs.start_place : attrs.end_place);
    } else {
        text += "begins " + location(attrs.start_place) + " and ends " + location(attrs.end_place);
    }
    text += ". Total elevation gain is ";
    text += render_number(round_half_away(attrs.total_gain), "metres", gain_words);
    text += ", and elevation grade is " + format_grade(attrs.grade) + ".";

    const double net = attrs.total_gain - attrs.total_loss;
    if (net >= config.predominance_threshold) {
        text += " The walk is predominantly uphill.";
    } else if (-net >= config.predominance_threshold) {
        text += " The walk is predominantly downhill.";
    }

    std::string areas;
    for (std::size_t i = 0; i < std::size(kAreaOrder); ++i) {
        const std::int64_t pct = round_half_away(area_value(attrs, kAreaOrder[i]));
        if (pct <= 0 || static_cast<double>(pct) < config.mention_threshold) continue;
        if (!areas.empty()) areas += ", ";
        areas += render_area_clause(kAreaOrder[i], std::min<std::int64_t>(pct, 100), area_draws[i]);
    }
    if (!areas.empty()) {
        areas[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(areas[0])));
        text += " " + areas + ".";
    }

    Description d;
    d.route_id = std::string(route_id);
    d.char_length = utf8_length(text);
    d.token_estimate = estimate_token_count(text);
    d.text = std::move(text);
    return d;
}

std::size_t utf8_length(std::string_view text) noexcept {
    std::size_t n = 0;
    for (const char c : text) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    return n;
}

std::size_t estimate_token_count(std::string_view text) noexcept {
    const std::size_t chars = utf8_length(text);
    return (2 * chars + 8) / 9;
}

std::string_view description_grammar() noexcept {
    return R"(^This is a (?:circular, )?(?:[0-9]+|[a-z]+(?:[ -][a-z]+)*) km (?:coastal )?walk that )"
           R"((?:begins and ends (?:in .+?|at an unnamed location)|)"
           R"(begins (?:in .+?|at an unnamed location) and ends (?:in .+?|at an unnamed location))\. )"
           R"(Total elevation gain is (?:[0-9]+|[a-z]+(?:[ -][a-z]+)*) metres, and elevation grade is [0-9]+\.[0-9]\.)"
           R"((?: The walk is predominantly (?:uphill|downhill)\.)?)"
           R"((?: (?:About (?:[0-9]+|[a-z]+(?:[ -][a-z]+)*) percent of the walk (?:is within a national park|is in a wooded area|goes through an urban area|is within green space|is along the coast|is alongside a body of water)|)"
           R"(Most of the walk (?:is within a national park|is in a wooded area|goes through an urban area|is within green space|is along the coast|is alongside a body of water)|)"
           R"(The walk is entirely (?:within a national park|in a wooded area|in an urban area|within green space|along the coast|alongside a body of water)))"
           R"((?:, (?:about (?:[0-9]+|[a-z]+(?:[ -][a-z]+)*) percent of the walk (?:is within a national park|is in a wooded area|goes through an urban area|is within green space|is along the coast|is alongside a body of water)|)"
           R"(most of the walk (?:is within a national park|is in a wooded area|goes through an urban area|is within green space|is along the coast|is alongside a body of water)|)"
           R"(the walk is entirely (?:within a national park|in a wooded area|in an urban area|within green space|along the coast|alongside a body of water)))*\.)?$)";
}

void write_descriptions_jsonl(std::ostream& out, std::span<const Description> descriptions) {
    for (const auto& d : descriptions) {
        nlohmann::ordered_json rec;
        rec["route_id"] = d.route_id;
        rec["text"] = d.text;
        out << rec.dump() << '\n';
    }
}

void write_descriptions_jsonl(const std::filesystem::path& path, std::span<const Description> descriptions) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_descriptions_jsonl(out, descriptions);
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<Description> read_descriptions_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<Description> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            Description d;
            d.route_id = rec.at("route_id").get<std::string>();
            d.text = rec.at("text").get<std::string>();
            d.char_length = utf8_length(d.text);
            d.token_estimate = estimate_token_count(d.text);
            out.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, "descriptions line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace trailrank
