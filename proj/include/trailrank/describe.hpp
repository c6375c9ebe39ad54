#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trailrank/geo_core.hpp"
#include "trailrank/rng.hpp"

namespace trailrank {

/// Forces the number/word choice for individual slots regardless of the draw.
struct SlotOverrides {
    std::optional<bool> km_words;
    std::optional<bool> gain_words;
};

struct DescriptionConfig {
    std::uint64_t seed = 0;
    double word_swap_probability = 0.5;
    double mention_threshold = 5.0;
    double predominance_threshold = 100.0;
    /// Chance that a word-swapped percentage of at least 60 becomes "most".
    double most_probability = 0.25;
    SlotOverrides overrides;

    void validate() const;
};

struct Description {
    std::string route_id;
    std::string text;
    std::size_t char_length = 0;
    std::size_t token_estimate = 0;
};

/// British-English cardinal, e.g. 739 -> "seven hundred and thirty-nine".
/// Throws OutOfRange outside [0, 99999].
std::string int_to_words(std::int64_t n);

/// Whole kilometres shown in descriptions: floor(length / 1000), at least 1.
std::int64_t format_km(double length_m);

/// One decimal, rounded half away from zero.
std::string format_grade(double grade);

/// Round half away from zero to an integer.
std::int64_t round_half_away(double v) noexcept;

enum class AreaKind : std::uint8_t { NationalPark, Woodland, Urban, Greenspace, Coast, Water };

/// Clause order used in the final sentence.
inline constexpr AreaKind kAreaOrder[] = {AreaKind::NationalPark, AreaKind::Woodland, AreaKind::Urban,
                                          AreaKind::Greenspace,   AreaKind::Coast,    AreaKind::Water};

/// Draws consumed by one swappable slot.
struct SwapDraw {
    bool words = false;
    bool most = false;
};

/// Renders "<n> <unit>" as digits or words; unit may be empty.
std::string render_number(std::int64_t value, std::string_view unit, bool words);

/// Renders one area clause (sentence case is applied by the caller), e.g.
/// "about sixty percent of the walk is along the coast" or, at 100 percent,
/// "the walk is entirely along the coast".
std::string render_area_clause(AreaKind kind, std::int64_t percent, SwapDraw draw);

Description generate_description(std::string_view route_id, const RouteAttributes& attrs,
                                 const DescriptionConfig& config);

/// ceil(characters / 4.5), counting UTF-8 code points.
std::size_t estimate_token_count(std::string_view text) noexcept;

std::size_t utf8_length(std::string_view text) noexcept;

/// Regular expression (ECMAScript) accepted by every generated description.
std::string_view description_grammar() noexcept;

// Descriptions file: one JSON object {"route_id": ..., "text": ...} per line.
void write_descriptions_jsonl(std::ostream& out, std::span<const Description> descriptions);
void write_descriptions_jsonl(const std::filesystem::path& path, std::span<const Description> descriptions);
std::vector<Description> read_descriptions_jsonl(const std::filesystem::path& path);

}  // namespace trailrank
