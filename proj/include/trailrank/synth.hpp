#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trailrank/geo_core.hpp"

namespace trailrank {

enum class RouteShape : std::uint8_t { Open, Loop, OutAndBack };

std::string_view route_shape_name(RouteShape s) noexcept;

struct SynthSpec {
    std::uint64_t seed = 1;
    std::size_t n_routes = 1000;

    // Length distribution: log-normal truncated to [min_length, max_length],
    // location solved so the truncated mean equals target_mean_length.
    double target_mean_length = 11289.0;
    double min_length = 1200.0;
    double max_length = 48000.0;
    double length_sigma = 0.6;

    double circular_fraction = 0.5;     // loops plus out-and-back
    double out_and_back_fraction = 0.1;

    // Fraction of routes touching each class, indexed like kAllLayerClasses.
    std::array<double, 6> class_fraction = {0.3, 0.25, 0.2, 0.4, 0.4, 0.3};
    double coastal_fraction = 0.12;     // along_coast >= 50
    double full_coverage_probability = 0.2;

    double predominant_fraction = 0.08; // |gain - loss| >= 100
    double unnamed_fraction = 0.1;

    // Terrain.
    double amplitude_min = 5.0;
    double amplitude_max = 40.0;
    double min_wavelength = 1200.0;
    double cell_size = 50.0;

    /// Throws InfeasibleSpec.
    void validate() const;
};

struct GroundTruth {
    std::string route_id;
    RouteShape shape = RouteShape::Open;
    /// Expected geo_core output. Gain and loss come from the continuous
    /// elevation field; percentages count the sample positions that fall in
    /// the covered arc-length intervals.
    RouteAttributes attrs;
};

struct SyntheticCorpus {
    std::vector<RoutePolyline> routes;
    std::vector<FeatureLayer> layers;  // one per class, possibly empty
    ElevationGrid grid;
    std::vector<NamedPlace> places;
    std::vector<GroundTruth> truth;
};

/// Solves the log-normal location so the truncated mean hits the target.
double solve_length_mu(double target_mean, double lo, double hi, double sigma);

/// Mean of a log-normal(mu, sigma) truncated to [lo, hi].
double truncated_lognormal_mean(double mu, double sigma, double lo, double hi);

SyntheticCorpus generate_corpus(const SynthSpec& spec, int jobs = 1);

/// Writes routes.jsonl, layers/<stem>.geojson, dem.asc, places.tsv and
/// ground_truth.tsv into `dir`.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

void write_ground_truth_tsv(std::ostream& out, std::span<const GroundTruth> truth);
void write_ground_truth_tsv(const std::filesystem::path& path, std::span<const GroundTruth> truth);
std::vector<GroundTruth> read_ground_truth_tsv(const std::filesystem::path& path);

}  // namespace trailrank
