#include "trailrank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <spdlog/spdlog.h>

#include "trailrank/errors.hpp"
#include "trailrank/geo_io.hpp"
#include "trailrank/parallel.hpp"
#include "trailrank/rng.hpp"

namespace trailrank {

std::string_view route_shape_name(RouteShape s) noexcept {
    switch (s) {
        case RouteShape::Open: return "open";
        case RouteShape::Loop: return "loop";
        case RouteShape::OutAndBack: return "out_and_back";
    }
    return "open";
}

namespace {

// Serpentine geometry. Legs run east/west, stacked northwards kLegSpacing apart.
constexpr double kLegSpacing = 250.0;
constexpr double kReturnGap = 250.0;  // loops close along x = -kReturnGap
constexpr double kMinLeg = 600.0;
constexpr double kCornerClearance = 200.0;
constexpr double kTileMargin = 150.0;
constexpr double kBandHalfWidth = 100.0;
constexpr double kCoastOffset = 75.0;
constexpr double kWaterOffset = 25.0;
constexpr double kMaxVertexSpacing = 100.0;
constexpr double kJitter = 2.0;
constexpr double kMinCircularLength = 2500.0;
constexpr double kPlaceRadius = 300.0;
constexpr Point2D kWorldOrigin{200000.0, 100000.0};

constexpr double kCoastalLow = 45.0;
constexpr double kCoastalHigh = 55.0;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void SynthSpec::validate() const {
    const auto infeasible = [](const std::string& what) { throw Error(Errc::InfeasibleSpec, what); };
    if (!(min_length > kMinRouteLength && max_length < kMaxRouteLength && min_length < max_length)) {
        infeasible("length bounds must satisfy 1000 < min < max < 50000");
    }
    if (!(target_mean_length > min_length && target_mean_length < max_length)) {
        infeasible("target mean length must lie strictly between the bounds");
    }
    if (!(length_sigma > 0.0 && length_sigma <= 3.0)) infeasible("length sigma must lie in (0, 3]");
    for (const double f : class_fraction) {
        if (!in_unit(f)) infeasible("class fractions must lie in [0, 1]");
    }
    if (!in_unit(circular_fraction) || !in_unit(out_and_back_fraction) || !in_unit(coastal_fraction) ||
        !in_unit(predominant_fraction) || !in_unit(unnamed_fraction) || !in_unit(full_coverage_probability)) {
        infeasible("fractions must lie in [0, 1]");
    }
    if (out_and_back_fraction > circular_fraction) {
        infeasible("out-and-back routes are circular, so their fraction cannot exceed circular_fraction");
    }
    const double coast = class_fraction[static_cast<std::size_t>(LayerClass::Coastline)];
    if (coastal_fraction > coast) infeasible("coastal_fraction exceeds the coastline class fraction");
    if (predominant_fraction > 0.0 && predominant_fraction >= 1.0 - circular_fraction) {
        infeasible("predominantly uphill/downhill routes must be open, but too few open routes are requested");
    }
    if (!(amplitude_min >= 0.0 && amplitude_max >= amplitude_min)) infeasible("bad amplitude range");
    if (!(min_wavelength >= 2.0 * cell_size && min_wavelength <= 2.0 * kMinLeg)) {
        infeasible("min_wavelength must lie in [2 * cell_size, 1200]");
    }
    if (!(cell_size > 0.0 && cell_size <= 50.0)) infeasible("cell_size must lie in (0, 50]");
}

double truncated_lognormal_mean(double mu, double sigma, double lo, double hi) {
    const double a = (std::log(lo) - mu) / sigma;
    const double b = (std::log(hi) - mu) / sigma;
    const double mass = normal_cdf(b) - normal_cdf(a);
    if (!(mass > 0.0)) return mu < std::log(lo) ? lo : hi;
    return std::exp(mu + 0.5 * sigma * sigma) * (normal_cdf(b - sigma) - normal_cdf(a - sigma)) / mass;
}

double solve_length_mu(double target_mean, double lo, double hi, double sigma) {
    double a = std::log(lo) - 3.0 * sigma;
    double b = std::log(hi) + 3.0 * sigma;
    if (truncated_lognormal_mean(a, sigma, lo, hi) > target_mean ||
        truncated_lognormal_mean(b, sigma, lo, hi) < target_mean) {
        throw Error(Errc::InfeasibleSpec, "target mean length is not reachable with this sigma");
    }
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (truncated_lognormal_mean(m, sigma, lo, hi) < target_mean ? a : b) = m;
    }
    return 0.5 * (a + b);
}

namespace {

struct Terrain {
    double base = 0.0;
    double amp = 0.0;
    double k = 0.0;
    double leg = 1.0;
    double gx = 0.0;
    double gy = 0.0;

    double at(double x, double y) const {
        return base + gx * x + gy * y + amp * std::cos(k * std::clamp(x, 0.0, leg));
    }
};

/// Exact gain/loss of the field along a polyline: on each segment the field
/// is evaluated at the ends, the clamp breakpoints and every critical point.
GainLoss field_gain_loss(const Terrain& t, std::span<const Point2D> pts) {
    GainLoss gl;
    std::vector<double> ts;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Point2D a = pts[i - 1];
        const Point2D b = pts[i];
        const double dx = b.easting - a.easting;
        const double dy = b.northing - a.northing;
        ts.assign({0.0, 1.0});
        if (dx != 0.0) {
            const double x_lo = std::min(a.easting, b.easting);
            const double x_hi = std::max(a.easting, b.easting);
            for (const double xb : {0.0, t.leg}) {
                if (xb > x_lo && xb < x_hi) ts.push_back((xb - a.easting) / dx);
            }
            if (t.amp > 0.0 && t.k > 0.0) {
                const double r = (t.gx * dx + t.gy * dy) / (t.amp * t.k * dx);
                const double lo = std::max(x_lo, 0.0);
                const double hi = std::min(x_hi, t.leg);
                if (std::abs(r) <= 1.0 && lo < hi) {
                    const double th1 = std::asin(r);
                    for (const double th : {th1, std::numbers::pi - th1}) {
                        const double period = 2.0 * std::numbers::pi;
                        const auto j0 = static_cast<long>(std::ceil((t.k * lo - th) / period));
                        const auto j1 = static_cast<long>(std::floor((t.k * hi - th) / period));
                        for (long j = j0; j <= j1; ++j) {
                            const double x = (th + period * static_cast<double>(j)) / t.k;
                            if (x > x_lo && x < x_hi) ts.push_back((x - a.easting) / dx);
                        }
                    }
                }
            }
        }
        std::sort(ts.begin(), ts.end());
        double prev = t.at(a.easting, a.northing);
        for (std::size_t j = 1; j < ts.size(); ++j) {
            const double x = a.easting + ts[j] * dx;
            const double y = a.northing + ts[j] * dy;
            const double h = j + 1 == ts.size() ? t.at(b.easting, b.northing) : t.at(x, y);
            const double d = h - prev;
            if (d > 0.0) gl.gain += d;
            else gl.loss -= d;
            prev = h;
        }
    }
    return gl;
}

/// Sample positions used by geo_core: k * step below total * (1 - 1e-12), plus the end.
struct SampleGrid {
    double length = 0.0;
    double step = kDefaultSampleStep;
    std::size_t regular = 0;

    explicit SampleGrid(double total) : length(total) {
        const double stop = total - total * 1e-12;
        while (static_cast<double>(regular) * step < stop) ++regular;
    }
    std::size_t count() const { return regular + 1; }
    bool contains_sample(double s_lo, double s_hi, std::size_t k) const {
        const double s = k < regular ? static_cast<double>(k) * step : length;
        return s >= s_lo && s <= s_hi;
    }
};

using Interval = std::pair<double, double>;

double covered_percent(const SampleGrid& g, std::span<const Interval> intervals) {
    if (intervals.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < g.count(); ++k) {
        for (const auto& [lo, hi] : intervals) {
            if (g.contains_sample(lo, hi, k)) {
                ++hits;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(g.count());
}

Point2D left_normal(Point2D a, Point2D b) {
    const double len = distance(a, b);
    return {-(b.northing - a.northing) / len, (b.easting - a.easting) / len};
}

/// Offset to the left by d (right when d < 0) with mitred joins.
std::vector<Point2D> offset_polyline(std::span<const Point2D> pts, double d) {
    std::vector<Point2D> out;
    out.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Point2D n;
        if (i == 0) {
            n = left_normal(pts[0], pts[1]);
        } else if (i + 1 == pts.size()) {
            n = left_normal(pts[i - 1], pts[i]);
        } else {
            const Point2D n1 = left_normal(pts[i - 1], pts[i]);
            const Point2D n2 = left_normal(pts[i], pts[i + 1]);
            const double s = 1.0 + n1.easting * n2.easting + n1.northing * n2.northing;
            n = {(n1.easting + n2.easting) / s, (n1.northing + n2.northing) / s};
        }
        out.push_back({pts[i].easting + d * n.easting, pts[i].northing + d * n.northing});
    }
    return out;
}

std::vector<Point2D> serpentine_corners(int legs, double leg) {
    std::vector<Point2D> pts{{0.0, 0.0}};
    for (int j = 0; j < legs; ++j) {
        const double y = j * kLegSpacing;
        if (j > 0) pts.push_back({pts.back().easting, y});
        pts.push_back({j % 2 == 0 ? leg : 0.0, y});
    }
    return pts;
}

struct DensePoint {
    Point2D p;
    Point2D normal;  // left normal of the containing segment
    bool corner = false;
};

std::vector<DensePoint> densify(std::span<const Point2D> corners) {
    std::vector<DensePoint> out{{corners[0], {}, true}};
    for (std::size_t i = 1; i < corners.size(); ++i) {
        const Point2D a = corners[i - 1];
        const Point2D b = corners[i];
        const Point2D n = left_normal(a, b);
        const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(distance(a, b) / kMaxVertexSpacing)));
        for (std::size_t j = 1; j < pieces; ++j) {
            const double t = static_cast<double>(j) / static_cast<double>(pieces);
            out.push_back({{a.easting + t * (b.easting - a.easting), a.northing + t * (b.northing - a.northing)}, n, false});
        }
        out.push_back({b, n, true});
    }
    return out;
}

double polyline_length(std::span<const Point2D> pts) {
    double s = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) s += distance(pts[i - 1], pts[i]);
    return s;
}

/// Corner path up to arc length c (c inside the path).
std::vector<Point2D> prefix_corners(std::span<const Point2D> corners, double c) {
    std::vector<Point2D> out{corners[0]};
    double s = 0.0;
    for (std::size_t i = 1; i < corners.size(); ++i) {
        const double len = distance(corners[i - 1], corners[i]);
        if (s + len >= c) {
            const double t = (c - s) / len;
            const Point2D a = corners[i - 1];
            const Point2D b = corners[i];
            out.push_back({a.easting + t * (b.easting - a.easting), a.northing + t * (b.northing - a.northing)});
            return out;
        }
        s += len;
        out.push_back(corners[i]);
    }
    return out;
}

struct RoutePlan {
    RouteShape shape = RouteShape::Open;
    int legs = 1;
    double leg = 0.0;
    std::vector<Point2D> corners;  // outbound only for out-and-back
    std::vector<Point2D> points;   // local coordinates, route start at the origin
    double length = 0.0;
    Terrain terrain;
    std::array<std::vector<Geometry>, 6> geometries;  // local coordinates
    std::array<double, 6> percent{};
    std::string start_name;
    std::string end_name;
    std::string decoy_name;
    Point2D start_offset;
    Point2D end_offset;
    Point2D decoy_at;  // fraction of the tile extent
    bool named = true;
};

int odd_legs(double length) {
    int n = std::max(1, static_cast<int>(std::lround(std::sqrt(length / kLegSpacing))));
    if (n % 2 == 0) --n;
    while (n > 1 && (length - (n - 1) * kLegSpacing) / n < kMinLeg) n -= 2;
    return n;
}

std::optional<int> even_legs(double length) {
    int n = std::max(2, static_cast<int>(std::lround(std::sqrt(length / kLegSpacing))));
    if (n % 2 == 1) ++n;
    const auto leg_for = [&](int m) { return (length - 2.0 * (m - 1) * kLegSpacing - 2.0 * kReturnGap) / m; };
    while (n > 2 && leg_for(n) < kMinLeg) n -= 2;
    if (leg_for(n) < kMinLeg) return std::nullopt;
    return n;
}

constexpr const char* kNameStarts[] = {"Ash",   "Brad",  "Carl", "Dun",   "Ell",   "Fen",   "Glen",   "Hal",
                                       "Kings", "Lang",  "Mar",  "Nether", "Over", "Pen",   "Red",    "Stan",
                                       "Thorn", "Wes",   "Whit", "Ald",   "Bur",   "Cold",  "Dean",   "Elm",
                                       "Fox",   "Gold",  "Hazel", "Ivy",  "Kirk",  "Lynd",  "Moor",   "Nor"};
constexpr const char* kNameEnds[] = {"ford",  "ton",   "by",    "ham",  "wick",  "stead", "field", "bury",
                                     "combe", "ley",   "thwaite", "mouth", "dale", "well", "worth", "bridge"};
constexpr const char* kCounties[] = {"Devon",     "Cornwall", "Somerset", "Dorset",  "Cumbria",
                                     "Norfolk",   "Suffolk",  "Kent",     "Yorkshire", "Northumberland",
                                     "Gwynedd",   "Powys",    "Highland", "Fife",    "Argyll"};

std::string place_name(rng::Xoshiro256& r) {
    const auto pick = [&](auto& list) {
        return std::string(list[r.uniform_int(0, static_cast<std::int64_t>(std::size(list)) - 1)]);
    };
    std::string s = pick(kNameStarts) + pick(kNameEnds);
    return s + ", " + pick(kCounties);
}

Point2D polar(rng::Xoshiro256& r, double r_min, double r_max) {
    const double rad = r.uniform(r_min, r_max);
    const double th = r.uniform(0.0, 2.0 * std::numbers::pi);
    return {rad * std::cos(th), rad * std::sin(th)};
}

RoutePlan plan_route(const SynthSpec& spec, double mu, std::size_t index) {
    auto r = rng::stream_for(spec.seed, static_cast<std::uint64_t>(index));
    RoutePlan plan;

    // Length.
    double length = 0.0;
    for (int tries = 0; tries < 10000; ++tries) {
        length = std::exp(mu + spec.length_sigma * r.normal());
        if (length >= spec.min_length && length <= spec.max_length) break;
    }
    length = std::clamp(length, spec.min_length, spec.max_length);

    // Shape.
    const double u_shape = r.uniform();
    if (u_shape < spec.out_and_back_fraction) plan.shape = RouteShape::OutAndBack;
    else if (u_shape < spec.circular_fraction) plan.shape = RouteShape::Loop;
    if (plan.shape != RouteShape::Open && length < kMinCircularLength) plan.shape = RouteShape::Open;
    std::optional<int> loop_legs;
    if (plan.shape == RouteShape::Loop) {
        loop_legs = even_legs(length);
        if (!loop_legs) plan.shape = RouteShape::Open;
    }

    std::vector<DensePoint> dense;
    switch (plan.shape) {
        case RouteShape::Open: {
            plan.legs = odd_legs(length);
            plan.leg = (length - (plan.legs - 1) * kLegSpacing) / plan.legs;
            plan.corners = serpentine_corners(plan.legs, plan.leg);
            dense = densify(plan.corners);
            break;
        }
        case RouteShape::Loop: {
            plan.legs = *loop_legs;
            plan.leg = (length - 2.0 * (plan.legs - 1) * kLegSpacing - 2.0 * kReturnGap) / plan.legs;
            plan.corners = serpentine_corners(plan.legs, plan.leg);
            const double top = (plan.legs - 1) * kLegSpacing;
            plan.corners.push_back({-kReturnGap, top});
            plan.corners.push_back({-kReturnGap, 0.0});
            plan.corners.push_back({0.0, 0.0});
            dense = densify(plan.corners);
            break;
        }
        case RouteShape::OutAndBack: {
            const double half = 0.5 * length;
            plan.legs = odd_legs(half);
            plan.leg = (half - (plan.legs - 1) * kLegSpacing) / plan.legs;
            plan.corners = serpentine_corners(plan.legs, plan.leg);
            dense = densify(plan.corners);
            // Retrace with lateral jitter on every non-corner vertex.
            for (std::size_t i = dense.size() - 1; i-- > 0;) {
                DensePoint d = dense[i];
                if (!d.corner) {
                    const double j = r.uniform(-kJitter, kJitter);
                    d.p = {d.p.easting + j * d.normal.easting, d.p.northing + j * d.normal.northing};
                }
                dense.push_back(d);
            }
            break;
        }
    }
    plan.points.reserve(dense.size());
    for (const auto& d : dense) plan.points.push_back(d.p);
    plan.length = plan.shape == RouteShape::OutAndBack ? polyline_length(plan.points) : length;

    // Coverage.
    const SampleGrid samples(plan.length);
    std::vector<Interval> allowed;
    for (int j = 0; j < plan.legs; ++j) {
        const double s0 = j * (plan.leg + kLegSpacing);
        allowed.emplace_back(s0 + kCornerClearance, s0 + plan.leg - kCornerClearance);
    }
    const auto snap = [&](double c) {
        double best = allowed.front().first;
        double best_d = INFINITY;
        for (const auto& [lo, hi] : allowed) {
            const double v = std::clamp(c, lo, hi);
            if (std::abs(v - c) < best_d) {
                best_d = std::abs(v - c);
                best = v;
            }
        }
        for (const auto& [lo, hi] : allowed) {
            if (best >= lo && best <= hi) {
                double v = std::floor(best / 10.0) * 10.0 + 5.0;
                if (v < lo) v += 10.0;
                if (v > hi) v -= 10.0;
                return v;
            }
        }
        return best;
    };
    const double bbox_pad = kBandHalfWidth;
    const BBox route_box = bbox_of(plan.points);

    for (std::size_t ci = 0; ci < kAllLayerClasses.size(); ++ci) {
        const LayerClass cls = kAllLayerClasses[ci];
        const bool is_coast = cls == LayerClass::Coastline;
        const bool is_line = is_coast || cls == LayerClass::SurfaceWater;
        const double frac = spec.class_fraction[ci];
        const bool present = r.uniform() < frac;
        const bool coastal = is_coast && r.uniform() < (frac > 0.0 ? spec.coastal_fraction / frac : 0.0);
        const bool full_draw = r.uniform() < (is_coast && coastal ? 0.3 : spec.full_coverage_probability);
        double target = is_coast ? (coastal ? r.uniform(0.58, 0.95) : r.uniform(0.08, 0.42)) : r.uniform(0.08, 0.95);
        if (!present) continue;
        bool full = full_draw;
        if (plan.shape == RouteShape::OutAndBack) {
            if (is_coast && !coastal) continue;
            full = true;
        }
        if (full) target = 1.0;

        const double buffer = is_coast ? kCoastBuffer : kSurfaceWaterBuffer;
        const double offset = is_coast ? kCoastOffset : kWaterOffset;
        const double reach = is_line ? std::sqrt(buffer * buffer - offset * offset) : 0.0;
        const bool loop = plan.shape == RouteShape::Loop;

        const auto intervals_for = [&](double c) {
            std::vector<Interval> iv{{0.0, c + reach}};
            if (loop) iv.emplace_back(plan.length - reach, plan.length);
            return iv;
        };
        double c = plan.length;
        std::vector<Interval> iv{{0.0, plan.length}};
        if (!full) {
            c = snap(target * plan.length - (loop ? 2.0 : 1.0) * reach);
            iv = intervals_for(c);
            double pct = covered_percent(samples, iv);
            if (is_coast && ((coastal && pct < kCoastalHigh) || (!coastal && pct > kCoastalLow))) {
                // Walk the allowed positions until the percentage clears the ambiguous band.
                bool fixed = false;
                for (double cand = allowed.front().first; cand <= allowed.back().second && !fixed; cand += 10.0) {
                    const double v = snap(coastal ? cand : allowed.back().second - (cand - allowed.front().first));
                    const auto cand_iv = intervals_for(v);
                    const double p = covered_percent(samples, cand_iv);
                    if ((coastal && p >= kCoastalHigh) || (!coastal && p <= kCoastalLow)) {
                        c = v;
                        iv = cand_iv;
                        fixed = true;
                    }
                }
                if (!fixed) {
                    if (!coastal) continue;
                    full = true;
                    c = plan.length;
                    iv = {{0.0, plan.length}};
                }
            }
        }
        plan.percent[ci] = covered_percent(samples, iv);

        auto& out = plan.geometries[ci];
        if (is_line) {
            const auto path = full ? plan.corners : prefix_corners(plan.corners, c);
            out.push_back(Geometry::line(offset_polyline(path, offset)));
        } else if (full) {
            const BBox b = route_box.inflated(bbox_pad);
            out.push_back(Geometry::polygon({{b.min_e, b.min_n}, {b.max_e, b.min_n}, {b.max_e, b.max_n},
                                             {b.min_e, b.max_n}, {b.min_e, b.min_n}}));
        } else {
            const auto path = prefix_corners(plan.corners, c);
            auto ring = offset_polyline(path, kBandHalfWidth);
            const auto right = offset_polyline(path, -kBandHalfWidth);
            ring.insert(ring.end(), right.rbegin(), right.rend());
            ring.push_back(ring.front());
            out.push_back(Geometry::polygon(std::move(ring)));
        }
    }

    // Terrain.
    const bool open = plan.shape == RouteShape::Open;
    const bool predominant =
        open && spec.predominant_fraction > 0.0 &&
        r.uniform() < spec.predominant_fraction / (1.0 - spec.circular_fraction);
    const double net = predominant ? (r.uniform() < 0.5 ? -1.0 : 1.0) * r.uniform(130.0, 250.0)
                                   : r.uniform(-70.0, 70.0);
    Terrain& t = plan.terrain;
    t.base = r.uniform(60.0, 400.0);
    t.amp = r.uniform(spec.amplitude_min, spec.amplitude_max);
    t.leg = plan.leg;
    const int max_m = std::max(1, static_cast<int>(std::floor(2.0 * plan.leg / spec.min_wavelength)));
    const int m = static_cast<int>(r.uniform_int(1, max_m));
    t.k = m * std::numbers::pi / plan.leg;
    const double slope = r.uniform(-0.04, 0.04);
    if (open) {
        // End point sits at (leg, (legs - 1) * spacing); cos term contributes amp * ((-1)^m - 1).
        const double wave = t.amp * ((m % 2 == 0 ? 1.0 : -1.0) - 1.0);
        if (plan.legs == 1) t.gx = (net - wave) / plan.leg;
        else t.gy = (net - wave) / ((plan.legs - 1) * kLegSpacing);
    } else {
        t.gy = slope;
    }

    // Places.
    plan.named = r.uniform() >= spec.unnamed_fraction;
    plan.start_name = place_name(r);
    plan.end_name = place_name(r);
    plan.decoy_name = place_name(r);
    plan.start_offset = polar(r, 20.0, kPlaceRadius);
    plan.end_offset = polar(r, 20.0, kPlaceRadius);
    plan.decoy_at = {r.uniform(), r.uniform()};
    return plan;
}

std::optional<std::string> brute_force_place(Point2D p, std::span<const NamedPlace> by_easting) {
    const auto lo = std::lower_bound(by_easting.begin(), by_easting.end(), p.easting - kPlaceSearchRadius,
                                     [](const NamedPlace& a, double e) { return a.location.easting < e; });
    const NamedPlace* best = nullptr;
    double best_d = 0.0;
    for (auto it = lo; it != by_easting.end() && it->location.easting <= p.easting + kPlaceSearchRadius; ++it) {
        const double d = std::hypot(it->location.easting - p.easting, it->location.northing - p.northing);
        if (d > kPlaceSearchRadius) continue;
        if (!best || d < best_d || (d == best_d && it->name < best->name)) {
            best = &*it;
            best_d = d;
        }
    }
    if (!best) return std::nullopt;
    return best->name;
}

std::string route_id_for(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "r%06zu", i + 1);
    return buf;
}

}  // namespace

SyntheticCorpus generate_corpus(const SynthSpec& spec, int jobs) {
    spec.validate();
    SyntheticCorpus corpus;
    for (const auto cls : kAllLayerClasses) corpus.layers.push_back({cls, {}});
    const std::size_t n = spec.n_routes;
    const double cs = spec.cell_size;
    if (n == 0) {
        corpus.grid = {kWorldOrigin, cs, 1, 1, {-9999.0}, -9999.0};
        return corpus;
    }

    const double mu = solve_length_mu(spec.target_mean_length, spec.min_length, spec.max_length, spec.length_sigma);
    std::vector<RoutePlan> plans(n);
    parallel_for(n, jobs, [&](std::size_t i) { plans[i] = plan_route(spec, mu, i); });

    // Shelf-pack one tile per route; tiles are whole cells.
    struct Tile {
        int col = 0, row = 0, w = 0, h = 0;  // row counted from the south
        Point2D offset;                      // world = local + offset
    };
    std::vector<Tile> tiles(n);
    double total_cells = 0.0;
    int max_w = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const BBox b = bbox_of(plans[i].points);
        tiles[i].w = static_cast<int>(std::ceil((b.max_e - b.min_e + 2.0 * kTileMargin) / cs));
        tiles[i].h = static_cast<int>(std::ceil((b.max_n - b.min_n + 2.0 * kTileMargin) / cs));
        total_cells += static_cast<double>(tiles[i].w) * tiles[i].h;
        max_w = std::max(max_w, tiles[i].w);
    }
    const int row_limit = std::max(max_w, static_cast<int>(std::ceil(std::sqrt(total_cells) * 1.1)));
    int x = 0, y = 0, shelf_h = 0, width = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& t = tiles[i];
        if (x + t.w > row_limit) {
            y += shelf_h;
            x = 0;
            shelf_h = 0;
        }
        t.col = x;
        t.row = y;
        x += t.w;
        width = std::max(width, x);
        shelf_h = std::max(shelf_h, t.h);
        const BBox b = bbox_of(plans[i].points);
        t.offset = {kWorldOrigin.easting + t.col * cs + kTileMargin - b.min_e,
                    kWorldOrigin.northing + t.row * cs + kTileMargin - b.min_n};
    }
    const int height = y + shelf_h;

    ElevationGrid& grid = corpus.grid;
    grid.origin = kWorldOrigin;
    grid.cell_size = cs;
    grid.n_cols = width;
    grid.n_rows = height;
    grid.values.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), grid.nodata);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto& t = tiles[i];
        const Terrain& terrain = plans[i].terrain;
        for (int rs = t.row; rs < t.row + t.h; ++rs) {
            const int row = height - 1 - rs;  // row 0 is the north edge
            const double ny = kWorldOrigin.northing + (rs + 0.5) * cs - t.offset.northing;
            for (int col = t.col; col < t.col + t.w; ++col) {
                const double ex = kWorldOrigin.easting + (col + 0.5) * cs - t.offset.easting;
                grid.values[static_cast<std::size_t>(row) * width + col] = std::round(terrain.at(ex, ny) * 100.0) / 100.0;
            }
        }
    });

    corpus.routes.resize(n);
    corpus.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& plan = plans[i];
        const Point2D off = tiles[i].offset;
        const auto shift = [&](Point2D p) { return Point2D{p.easting + off.easting, p.northing + off.northing}; };
        auto& route = corpus.routes[i];
        route.id = route_id_for(i);
        route.points.reserve(plan.points.size());
        for (const auto& p : plan.points) route.points.push_back(shift(p));
        for (std::size_t ci = 0; ci < kAllLayerClasses.size(); ++ci) {
            for (auto g : plan.geometries[ci]) {
                for (auto& part : g.parts) {
                    for (auto& p : part) p = shift(p);
                }
                corpus.layers[ci].geometries.push_back(std::move(g));
            }
        }
        const Point2D start = route.points.front();
        const Point2D end = route.points.back();
        if (plan.named) {
            corpus.places.push_back({plan.start_name, {start.easting + plan.start_offset.easting,
                                                       start.northing + plan.start_offset.northing}});
            if (plan.shape == RouteShape::Open) {
                corpus.places.push_back(
                    {plan.end_name, {end.easting + plan.end_offset.easting, end.northing + plan.end_offset.northing}});
            }
        }
        const auto& t = tiles[i];
        corpus.places.push_back({plan.decoy_name, {kWorldOrigin.easting + (t.col + plan.decoy_at.easting * t.w) * cs,
                                                   kWorldOrigin.northing + (t.row + plan.decoy_at.northing * t.h) * cs}});
    }

    std::vector<NamedPlace> by_easting = corpus.places;
    std::stable_sort(by_easting.begin(), by_easting.end(),
                     [](const NamedPlace& a, const NamedPlace& b) { return a.location.easting < b.location.easting; });

    for (std::size_t i = 0; i < n; ++i) {
        const auto& plan = plans[i];
        auto& gt = corpus.truth[i];
        gt.route_id = corpus.routes[i].id;
        gt.shape = plan.shape;
        auto& a = gt.attrs;
        a.length_m = plan.length;
        const GainLoss gl = field_gain_loss(plan.terrain, plan.points);
        a.total_gain = gl.gain;
        a.total_loss = gl.loss;
        a.grade = gl.gain / plan.length * 100.0;
        a.is_circular = plan.shape != RouteShape::Open;
        a.is_out_and_back = plan.shape == RouteShape::OutAndBack;
        a.start_place = brute_force_place(corpus.routes[i].points.front(), by_easting);
        a.end_place = brute_force_place(corpus.routes[i].points.back(), by_easting);
        const auto pct = [&](LayerClass c) { return plan.percent[static_cast<std::size_t>(c)]; };
        a.along_surfacewater = pct(LayerClass::SurfaceWater);
        a.along_coast = pct(LayerClass::Coastline);
        a.is_coastal = a.along_coast >= kCoastalMinPercent;
        a.in_national_parks = pct(LayerClass::NationalPark);
        a.in_greenspace = pct(LayerClass::Greenspace);
        a.in_woodland = pct(LayerClass::Woodland);
        a.in_urban = pct(LayerClass::Urban);
    }
    spdlog::debug("synthetic corpus: {} routes, {} places, grid {}x{}", n, corpus.places.size(), width, height);
    return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_routes_jsonl(dir / "routes.jsonl", corpus.routes);
    io::write_layer_dir(dir / "layers", corpus.layers);
    io::write_esri_ascii(dir / "dem.asc", corpus.grid);
    io::write_places_tsv(dir / "places.tsv", corpus.places);
    write_ground_truth_tsv(dir / "ground_truth.tsv", corpus.truth);
}

namespace {

constexpr const char* kTruthHeader =
    "route_id\tshape\tlength_m\ttotal_gain\ttotal_loss\tgrade\tis_circular\tis_out_and_back\tstart_place\t"
    "end_place\talong_surfacewater\talong_coast\tis_coastal\tin_national_parks\tin_greenspace\tin_woodland\t"
    "in_urban";

const char* flag(bool b) { return b ? "true" : "false"; }

}  // namespace

void write_ground_truth_tsv(std::ostream& out, std::span<const GroundTruth> truth) {
    using io::format_double;
    out << kTruthHeader << '\n';
    for (const auto& t : truth) {
        const auto& a = t.attrs;
        out << t.route_id << '\t' << route_shape_name(t.shape) << '\t' << format_double(a.length_m) << '\t'
            << format_double(a.total_gain) << '\t' << format_double(a.total_loss) << '\t' << format_double(a.grade)
            << '\t' << flag(a.is_circular) << '\t' << flag(a.is_out_and_back) << '\t' << a.start_place.value_or("")
            << '\t' << a.end_place.value_or("") << '\t' << format_double(a.along_surfacewater) << '\t'
            << format_double(a.along_coast) << '\t' << flag(a.is_coastal) << '\t'
            << format_double(a.in_national_parks) << '\t' << format_double(a.in_greenspace) << '\t'
            << format_double(a.in_woodland) << '\t' << format_double(a.in_urban) << '\n';
    }
}

void write_ground_truth_tsv(const std::filesystem::path& path, std::span<const GroundTruth> truth) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    write_ground_truth_tsv(out, truth);
    if (!out.flush()) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::vector<GroundTruth> read_ground_truth_tsv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kTruthHeader) {
        throw Error(Errc::ParseError, path.string() + ": unexpected ground truth header");
    }
    const auto to_bool = [&](const std::string& s) {
        if (s == "true") return true;
        if (s == "false") return false;
        throw Error(Errc::ParseError, "bad boolean '" + s + "'");
    };
    const auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
    std::vector<GroundTruth> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = io::split(line, '\t');
        if (c.size() != 17) throw Error(Errc::ParseError, "ground truth row has " + std::to_string(c.size()) + " columns");
        GroundTruth t;
        t.route_id = c[0];
        if (c[1] == "open") t.shape = RouteShape::Open;
        else if (c[1] == "loop") t.shape = RouteShape::Loop;
        else if (c[1] == "out_and_back") t.shape = RouteShape::OutAndBack;
        else throw Error(Errc::ParseError, "unknown shape '" + c[1] + "'");
        auto& a = t.attrs;
        a.length_m = io::parse_double(c[2]);
        a.total_gain = io::parse_double(c[3]);
        a.total_loss = io::parse_double(c[4]);
        a.grade = io::parse_double(c[5]);
        a.is_circular = to_bool(c[6]);
        a.is_out_and_back = to_bool(c[7]);
        a.start_place = opt(c[8]);
        a.end_place = opt(c[9]);
        a.along_surfacewater = io::parse_double(c[10]);
        a.along_coast = io::parse_double(c[11]);
        a.is_coastal = to_bool(c[12]);
        a.in_national_parks = io::parse_double(c[13]);
        a.in_greenspace = io::parse_double(c[14]);
        a.in_woodland = io::parse_double(c[15]);
        a.in_urban = io::parse_double(c[16]);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace trailrank
