#ifndef MOBISCAPE_METRICS_HPP
#define MOBISCAPE_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"

namespace mobiscape::metrics {

MOBISCAPE_DEFINE_ERROR(ZeroVector);
MOBISCAPE_DEFINE_ERROR(BinningMismatch);
MOBISCAPE_DEFINE_ERROR(NoCommuters);

// Per-zone shares over a fixed zone universe; entries sum to 1.
struct ZoneDistribution {
    std::vector<std::string> zone_ids;  // sorted universe
    std::vector<double> p;
};

// Normalizes counts by their own total; zones absent from `counts` get 0.
// Throws ZeroVector when the total is zero.
ZoneDistribution to_distribution(const geo::ZoneCounts& counts,
                                 std::span<const std::string> universe);

// Cosine of the angle between the two share vectors, in [0, 1].
double cosine_similarity(const ZoneDistribution& c, const ZoneDistribution& s);

// Distance between the count-weighted centers of gravity of the two sides.
double gravity_distance(const geo::ZoneCounts& c, const geo::ZoneCounts& s,
                        const geo::ZoneRegistry& registry);

// Commuting distances run to about 120 km, hence 500 intervals of 0.24 km.
struct DistanceHistogram {
    double width_km = 0.24;
    std::vector<double> p;  // per-bin fraction; overflow lands in the last bin
};

DistanceHistogram make_histogram(std::span<const double> distances_km,
                                 double width_km = 0.24, std::size_t bins = 500);

// Shared area of two binned distributions: sum of minima over sum of maxima.
double coincidence_ratio(const DistanceHistogram& c, const DistanceHistogram& s);

// Home-to-work great-circle distance per commuter, binned. Throws NoCommuters
// on an empty list.
DistanceHistogram commute_histogram(
    std::span<const std::pair<geo::GeoPoint, geo::GeoPoint>> home_work,
    double width_km = 0.24, std::size_t bins = 500);

}  // namespace mobiscape::metrics

#endif
