#include "mobiscape/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mobiscape::metrics {

ZoneDistribution to_distribution(const geo::ZoneCounts& counts,
                                 std::span<const std::string> universe) {
    ZoneDistribution dist;
    dist.zone_ids.assign(universe.begin(), universe.end());
    dist.p.assign(universe.size(), 0.0);
    double total = 0.0;
    for (const auto& [zone, n] : counts) total += n;
    if (total <= 0.0) throw ZeroVector("zone distribution has zero total");
    for (std::size_t i = 0; i < dist.zone_ids.size(); ++i) {
        auto it = counts.find(dist.zone_ids[i]);
        if (it != counts.end()) dist.p[i] = it->second / total;
    }
    return dist;
}

double cosine_similarity(const ZoneDistribution& c, const ZoneDistribution& s) {
    if (c.zone_ids != s.zone_ids)
        throw Error("cosine_similarity: zone universes differ");
    double dot = 0.0, nc = 0.0, ns = 0.0;
    for (std::size_t i = 0; i < c.p.size(); ++i) {
        dot += c.p[i] * s.p[i];
        nc += c.p[i] * c.p[i];
        ns += s.p[i] * s.p[i];
    }
    if (nc == 0.0 || ns == 0.0) throw ZeroVector("cosine_similarity: zero vector");
    return dot / (std::sqrt(nc) * std::sqrt(ns));
}

double gravity_distance(const geo::ZoneCounts& c, const geo::ZoneCounts& s,
                        const geo::ZoneRegistry& registry) {
    return geo::haversine_km(geo::center_of_gravity(c, registry),
                             geo::center_of_gravity(s, registry));
}

DistanceHistogram make_histogram(std::span<const double> distances_km,
                                 double width_km, std::size_t bins) {
    if (width_km <= 0.0 || bins == 0) throw Error("make_histogram: bad binning");
    if (distances_km.empty()) throw Error("make_histogram: no distances");
    DistanceHistogram h;
    h.width_km = width_km;
    h.p.assign(bins, 0.0);
    for (double d : distances_km) {
        auto bin = static_cast<std::size_t>(std::floor(d / width_km));
        if (bin >= bins) bin = bins - 1;
        h.p[bin] += 1.0;
    }
    for (double& v : h.p) v /= static_cast<double>(distances_km.size());
    return h;
}

double coincidence_ratio(const DistanceHistogram& c, const DistanceHistogram& s) {
    if (c.p.size() != s.p.size() || c.width_km != s.width_km)
        throw BinningMismatch("coincidence_ratio: histograms use different binning");
    double min_sum = 0.0, max_sum = 0.0;
    for (std::size_t i = 0; i < c.p.size(); ++i) {
        min_sum += std::min(c.p[i], s.p[i]);
        max_sum += std::max(c.p[i], s.p[i]);
    }
    if (max_sum == 0.0) throw BinningMismatch("coincidence_ratio: both histograms empty");
    return min_sum / max_sum;
}

DistanceHistogram commute_histogram(
    std::span<const std::pair<geo::GeoPoint, geo::GeoPoint>> home_work,
    double width_km, std::size_t bins) {
    if (home_work.empty()) throw NoCommuters("commute_histogram: no commuters");
    std::vector<double> distances;
    distances.reserve(home_work.size());
    for (const auto& [home, work] : home_work)
        distances.push_back(geo::haversine_km(home, work));
    return make_histogram(distances, width_km, bins);
}

}  // namespace mobiscape::metrics
