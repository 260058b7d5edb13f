#ifndef MOBISCAPE_GEO_HPP
#define MOBISCAPE_GEO_HPP

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobiscape/errors.hpp"

namespace mobiscape::geo {

MOBISCAPE_DEFINE_ERROR(AllZeroCounts);
MOBISCAPE_DEFINE_ERROR(InvalidPoint);
MOBISCAPE_DEFINE_ERROR(UnknownZone);

constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]

    bool operator==(const GeoPoint&) const = default;
};

bool valid(const GeoPoint& p);

// Great-circle distance on the mean-radius sphere, in kilometers.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct Zone {
    std::string zone_id;
    std::string district;
    GeoPoint centroid;
    // Simple closed ring; empty when the survey provides no polygon. The
    // closing vertex may be repeated or implied.
    std::vector<GeoPoint> boundary;
};

class ZoneRegistry {
public:
    // Sorts by zone_id; throws on duplicates or an empty set.
    explicit ZoneRegistry(std::vector<Zone> zones);

    const std::vector<Zone>& zones() const { return zones_; }
    const Zone* find(std::string_view zone_id) const;
    const Zone& at(std::string_view zone_id) const;  // UnknownZone if absent
    std::vector<std::string> zone_ids() const;

private:
    std::vector<Zone> zones_;
};

// Ray casting in the lat/lon plane. Points on an edge count as inside.
bool point_in_ring(const GeoPoint& p, std::span<const GeoPoint> ring);

// Containment wins (first matching zone in zone_id order); otherwise the zone
// with the nearest centroid.
const Zone& assign_zone(const GeoPoint& p, const ZoneRegistry& registry);

using ZoneCounts = std::map<std::string, double>;

// Count-weighted mean of zone centroids, averaging raw latitude/longitude.
GeoPoint center_of_gravity(const ZoneCounts& counts, const ZoneRegistry& registry);

// Zone file: `zone_id,district,centroid_lat,centroid_lon[,boundary_wkt]`,
// boundary as `POLYGON((lon lat, ...))` or empty.
ZoneRegistry load_zones(const std::filesystem::path& path);
void save_zones(const ZoneRegistry& registry, std::ostream& out);

}  // namespace mobiscape::geo

#endif
