#include "mobiscape/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mobiscape/csv.hpp"

namespace mobiscape::geo {

namespace {
constexpr double kPi = 3.14159265358979323846;
double deg2rad(double deg) { return deg * kPi / 180.0; }
}  // namespace

bool valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
           p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = deg2rad(a.lat);
    const double lat2 = deg2rad(b.lat);
    const double dlat = deg2rad(b.lat - a.lat);
    const double dlon = deg2rad(b.lon - a.lon);
    const double s =
        std::sin(dlat / 2) * std::sin(dlat / 2) +
        std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return kEarthRadiusKm * 2.0 * std::asin(std::min(1.0, std::sqrt(s)));
}

ZoneRegistry::ZoneRegistry(std::vector<Zone> zones) : zones_(std::move(zones)) {
    if (zones_.empty()) throw Error("zone registry must be non-empty");
    std::sort(zones_.begin(), zones_.end(),
              [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
    for (std::size_t i = 1; i < zones_.size(); ++i)
        if (zones_[i].zone_id == zones_[i - 1].zone_id)
            throw Error("duplicate zone_id: " + zones_[i].zone_id);
    for (const Zone& z : zones_)
        if (!valid(z.centroid))
            throw InvalidPoint("zone " + z.zone_id + " has an invalid centroid");
}

const Zone* ZoneRegistry::find(std::string_view zone_id) const {
    auto it = std::lower_bound(
        zones_.begin(), zones_.end(), zone_id,
        [](const Zone& z, std::string_view id) { return z.zone_id < id; });
    if (it == zones_.end() || it->zone_id != zone_id) return nullptr;
    return &*it;
}

const Zone& ZoneRegistry::at(std::string_view zone_id) const {
    const Zone* z = find(zone_id);
    if (!z) throw UnknownZone("unknown zone_id: " + std::string(zone_id));
    return *z;
}

std::vector<std::string> ZoneRegistry::zone_ids() const {
    std::vector<std::string> ids;
    ids.reserve(zones_.size());
    for (const Zone& z : zones_) ids.push_back(z.zone_id);
    return ids;
}

bool point_in_ring(const GeoPoint& p, std::span<const GeoPoint> ring) {
    std::size_t n = ring.size();
    if (n >= 2 && ring.front() == ring.back()) --n;  // explicit closure
    if (n < 3) return false;

    const double x = p.lon, y = p.lat;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = ring[i].lon, yi = ring[i].lat;
        const double xj = ring[j].lon, yj = ring[j].lat;
        // on-edge check so that boundary points are contained
        const double cross = (xj - xi) * (y - yi) - (x - xi) * (yj - yi);
        if (cross == 0.0 && std::min(xi, xj) <= x && x <= std::max(xi, xj) &&
            std::min(yi, yj) <= y && y <= std::max(yi, yj))
            return true;
        if ((yi > y) != (yj > y)) {
            const double x_int = xi + (y - yi) / (yj - yi) * (xj - xi);
            if (x < x_int) inside = !inside;
        }
    }
    return inside;
}

const Zone& assign_zone(const GeoPoint& p, const ZoneRegistry& registry) {
    for (const Zone& z : registry.zones())
        if (!z.boundary.empty() && point_in_ring(p, z.boundary)) return z;

    const Zone* best = nullptr;
    double best_km = std::numeric_limits<double>::infinity();
    for (const Zone& z : registry.zones()) {
        double d = haversine_km(p, z.centroid);
        if (d < best_km) {
            best_km = d;
            best = &z;
        }
    }
    return *best;
}

GeoPoint center_of_gravity(const ZoneCounts& counts, const ZoneRegistry& registry) {
    double total = 0.0, lat_sum = 0.0, lon_sum = 0.0;
    for (const auto& [zone_id, n] : counts) {
        if (n == 0.0) continue;
        if (n < 0.0) throw Error("negative count for zone " + zone_id);
        const Zone& z = registry.at(zone_id);
        total += n;
        lat_sum += z.centroid.lat * n;
        lon_sum += z.centroid.lon * n;
    }
    if (total <= 0.0) throw AllZeroCounts("center_of_gravity: every count is zero");
    return GeoPoint{lat_sum / total, lon_sum / total};
}

namespace {

std::string format_wkt(std::span<const GeoPoint> ring) {
    if (ring.empty()) return "";
    std::string s = "POLYGON((";
    char buf[64];
    for (std::size_t i = 0; i < ring.size(); ++i) {
        if (i) s += ", ";
        std::snprintf(buf, sizeof buf, "%.9f %.9f", ring[i].lon, ring[i].lat);
        s += buf;
    }
    s += "))";
    return s;
}

std::vector<GeoPoint> parse_wkt(const std::string& wkt, const std::string& zone_id) {
    if (wkt.empty()) return {};
    auto open = wkt.find("((");
    auto close = wkt.rfind("))");
    if (wkt.rfind("POLYGON", 0) != 0 || open == std::string::npos ||
        close == std::string::npos || close < open)
        throw Error("zone " + zone_id + ": malformed boundary WKT");
    std::vector<GeoPoint> ring;
    std::istringstream body(wkt.substr(open + 2, close - open - 2));
    std::string vertex;
    while (std::getline(body, vertex, ',')) {
        std::istringstream vs(vertex);
        double lon, lat;
        if (!(vs >> lon >> lat))
            throw Error("zone " + zone_id + ": malformed boundary vertex");
        ring.push_back(GeoPoint{lat, lon});
    }
    if (ring.size() < 3) throw Error("zone " + zone_id + ": degenerate boundary ring");
    return ring;
}

}  // namespace

ZoneRegistry load_zones(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open zone file: " + path.string());
    csv::Reader reader(in);
    auto header = csv::expect_header(
        reader, "zone_id,district,centroid_lat,centroid_lon,boundary_wkt",
        "zone_id,district,centroid_lat,centroid_lon");
    const bool has_wkt = header.size() == 5;

    std::vector<Zone> zones;
    while (auto row = reader.next()) {
        if (row->size() != header.size())
            throw Error(path.string() + ": zone row with wrong field count");
        Zone z;
        z.zone_id = (*row)[0];
        z.district = (*row)[1];
        try {
            z.centroid.lat = std::stod((*row)[2]);
            z.centroid.lon = std::stod((*row)[3]);
        } catch (const std::exception&) {
            throw Error(path.string() + ": non-numeric centroid for zone " + z.zone_id);
        }
        if (has_wkt) z.boundary = parse_wkt((*row)[4], z.zone_id);
        zones.push_back(std::move(z));
    }
    return ZoneRegistry(std::move(zones));
}

void save_zones(const ZoneRegistry& registry, std::ostream& out) {
    out << "zone_id,district,centroid_lat,centroid_lon,boundary_wkt\n";
    char buf[32];
    for (const Zone& z : registry.zones()) {
        std::vector<std::string> row;
        row.push_back(z.zone_id);
        row.push_back(z.district);
        std::snprintf(buf, sizeof buf, "%.9f", z.centroid.lat);
        row.push_back(buf);
        std::snprintf(buf, sizeof buf, "%.9f", z.centroid.lon);
        row.push_back(buf);
        row.push_back(format_wkt(z.boundary));
        csv::write_row(out, row);
    }
}

}  // namespace mobiscape::geo
