#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mobiscape/geo.hpp"
#include "test_util.hpp"

using namespace mobiscape;
using geo::GeoPoint;
using geo::Zone;

TEST_CASE("haversine identity and closed-form arcs") {
    CHECK(geo::haversine_km({39.9, 116.4}, {39.9, 116.4}) == 0.0);
    // one degree of longitude at the equator
    CHECK(geo::haversine_km({0.0, 0.0}, {0.0, 1.0}) == doctest::Approx(111.19).epsilon(0.0001));
    // pure latitude arc
    CHECK(geo::haversine_km({39.90, 116.40}, {39.95, 116.40}) ==
          doctest::Approx(5.56).epsilon(0.002));
}

TEST_CASE("haversine symmetry, non-negativity, triangle inequality") {
    std::mt19937_64 gen(7);
    auto coord = [&](double lo, double hi) {
        return lo + (hi - lo) * (double(gen() >> 11) * 0x1.0p-53);
    };
    for (int i = 0; i < 200; ++i) {
        GeoPoint a{coord(-80, 80), coord(-179, 179)};
        GeoPoint b{coord(-80, 80), coord(-179, 179)};
        GeoPoint c{coord(-80, 80), coord(-179, 179)};
        const double ab = geo::haversine_km(a, b);
        const double ba = geo::haversine_km(b, a);
        const double ac = geo::haversine_km(a, c);
        const double cb = geo::haversine_km(c, b);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(geo::haversine_km(a, a) == 0.0);
        CHECK(ab <= ac + cb + 1e-9 * (ac + cb + 1.0));
    }
}

namespace {

std::vector<Zone> grid_zones() {
    // three centroid-only zones on a line, 0.01 deg apart
    std::vector<Zone> zones;
    for (int i = 0; i < 3; ++i) {
        Zone z;
        z.zone_id = "Z" + std::to_string(i + 1);
        z.district = "D1";
        z.centroid = GeoPoint{40.0, 116.0 + 0.01 * i};
        zones.push_back(z);
    }
    return zones;
}

}  // namespace

TEST_CASE("assign_zone: centroid fallback and containment priority") {
    SUBCASE("point at a zone centroid, no boundaries") {
        geo::ZoneRegistry registry(grid_zones());
        CHECK(geo::assign_zone({40.0, 116.01}, registry).zone_id == "Z2");
    }
    SUBCASE("containment beats proximity") {
        auto zones = grid_zones();
        // zone B's polygon holds the probe point even though A's centroid is closer
        Zone b;
        b.zone_id = "ZB";
        b.district = "D1";
        b.centroid = GeoPoint{41.0, 117.0};  // far away
        b.boundary = {GeoPoint{39.99, 115.99}, GeoPoint{39.99, 116.02},
                      GeoPoint{40.01, 116.02}, GeoPoint{40.01, 115.99}};
        zones.push_back(b);
        geo::ZoneRegistry registry(std::move(zones));
        CHECK(geo::assign_zone({40.0, 116.0}, registry).zone_id == "ZB");
    }
    SUBCASE("outside all boundaries, nearest centroid wins") {
        geo::ZoneRegistry registry(grid_zones());
        // ~2 km from Z3, further from the others
        CHECK(geo::assign_zone({40.018, 116.02}, registry).zone_id == "Z3");
    }
    SUBCASE("deterministic") {
        geo::ZoneRegistry registry(grid_zones());
        const GeoPoint p{40.004, 116.004};
        const std::string first = geo::assign_zone(p, registry).zone_id;
        for (int i = 0; i < 5; ++i) CHECK(geo::assign_zone(p, registry).zone_id == first);
    }
}

TEST_CASE("point_in_ring handles closure and edges") {
    std::vector<GeoPoint> open_ring{{0, 0}, {0, 2}, {2, 2}, {2, 0}};
    CHECK(geo::point_in_ring({1, 1}, open_ring));
    CHECK_FALSE(geo::point_in_ring({3, 1}, open_ring));
    std::vector<GeoPoint> closed_ring = open_ring;
    closed_ring.push_back(open_ring.front());
    CHECK(geo::point_in_ring({1, 1}, closed_ring));
    CHECK(geo::point_in_ring({0, 1}, closed_ring));  // on an edge counts as inside
}

TEST_CASE("center_of_gravity weighted means") {
    std::vector<Zone> zones;
    Zone z1;
    z1.zone_id = "Z1";
    z1.centroid = {40.0, 116.0};
    Zone z2;
    z2.zone_id = "Z2";
    z2.centroid = {40.2, 116.2};
    zones.push_back(z1);
    zones.push_back(z2);
    geo::ZoneRegistry registry(std::move(zones));

    SUBCASE("single zone") {
        auto c = geo::center_of_gravity({{"Z1", 7}}, registry);
        CHECK(c.lat == doctest::Approx(40.0));
        CHECK(c.lon == doctest::Approx(116.0));
    }
    SUBCASE("equal weights land midway") {
        auto c = geo::center_of_gravity({{"Z1", 1}, {"Z2", 1}}, registry);
        CHECK(c.lat == doctest::Approx(40.1));
        CHECK(c.lon == doctest::Approx(116.1));
    }
    SUBCASE("3:1 weighting") {
        auto c = geo::center_of_gravity({{"Z1", 3}, {"Z2", 1}}, registry);
        CHECK(c.lat == doctest::Approx(40.05));
        CHECK(c.lon == doctest::Approx(116.05));
    }
    SUBCASE("invariant under scaling all counts") {
        auto a = geo::center_of_gravity({{"Z1", 3}, {"Z2", 5}}, registry);
        auto b = geo::center_of_gravity({{"Z1", 21}, {"Z2", 35}}, registry);
        CHECK(a.lat == doctest::Approx(b.lat).epsilon(1e-12));
        CHECK(a.lon == doctest::Approx(b.lon).epsilon(1e-12));
    }
    SUBCASE("all-zero counts rejected") {
        CHECK_THROWS_AS(geo::center_of_gravity({{"Z1", 0}, {"Z2", 0}}, registry),
                        geo::AllZeroCounts);
    }
}

TEST_CASE("zone registry rules") {
    CHECK_THROWS_AS(geo::ZoneRegistry({}), Error);
    std::vector<Zone> dup(2);
    dup[0].zone_id = dup[1].zone_id = "Z1";
    CHECK_THROWS_AS(geo::ZoneRegistry(std::move(dup)), Error);
}

TEST_CASE("zone file round trip with WKT boundaries") {
    testutil::TempDir dir("zones");
    std::vector<Zone> zones = grid_zones();
    zones[1].boundary = {GeoPoint{39.99, 116.005}, GeoPoint{39.99, 116.015},
                         GeoPoint{40.01, 116.015}, GeoPoint{40.01, 116.005},
                         GeoPoint{39.99, 116.005}};
    geo::ZoneRegistry registry(std::move(zones));

    std::ostringstream buffer;
    geo::save_zones(registry, buffer);
    testutil::write_file(dir.file("zones.csv"), buffer.str());
    auto loaded = geo::load_zones(dir.file("zones.csv"));

    REQUIRE(loaded.zones().size() == registry.zones().size());
    CHECK(loaded.zones()[1].boundary.size() == 5);
    CHECK(loaded.zones()[1].boundary[0].lat == doctest::Approx(39.99));
    CHECK(loaded.zones()[0].boundary.empty());

    // serialize -> load -> serialize is a fixpoint
    std::ostringstream again;
    geo::save_zones(loaded, again);
    CHECK(again.str() == buffer.str());
}
