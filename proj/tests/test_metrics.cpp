#include <doctest.h>

#include <algorithm>
#include <random>

#include "mobiscape/metrics.hpp"

using namespace mobiscape;
using geo::GeoPoint;
using geo::Zone;
using metrics::DistanceHistogram;
using metrics::ZoneDistribution;

namespace {

ZoneDistribution dist(std::vector<double> p) {
    ZoneDistribution d;
    for (std::size_t i = 0; i < p.size(); ++i) d.zone_ids.push_back("Z" + std::to_string(i));
    d.p = std::move(p);
    return d;
}

DistanceHistogram hist(std::vector<double> p) {
    DistanceHistogram h;
    h.p = std::move(p);
    return h;
}

}  // namespace

TEST_CASE("cosine similarity") {
    CHECK(metrics::cosine_similarity(dist({0.2, 0.3, 0.5}), dist({0.2, 0.3, 0.5})) ==
          doctest::Approx(1.0));
    CHECK(metrics::cosine_similarity(dist({1, 0, 0}), dist({0, 0.4, 0.6})) ==
          doctest::Approx(0.0));
    CHECK(metrics::cosine_similarity(dist({0.5, 0.5, 0}), dist({1, 0, 0})) ==
          doctest::Approx(0.70710678).epsilon(1e-6));
    // symmetric
    CHECK(metrics::cosine_similarity(dist({0.7, 0.3}), dist({0.4, 0.6})) ==
          metrics::cosine_similarity(dist({0.4, 0.6}), dist({0.7, 0.3})));
    CHECK_THROWS_AS(metrics::cosine_similarity(dist({0, 0}), dist({1, 0})),
                    metrics::ZeroVector);
}

TEST_CASE("distribution construction normalizes and zero-fills") {
    std::vector<std::string> universe{"Z1", "Z2", "Z3"};
    auto d = metrics::to_distribution({{"Z1", 3.0}, {"Z3", 1.0}}, universe);
    CHECK(d.p[0] == doctest::Approx(0.75));
    CHECK(d.p[1] == 0.0);
    CHECK(d.p[2] == doctest::Approx(0.25));
    CHECK_THROWS_AS(metrics::to_distribution({{"Z1", 0.0}}, universe), metrics::ZeroVector);

    // scaling one side's raw counts cannot move cosine similarity
    auto a = metrics::to_distribution({{"Z1", 3.0}, {"Z2", 5.0}}, universe);
    auto b = metrics::to_distribution({{"Z1", 30.0}, {"Z2", 50.0}}, universe);
    auto s = metrics::to_distribution({{"Z2", 1.0}, {"Z3", 1.0}}, universe);
    CHECK(metrics::cosine_similarity(a, s) ==
          doctest::Approx(metrics::cosine_similarity(b, s)).epsilon(1e-14));
}

TEST_CASE("gravity distance composes centers of gravity") {
    std::vector<Zone> zones(2);
    zones[0].zone_id = "Z1";
    zones[0].centroid = {40.0, 116.0};
    zones[1].zone_id = "Z2";
    zones[1].centroid = {40.0, 116.0 + 3.0 / (111.32 * std::cos(40.0 * 3.14159265 / 180.0))};
    geo::ZoneRegistry registry(std::move(zones));

    CHECK(metrics::gravity_distance({{"Z1", 5.0}}, {{"Z1", 9.0}}, registry) ==
          doctest::Approx(0.0));
    CHECK(metrics::gravity_distance({{"Z1", 4.0}}, {{"Z2", 2.0}}, registry) ==
          doctest::Approx(3.0).epsilon(1e-3));
    // weighted case: c sits 1/4 of the way, s 3/4 -> half the span apart
    CHECK(metrics::gravity_distance({{"Z1", 3.0}, {"Z2", 1.0}},
                                    {{"Z1", 1.0}, {"Z2", 3.0}}, registry) ==
          doctest::Approx(1.5).epsilon(1e-3));
    CHECK_THROWS_AS(metrics::gravity_distance({{"Z1", 0.0}}, {{"Z2", 1.0}}, registry),
                    geo::AllZeroCounts);
}

TEST_CASE("coincidence ratio") {
    CHECK(metrics::coincidence_ratio(hist({0.5, 0.5}), hist({0.5, 0.5})) ==
          doctest::Approx(1.0));
    CHECK(metrics::coincidence_ratio(hist({1, 0}), hist({0, 1})) == doctest::Approx(0.0));
    CHECK(metrics::coincidence_ratio(hist({0.6, 0.4}), hist({0.4, 0.6})) ==
          doctest::Approx(2.0 / 3.0));
    CHECK(metrics::coincidence_ratio(hist({0.6, 0.4}), hist({0.4, 0.6})) ==
          metrics::coincidence_ratio(hist({0.4, 0.6}), hist({0.6, 0.4})));
    CHECK_THROWS_AS(metrics::coincidence_ratio(hist({1}), hist({0.5, 0.5})),
                    metrics::BinningMismatch);

    // invariant under a permutation applied to both histograms
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(8), b(8);
        double at = 0, bt = 0;
        for (int i = 0; i < 8; ++i) {
            a[i] = double(gen() % 100);
            b[i] = double(gen() % 100);
            at += a[i];
            bt += b[i];
        }
        for (int i = 0; i < 8; ++i) {
            a[i] /= at;
            b[i] /= bt;
        }
        const double before = metrics::coincidence_ratio(hist(a), hist(b));
        std::vector<std::size_t> perm{3, 1, 7, 0, 5, 2, 6, 4};
        std::vector<double> ap(8), bp(8);
        for (int i = 0; i < 8; ++i) {
            ap[i] = a[perm[i]];
            bp[i] = b[perm[i]];
        }
        CHECK(metrics::coincidence_ratio(hist(ap), hist(bp)) ==
              doctest::Approx(before).epsilon(1e-14));
    }
}

TEST_CASE("commute histogram binning") {
    using Pair = std::pair<GeoPoint, GeoPoint>;
    const GeoPoint origin{39.9, 116.4};
    auto east = [&](double km) {
        return GeoPoint{origin.lat,
                        origin.lon + km / (111.32 * std::cos(origin.lat * 3.14159265 / 180.0))};
    };

    SUBCASE("one commuter near zero lands in bin 0") {
        std::vector<Pair> pairs{{origin, east(0.1)}};
        auto h = metrics::commute_histogram(pairs);
        CHECK(h.p[0] == doctest::Approx(1.0));
    }
    SUBCASE("overflow accumulates in the last bin") {
        std::vector<Pair> pairs{{origin, {39.9, 117.9}}};  // ~128 km
        auto h = metrics::commute_histogram(pairs);
        CHECK(h.p[499] == doctest::Approx(1.0));
    }
    SUBCASE("0.1 km and 0.3 km split across bins 0 and 1") {
        std::vector<Pair> pairs{{origin, east(0.1)}, {origin, east(0.3)}};
        auto h = metrics::commute_histogram(pairs);
        CHECK(h.p[0] == doctest::Approx(0.5));
        CHECK(h.p[1] == doctest::Approx(0.5));
    }
    SUBCASE("no commuters") {
        std::vector<Pair> none;
        CHECK_THROWS_AS(metrics::commute_histogram(none), metrics::NoCommuters);
    }
}
