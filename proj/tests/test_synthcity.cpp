#include <doctest.h>

#include <map>
#include <set>

#include "mobiscape/location_id.hpp"
#include "mobiscape/popsynth.hpp"
#include "mobiscape/synthcity.hpp"
#include "test_util.hpp"

using namespace mobiscape;
using synthcity::CityConfig;

TEST_CASE("config validation") {
    CityConfig bad;
    bad.n_users = 0;
    CHECK_THROWS_AS(synthcity::validate(bad), synthcity::ConfigInvalid);
    bad = CityConfig{};
    bad.noise_venue_rate = 1.5;
    CHECK_THROWS_AS(synthcity::validate(bad), synthcity::ConfigInvalid);
    bad = CityConfig{};
    bad.bias_spec = {0, 0, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(synthcity::validate(bad), synthcity::ConfigInvalid);
    CHECK_NOTHROW(synthcity::validate(CityConfig{}));
}

TEST_CASE("generation is deterministic per seed, byte for byte") {
    CityConfig cfg;
    cfg.rng_seed = 5;
    cfg.n_users = 40;
    cfg.n_zones = 16;
    cfg.days_span = 30;
    cfg.survey_size = 50;

    testutil::TempDir dir("gen");
    auto a = synthcity::generate(cfg);
    auto b = synthcity::generate(cfg);
    CHECK(a.checkins == b.checkins);
    CHECK(a.checkins.size() > 0);

    synthcity::write_city(a, dir.file("run1"));
    synthcity::write_city(b, dir.file("run2"));
    for (const char* name : {"zones.csv", "checkins.csv", "profiles.csv",
                             "survey_persons.csv", "survey_trips.csv", "truth.csv"}) {
        CHECK(testutil::slurp(dir.file("run1") / name) ==
              testutil::slurp(dir.file("run2") / name));
        CHECK(!testutil::slurp(dir.file("run1") / name).empty());
    }

    cfg.rng_seed = 6;
    auto c = synthcity::generate(cfg);
    CHECK(a.checkins != c.checkins);
}

TEST_CASE("noiseless construction plants the home as the top night venue") {
    CityConfig cfg;
    cfg.rng_seed = 9;
    cfg.n_users = 30;
    cfg.n_zones = 16;
    cfg.days_span = 40;
    cfg.survey_size = 10;
    cfg.noise_venue_rate = 0.0;
    cfg.gps_jitter_m = 0.0;
    cfg.home_event_rate = 1.0;
    cfg.work_event_rate = 1.0;
    auto city = synthcity::generate(cfg);

    std::map<std::string, std::map<std::string, int>> night_counts;
    std::map<std::string, geo::GeoPoint> venue_pos;
    for (const auto& r : city.checkins) {
        if (ident::in_home_window(r.when)) ++night_counts[r.user_id][r.venue_id];
        venue_pos[r.venue_id] = r.location;
    }
    for (const auto& t : city.truth) {
        REQUIRE(night_counts.count(t.user_id));
        const auto& counts = night_counts[t.user_id];
        auto top = std::max_element(counts.begin(), counts.end(),
                                    [](const auto& a, const auto& b) {
                                        return a.second < b.second;
                                    });
        // with zero jitter the top night venue sits exactly on the planted home
        CHECK(venue_pos[top->first].lat == doctest::Approx(t.home.lat).epsilon(1e-12));
        CHECK(venue_pos[top->first].lon == doctest::Approx(t.home.lon).epsilon(1e-12));
    }
}

TEST_CASE("venue identity is consistent and planted places recur enough") {
    CityConfig cfg;
    cfg.rng_seed = 12;
    cfg.n_users = 60;
    cfg.n_zones = 25;
    cfg.days_span = 30;  // >= 10, rates >= 0.5
    cfg.survey_size = 20;
    auto city = synthcity::generate(cfg);

    std::map<std::string, std::pair<geo::GeoPoint, ingest::PoiCategory>> venues;
    std::map<std::string, std::map<std::string, std::set<std::int32_t>>> venue_days;
    for (const auto& r : city.checkins) {
        auto [it, inserted] = venues.try_emplace(r.venue_id,
                                                 std::make_pair(r.location, r.poi));
        if (!inserted) {
            CHECK(it->second.first == r.location);
            CHECK(it->second.second == r.poi);
        }
        venue_days[r.user_id][r.venue_id].insert(r.when.day_number);
    }

    for (const auto& t : city.truth) {
        // the planted home venue accumulates at least 4 distinct days
        int best_days = 0;
        for (const auto& [venue, days] : venue_days[t.user_id])
            best_days = std::max(best_days, int(days.size()));
        CHECK(best_days >= 4);
    }
}

TEST_CASE("survey marginals are internally consistent") {
    CityConfig cfg;
    cfg.rng_seed = 21;
    cfg.n_users = 10;
    cfg.n_zones = 16;
    cfg.days_span = 20;
    cfg.survey_size = 300;
    auto city = synthcity::generate(cfg);

    geo::ZoneRegistry registry(city.zones);
    std::vector<std::string> districts;
    for (const auto& z : registry.zones()) districts.push_back(z.district);
    auto scheme = popsynth::default_scheme(districts);
    auto tables = popsynth::build_constraints(city.survey_persons, scheme, registry, true);
    for (const auto& [name, table] : tables) {
        for (const auto& z : table.zones) {
            auto sum = [](const std::vector<int>& v) {
                long long s = 0;
                for (int x : v) s += x;
                return s;
            };
            CHECK(sum(z.cells.gender) == z.population);
            CHECK(sum(z.cells.age) == z.population);
            CHECK(sum(z.cells.age_gender) == z.population);
            CHECK(sum(z.cells.district) == z.population);
            // cross margins collapse to the age and gender margins
            for (std::size_t a = 0; a < scheme.age_bands.size(); ++a) {
                int row = 0;
                for (std::size_t g = 0; g < scheme.genders.size(); ++g)
                    row += z.cells.age_gender[a * scheme.genders.size() + g];
                CHECK(row == z.cells.age[a]);
            }
        }
    }
}

TEST_CASE("uniform bias spec matches the survey age profile") {
    CityConfig cfg;
    cfg.rng_seed = 33;
    cfg.n_users = 2000;
    cfg.n_zones = 25;
    cfg.days_span = 12;
    cfg.checkins_per_user_range = {5, 10};
    cfg.survey_size = 2000;
    auto city = synthcity::generate(cfg);

    auto scheme = popsynth::default_scheme({"D1"});
    std::array<double, 8> users{}, survey{};
    for (const auto& t : city.truth) ++users[popsynth::age_band_index(scheme, t.age)];
    for (const auto& p : city.survey_persons)
        ++survey[popsynth::age_band_index(scheme, p.age)];

    // two-sample chi-square over the eight bands
    double chi2 = 0.0;
    const double nu = city.truth.size(), ns = city.survey_persons.size();
    for (int b = 0; b < 8; ++b) {
        const double total = users[b] + survey[b];
        if (total == 0) continue;
        const double eu = total * nu / (nu + ns);
        const double es = total * ns / (nu + ns);
        chi2 += (users[b] - eu) * (users[b] - eu) / eu +
                (survey[b] - es) * (survey[b] - es) / es;
    }
    CHECK(popsynth::chi_square_sf(chi2, 7) > 0.01);
}

TEST_CASE("skewed bias spec shifts the user age profile") {
    CityConfig cfg;
    cfg.rng_seed = 34;
    cfg.n_users = 1000;
    cfg.n_zones = 16;
    cfg.days_span = 10;
    cfg.checkins_per_user_range = {5, 8};
    cfg.survey_size = 100;
    cfg.bias_spec = {20, 20, 1, 1, 1, 1, 1, 1};
    auto city = synthcity::generate(cfg);

    auto scheme = popsynth::default_scheme({"D1"});
    int young = 0;
    for (const auto& t : city.truth)
        if (popsynth::age_band_index(scheme, t.age) <= 1) ++young;
    CHECK(double(young) / city.truth.size() > 0.7);
}
