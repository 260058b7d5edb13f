#include "mobiscape/synthcity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mobiscape/csv.hpp"
#include "mobiscape/datetime.hpp"
#include "mobiscape/ground_truth.hpp"
#include "mobiscape/popsynth.hpp"
#include "mobiscape/rng.hpp"

namespace mobiscape::synthcity {

using geo::GeoPoint;
using geo::Zone;
using ingest::CheckIn;
using ingest::PoiCategory;
using ingest::SurveyPerson;
using ingest::SurveyTrip;
using ingest::TripPurpose;
using ingest::UserProfile;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBaseLat = 39.5;
constexpr double kBaseLon = 116.0;
constexpr double kZoneLatStep = 0.009;  // about 1 km

// commute distance medians (km) by age band: people around 30-40 commute the
// furthest, the retired barely at all
constexpr std::array<double, 8> kCommuteMedianKm{0.8, 1.0, 3.8, 4.2,
                                                 4.4, 4.0, 2.2, 0.6};
constexpr double kCommuteSigma = 0.40;

double zone_lon_step() { return kZoneLatStep / std::cos(kBaseLat * kPi / 180.0); }

std::string pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

struct Grid {
    int side = 1;
    double lon_step = 0.0;
    double lat_hi = 0.0;
    double lon_hi = 0.0;
};

Grid make_grid(int n_zones) {
    Grid g;
    g.side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_zones))));
    g.lon_step = zone_lon_step();
    g.lat_hi = kBaseLat + g.side * kZoneLatStep;
    g.lon_hi = kBaseLon + g.side * g.lon_step;
    return g;
}

GeoPoint offset_m(const GeoPoint& p, double east_m, double north_m) {
    const double lat = p.lat + north_m / 111320.0;
    const double lon = p.lon + east_m / (111320.0 * std::cos(kBaseLat * kPi / 180.0));
    return GeoPoint{lat, lon};
}

GeoPoint clamp_to_city(GeoPoint p, const Grid& g) {
    p.lat = std::clamp(p.lat, kBaseLat + 1e-6, g.lat_hi - 1e-6);
    p.lon = std::clamp(p.lon, kBaseLon + 1e-6, g.lon_hi - 1e-6);
    return p;
}

// time in the night window [22:00, 07:00)
std::int32_t home_window_second(Rng& rng) {
    const int offset = static_cast<int>(rng.bounded(9 * 3600));
    return offset < 2 * 3600 ? 22 * 3600 + offset : offset - 2 * 3600;
}

// time in the working windows [09:00, 12:00) or [13:00, 18:00)
std::int32_t work_window_second(Rng& rng) {
    const int offset = static_cast<int>(rng.bounded(8 * 3600));
    return offset < 3 * 3600 ? 9 * 3600 + offset : 13 * 3600 + (offset - 3 * 3600);
}

std::size_t weighted_band(Rng& rng, const std::array<double, 8>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    return weights.size() - 1;
}

int age_in_band(Rng& rng, const std::pair<int, int>& band, bool open_ended) {
    const int hi = open_ended ? 69 : band.second;
    return rng.uniform_int(band.first, hi);
}

}  // namespace

void validate(const CityConfig& cfg) {
    if (cfg.n_zones < 1 || cfg.n_users < 1 || cfg.days_span < 1 || cfg.survey_size < 1 ||
        cfg.n_districts < 1)
        throw ConfigInvalid("counts must be positive");
    if (cfg.checkins_per_user_range.first < 0 ||
        cfg.checkins_per_user_range.second < cfg.checkins_per_user_range.first)
        throw ConfigInvalid("bad checkins_per_user_range");
    for (double rate : {cfg.home_event_rate, cfg.work_event_rate, cfg.noise_venue_rate,
                        cfg.commuter_share, cfg.text_rate})
        if (rate < 0.0 || rate > 1.0) throw ConfigInvalid("rates must be in [0, 1]");
    if (cfg.gps_jitter_m < 0.0) throw ConfigInvalid("gps_jitter_m must be >= 0");
    double weight_total = 0.0;
    for (double w : cfg.bias_spec) {
        if (w < 0.0) throw ConfigInvalid("bias_spec weights must be >= 0");
        weight_total += w;
    }
    if (weight_total <= 0.0) throw ConfigInvalid("bias_spec weights are all zero");
}

GeneratedCity generate(const CityConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.rng_seed);
    GeneratedCity city;

    const Grid grid = make_grid(cfg.n_zones);
    const auto age_bands = popsynth::default_scheme({}).age_bands;

    // zones on a square grid; districts are contiguous row bands. The
    // representative centroid sits at a random interior point, like the
    // irregular zone centroids of a real survey, not on the lattice.
    for (int i = 0; i < cfg.n_zones; ++i) {
        const int row = i / grid.side;
        const int col = i % grid.side;
        Zone z;
        z.zone_id = "Z" + pad(i + 1, 4);
        int d = row * cfg.n_districts / grid.side;
        d = std::min(d, cfg.n_districts - 1);
        z.district = "D" + pad(d + 1, 2);
        const double lat0 = kBaseLat + row * kZoneLatStep;
        const double lon0 = kBaseLon + col * grid.lon_step;
        z.centroid = GeoPoint{lat0 + rng.uniform(0.15, 0.85) * kZoneLatStep,
                              lon0 + rng.uniform(0.15, 0.85) * grid.lon_step};
        z.boundary = {GeoPoint{lat0, lon0},
                      GeoPoint{lat0, lon0 + grid.lon_step},
                      GeoPoint{lat0 + kZoneLatStep, lon0 + grid.lon_step},
                      GeoPoint{lat0 + kZoneLatStep, lon0},
                      GeoPoint{lat0, lon0}};
        city.zones.push_back(std::move(z));
    }
    geo::ZoneRegistry registry(city.zones);

    auto point_in_zone = [&](const Zone& z, Rng& r) {
        // keep away from the edges so containment is unambiguous
        const double u = 0.1 + 0.8 * r.uniform();
        const double v = 0.1 + 0.8 * r.uniform();
        const double lat0 = z.boundary[0].lat;
        const double lon0 = z.boundary[0].lon;
        return GeoPoint{lat0 + u * kZoneLatStep, lon0 + v * grid.lon_step};
    };

    auto commute_destination = [&](const GeoPoint& from, std::size_t band, Rng& r) {
        const double distance_km = r.lognormal(std::log(kCommuteMedianKm[band]),
                                               kCommuteSigma);
        const double bearing = r.uniform() * 2.0 * kPi;
        GeoPoint p = offset_m(from, distance_km * 1000.0 * std::cos(bearing),
                              distance_km * 1000.0 * std::sin(bearing));
        return clamp_to_city(p, grid);
    };

    // --- survey: unbiased demographics, zone-coded trips -------------------
    const std::array<double, 8> uniform_weights{1, 1, 1, 1, 1, 1, 1, 1};
    const DateTime survey_day = make_datetime(2013, 5, 13);  // a Monday
    for (int s = 0; s < cfg.survey_size; ++s) {
        SurveyPerson p;
        p.person_id = "P" + pad(s + 1, 5);
        p.gender = rng.bernoulli(0.5) ? 'F' : 'M';
        const std::size_t band = weighted_band(rng, uniform_weights);
        p.age = age_in_band(rng, age_bands[band], band + 1 == age_bands.size());
        const Zone& home_zone =
            city.zones[static_cast<std::size_t>(rng.bounded(city.zones.size()))];
        p.home_zone = home_zone.zone_id;
        p.district = home_zone.district;
        p.is_commuter = rng.bernoulli(cfg.commuter_share);

        auto trip = [&](TripPurpose purpose, const std::string& dest, int depart_h,
                        int depart_m, int minutes) {
            SurveyTrip t;
            t.person_id = p.person_id;
            t.purpose = purpose;
            t.dest_zone = dest;
            t.depart = survey_day;
            t.depart.sec_of_day = depart_h * 3600 + depart_m * 60;
            t.arrive = t.depart;
            t.arrive.sec_of_day += minutes * 60;
            city.survey_trips.push_back(std::move(t));
        };

        if (p.is_commuter) {
            const GeoPoint work = commute_destination(home_zone.centroid, band, rng);
            trip(TripPurpose::Work, geo::assign_zone(work, registry).zone_id, 7, 40, 35);
        }
        if (rng.bernoulli(0.5)) {
            const double d_km = rng.lognormal(std::log(1.5), 0.6);
            const double bearing = rng.uniform() * 2.0 * kPi;
            GeoPoint e = clamp_to_city(offset_m(home_zone.centroid,
                                                d_km * 1000.0 * std::cos(bearing),
                                                d_km * 1000.0 * std::sin(bearing)),
                                       grid);
            trip(TripPurpose::Entertainment, geo::assign_zone(e, registry).zone_id, 19, 10,
                 25);
        }
        if (rng.bernoulli(0.4)) {
            const double d_km = rng.lognormal(std::log(2.0), 0.7);
            const double bearing = rng.uniform() * 2.0 * kPi;
            GeoPoint o = clamp_to_city(offset_m(home_zone.centroid,
                                                d_km * 1000.0 * std::cos(bearing),
                                                d_km * 1000.0 * std::sin(bearing)),
                                       grid);
            trip(TripPurpose::Other, geo::assign_zone(o, registry).zone_id, 15, 0, 30);
        }
        trip(TripPurpose::Home, p.home_zone, 21, 30, 20);
        city.survey_persons.push_back(std::move(p));
    }

    // --- check-in users: bias_spec demographics, venue-level traces --------
    const auto keywords = ground_truth::default_keywords();
    const std::vector<std::string> fillers{"哈哈", "吃饭中", "nice", "今天天气不错"};
    const DateTime day0 = make_datetime(2013, 3, 4);  // a Monday

    auto jittered = [&](const GeoPoint& p, Rng& r) {
        return offset_m(p, r.normal() * cfg.gps_jitter_m, r.normal() * cfg.gps_jitter_m);
    };

    for (int u = 0; u < cfg.n_users; ++u) {
        const std::string user_id = "U" + pad(u + 1, 5);
        const std::string venue_stem = "V" + pad(u + 1, 5);

        PlantedTruth truth;
        truth.user_id = user_id;
        truth.gender = rng.bernoulli(0.5) ? 'F' : 'M';
        const std::size_t band = weighted_band(rng, cfg.bias_spec);
        truth.age = age_in_band(rng, age_bands[band], band + 1 == age_bands.size());

        const Zone& home_zone =
            city.zones[static_cast<std::size_t>(rng.bounded(city.zones.size()))];
        truth.home = point_in_zone(home_zone, rng);
        const bool commuter = rng.bernoulli(cfg.commuter_share);

        struct Venue {
            std::string id;
            GeoPoint pos;
            PoiCategory poi;
        };
        const Venue home_venue{venue_stem + "H", jittered(truth.home, rng),
                               PoiCategory::Residential};

        std::optional<Venue> work_primary, work_secondary;
        if (commuter) {
            truth.work = commute_destination(truth.home, band, rng);
            const PoiCategory work_pois[] = {PoiCategory::Corporation, PoiCategory::School,
                                             PoiCategory::IndustrialPark};
            const PoiCategory poi = work_pois[rng.bounded(3)];
            work_primary = Venue{venue_stem + "W", jittered(*truth.work, rng), poi};
            if (rng.bernoulli(0.6)) {
                // office complexes: a second venue a block away shares the days
                const double off = rng.uniform(60.0, 180.0);
                const double bearing = rng.uniform() * 2.0 * kPi;
                GeoPoint p = clamp_to_city(
                    offset_m(*truth.work, off * std::cos(bearing), off * std::sin(bearing)),
                    grid);
                work_secondary = Venue{venue_stem + "X", jittered(p, rng), poi};
            }
        }

        std::vector<Venue> noise_pool;
        const int n_noise = rng.uniform_int(3, 8);
        for (int k = 0; k < n_noise; ++k) {
            GeoPoint p{rng.uniform(kBaseLat + 1e-4, grid.lat_hi - 1e-4),
                       rng.uniform(kBaseLon + 1e-4, grid.lon_hi - 1e-4)};
            const double roll = rng.uniform();
            PoiCategory poi = PoiCategory::Entertainment;
            if (roll >= 0.45 && roll < 0.75) poi = PoiCategory::Other;
            else if (roll >= 0.75 && roll < 0.90) poi = PoiCategory::Unknown;
            else if (roll >= 0.90 && roll < 0.95) poi = PoiCategory::Residential;
            else if (roll >= 0.95) poi = PoiCategory::Corporation;
            noise_pool.push_back(Venue{venue_stem + "N" + std::to_string(k), p, poi});
        }

        auto emit = [&](const Venue& venue, DateTime when,
                        const std::vector<std::string>* keyword_set) {
            CheckIn r;
            r.user_id = user_id;
            r.when = when;
            r.venue_id = venue.id;
            r.location = venue.pos;
            r.poi = venue.poi;
            if (keyword_set) {
                if (rng.bernoulli(cfg.text_rate))
                    r.text = (*keyword_set)[rng.bounded(keyword_set->size())];
            } else if (rng.bernoulli(0.3)) {
                r.text = fillers[rng.bounded(fillers.size())];
            }
            city.checkins.push_back(std::move(r));
        };

        int emitted = 0;
        for (int d = 0; d < cfg.days_span; ++d) {
            DateTime when = day0;
            when.day_number += d;
            if (rng.bernoulli(cfg.home_event_rate)) {
                when.sec_of_day = home_window_second(rng);
                emit(home_venue, when, &keywords.home_keywords);
                ++emitted;
            }
            if (work_primary && when.is_weekday() && rng.bernoulli(cfg.work_event_rate)) {
                when.sec_of_day = work_window_second(rng);
                const Venue& v =
                    work_secondary && rng.bernoulli(0.4) ? *work_secondary : *work_primary;
                emit(v, when, &keywords.work_keywords);
                ++emitted;
            }
            if (!noise_pool.empty() && rng.bernoulli(cfg.noise_venue_rate)) {
                when.sec_of_day = static_cast<std::int32_t>(rng.bounded(86400));
                emit(noise_pool[rng.bounded(noise_pool.size())], when, nullptr);
                ++emitted;
            }
        }
        // top up sparse users at their home venue, inside the night window
        const int target = rng.uniform_int(cfg.checkins_per_user_range.first,
                                           cfg.checkins_per_user_range.second);
        while (emitted < target) {
            DateTime when = day0;
            when.day_number += static_cast<std::int32_t>(rng.bounded(cfg.days_span));
            when.sec_of_day = home_window_second(rng);
            emit(home_venue, when, &keywords.home_keywords);
            ++emitted;
        }

        UserProfile profile;
        profile.user_id = user_id;
        profile.gender = truth.gender;
        if (!rng.bernoulli(0.1)) profile.age = truth.age;  // some users hide their age
        const double edu = rng.uniform();
        if (edu < 0.2) profile.education = ingest::Education::Primary;
        else if (edu < 0.5) profile.education = ingest::Education::Secondary;
        else if (edu < 0.9) profile.education = ingest::Education::Tertiary;
        city.profiles.push_back(std::move(profile));
        city.truth.push_back(std::move(truth));
    }

    return city;
}

void write_city(const GeneratedCity& city, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    geo::ZoneRegistry registry(city.zones);
    csv::atomic_write(dir / "zones.csv",
                      [&](std::ostream& out) { geo::save_zones(registry, out); });
    csv::atomic_write(dir / "checkins.csv", [&](std::ostream& out) {
        ingest::save_checkins(city.checkins, out);
    });
    csv::atomic_write(dir / "profiles.csv", [&](std::ostream& out) {
        ingest::save_profiles(city.profiles, out);
    });
    csv::atomic_write(dir / "survey_persons.csv", [&](std::ostream& out) {
        ingest::save_survey_persons(city.survey_persons, out);
    });
    csv::atomic_write(dir / "survey_trips.csv", [&](std::ostream& out) {
        ingest::save_survey_trips(city.survey_trips, out);
    });
    csv::atomic_write(dir / "truth.csv", [&](std::ostream& out) {
        out << "user_id,role,lat,lon\n";
        char buf[32];
        for (const PlantedTruth& t : city.truth) {
            auto write = [&](const char* role, const GeoPoint& p) {
                std::vector<std::string> row;
                row.push_back(t.user_id);
                row.push_back(role);
                std::snprintf(buf, sizeof buf, "%.9f", p.lat);
                row.push_back(buf);
                std::snprintf(buf, sizeof buf, "%.9f", p.lon);
                row.push_back(buf);
                csv::write_row(out, row);
            };
            write("home", t.home);
            if (t.work) write("work", *t.work);
        }
    });
}

}  // namespace mobiscape::synthcity
