#ifndef MOBISCAPE_SYNTHCITY_HPP
#define MOBISCAPE_SYNTHCITY_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"
#include "mobiscape/ingest.hpp"

namespace mobiscape::synthcity {

MOBISCAPE_DEFINE_ERROR(ConfigInvalid);

// A grid city with planted homes and workplaces. Everything is driven by one
// seed; two runs with the same config are byte-identical.
struct CityConfig {
    std::uint64_t rng_seed = 7;
    int n_zones = 100;
    int n_users = 500;
    int days_span = 120;
    std::pair<int, int> checkins_per_user_range{20, 60};
    double home_event_rate = 0.8;   // per-day chance of a night check-in at home
    double work_event_rate = 0.7;   // per-weekday chance of a working-hours check-in
    double noise_venue_rate = 0.3;  // per-day chance of a check-in somewhere random
    double gps_jitter_m = 15.0;     // Gaussian venue placement error, per axis
    int survey_size = 800;
    // Sampling weights over the eight age bands for check-in users; the survey
    // always draws uniformly, so a non-uniform spec plants demographic bias.
    std::array<double, 8> bias_spec{1, 1, 1, 1, 1, 1, 1, 1};
    double commuter_share = 0.7;
    int n_districts = 8;
    double text_rate = 0.5;  // share of home/work check-ins carrying a keyword
};

void validate(const CityConfig& cfg);

struct PlantedTruth {
    std::string user_id;
    geo::GeoPoint home;
    std::optional<geo::GeoPoint> work;
    char gender = 'M';
    int age = 0;
};

struct GeneratedCity {
    std::vector<geo::Zone> zones;
    std::vector<ingest::CheckIn> checkins;
    std::vector<ingest::UserProfile> profiles;
    std::vector<ingest::SurveyPerson> survey_persons;
    std::vector<ingest::SurveyTrip> survey_trips;
    std::vector<PlantedTruth> truth;
};

GeneratedCity generate(const CityConfig& cfg);

// Writes zones.csv, checkins.csv, profiles.csv, survey_persons.csv,
// survey_trips.csv and truth.csv (`user_id,role,lat,lon`) into dir.
void write_city(const GeneratedCity& city, const std::filesystem::path& dir);

}  // namespace mobiscape::synthcity

#endif
