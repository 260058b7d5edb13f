#ifndef MOBISCAPE_INGEST_HPP
#define MOBISCAPE_INGEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobiscape/datetime.hpp"
#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"

namespace mobiscape::ingest {

MOBISCAPE_DEFINE_ERROR(OrphanTrip);

enum class PoiCategory {
    Residential,
    Corporation,
    School,
    IndustrialPark,
    Entertainment,
    Other,
    Unknown,
};

const char* to_string(PoiCategory c);

// Maps raw POI labels to categories; labels outside the mapping collapse to
// Unknown. The default mapping covers the canonical names.
using PoiMapping = std::map<std::string, PoiCategory>;
PoiMapping default_poi_mapping();
PoiMapping load_poi_mapping(const std::filesystem::path& path);

struct CheckIn {
    std::string user_id;
    DateTime when;
    std::string venue_id;
    geo::GeoPoint location;
    PoiCategory poi = PoiCategory::Unknown;
    std::optional<std::string> text;

    bool operator==(const CheckIn&) const = default;
};

enum class Education { Primary, Secondary, Tertiary };

struct UserProfile {
    std::string user_id;
    std::optional<char> gender;  // 'M' or 'F'
    std::optional<int> age;
    std::optional<Education> education;
};

struct SurveyPerson {
    std::string person_id;
    char gender = 'M';
    int age = 0;
    std::string home_zone;
    std::string district;
    bool is_commuter = false;
};

enum class TripPurpose { Home, Work, Entertainment, Other };

const char* to_string(TripPurpose p);

struct SurveyTrip {
    std::string person_id;
    TripPurpose purpose = TripPurpose::Other;
    std::string dest_zone;
    DateTime depart;
    DateTime arrive;
};

struct CheckinLoad {
    std::vector<CheckIn> records;
    std::size_t rejected = 0;  // malformed rows skipped, not fatal
};

// `user_id,timestamp,venue_id,lat,lon,poi_category,text`. Well-formed rows
// come back in file order; malformed ones are counted in `rejected`.
CheckinLoad load_checkins(const std::filesystem::path& path,
                          const PoiMapping& poi_map = default_poi_mapping());
void save_checkins(std::span<const CheckIn> records, std::ostream& out);

// `user_id,gender,age,education`
std::vector<UserProfile> load_profiles(const std::filesystem::path& path);
void save_profiles(std::span<const UserProfile> profiles, std::ostream& out);

struct Survey {
    std::vector<SurveyPerson> persons;
    std::vector<SurveyTrip> trips;
};

// Persons: `person_id,gender,age,home_zone,district,is_commuter`
// Trips:   `person_id,purpose,dest_zone,depart,arrive`
// Every trip must reference a loaded person (OrphanTrip otherwise).
Survey load_survey(const std::filesystem::path& persons_path,
                   const std::filesystem::path& trips_path);
void save_survey_persons(std::span<const SurveyPerson> persons, std::ostream& out);
void save_survey_trips(std::span<const SurveyTrip> trips, std::ostream& out);

// Keeps exactly the records of users with at least `min_checkins` records,
// preserving relative order.
std::vector<CheckIn> filter_active_users(std::span<const CheckIn> records,
                                         std::size_t min_checkins = 15);

}  // namespace mobiscape::ingest

#endif
