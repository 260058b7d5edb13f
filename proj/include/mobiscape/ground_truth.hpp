#ifndef MOBISCAPE_GROUND_TRUTH_HPP
#define MOBISCAPE_GROUND_TRUTH_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"
#include "mobiscape/ingest.hpp"

namespace mobiscape::ground_truth {

MOBISCAPE_DEFINE_ERROR(BadKeywordConfig);

enum class PlaceRole { Home, Work };

const char* to_string(PlaceRole role);

struct KeywordConfig {
    std::vector<std::string> home_keywords;
    std::vector<std::string> work_keywords;
};

// Both sets non-empty, no keyword in both; throws BadKeywordConfig.
void validate(const KeywordConfig& cfg);

// The stock bag of words: home terms like 睡觉 (sleep) and 晚安 (good night),
// work terms like 办公室 (office) and 加班 (overtime).
KeywordConfig default_keywords();

// `role,keyword` CSV, role in {home, work}
KeywordConfig load_keywords(const std::filesystem::path& path);

struct LabeledPlace {
    std::string user_id;
    PlaceRole role = PlaceRole::Home;
    geo::GeoPoint location;
    std::string venue_id;
    int checkin_days = 0;  // always >= 4
};

// Venues of one user with >= 4 distinct check-in days and a role-consistent
// POI category (Residential for home; Corporation/School/IndustrialPark for
// work), sorted by days descending then venue_id ascending.
std::vector<std::pair<std::string, int>> poi_candidates(
    std::span<const ingest::CheckIn> user_records, PlaceRole role);

// True iff any text contains any keyword as a byte substring.
bool keyword_match(std::span<const std::string> texts,
                   std::span<const std::string> keywords);

// Per user per role: the top candidate venue is kept only when the texts
// posted from that same venue confirm it. At most one home and one work per
// user; output sorted by (user_id, role).
std::vector<LabeledPlace> build_ground_truth(std::span<const ingest::CheckIn> records,
                                             const KeywordConfig& cfg);

// `user_id,role,venue_id,lat,lon,checkin_days`
void save_ground_truth(std::span<const LabeledPlace> places, std::ostream& out);
std::vector<LabeledPlace> load_ground_truth(const std::filesystem::path& path);

}  // namespace mobiscape::ground_truth

#endif
