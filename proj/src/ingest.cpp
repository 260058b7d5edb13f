#include "mobiscape/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "mobiscape/csv.hpp"

namespace mobiscape::ingest {

const char* to_string(PoiCategory c) {
    switch (c) {
        case PoiCategory::Residential: return "residential";
        case PoiCategory::Corporation: return "corporation";
        case PoiCategory::School: return "school";
        case PoiCategory::IndustrialPark: return "industrial_park";
        case PoiCategory::Entertainment: return "entertainment";
        case PoiCategory::Other: return "other";
        case PoiCategory::Unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(TripPurpose p) {
    switch (p) {
        case TripPurpose::Home: return "home";
        case TripPurpose::Work: return "work";
        case TripPurpose::Entertainment: return "entertainment";
        case TripPurpose::Other: return "other";
    }
    return "other";
}

PoiMapping default_poi_mapping() {
    return PoiMapping{
        {"residential", PoiCategory::Residential},
        {"corporation", PoiCategory::Corporation},
        {"school", PoiCategory::School},
        {"industrial_park", PoiCategory::IndustrialPark},
        {"entertainment", PoiCategory::Entertainment},
        {"other", PoiCategory::Other},
        {"unknown", PoiCategory::Unknown},
    };
}

namespace {

std::string lower(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_int(const std::string& s, int& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::optional<char> parse_gender(const std::string& s) {
    if (s == "M" || s == "m") return 'M';
    if (s == "F" || s == "f") return 'F';
    return std::nullopt;
}

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

}  // namespace

PoiMapping load_poi_mapping(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open POI mapping: " + path.string());
    csv::Reader reader(in);
    csv::expect_header(reader, "label,category");
    PoiMapping defaults = default_poi_mapping();
    PoiMapping map;
    while (auto row = reader.next()) {
        if (row->size() != 2) throw Error(path.string() + ": bad POI mapping row");
        auto it = defaults.find(lower((*row)[1]));
        if (it == defaults.end())
            throw Error(path.string() + ": unknown category '" + (*row)[1] + "'");
        map[lower((*row)[0])] = it->second;
    }
    if (map.empty()) throw Error(path.string() + ": empty POI mapping");
    return map;
}

CheckinLoad load_checkins(const std::filesystem::path& path, const PoiMapping& poi_map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open check-in file: " + path.string());
    csv::Reader reader(in);
    csv::expect_header(reader, "user_id,timestamp,venue_id,lat,lon,poi_category,text");

    CheckinLoad out;
    while (auto row = reader.next()) {
        // the text column may be missing entirely
        if (row->size() != 7 && row->size() != 6) {
            ++out.rejected;
            continue;
        }
        CheckIn r;
        r.user_id = (*row)[0];
        auto when = parse_datetime((*row)[1]);
        r.venue_id = (*row)[2];
        double lat, lon;
        if (r.user_id.empty() || r.venue_id.empty() || !when ||
            !parse_double((*row)[3], lat) || !parse_double((*row)[4], lon)) {
            ++out.rejected;
            continue;
        }
        r.when = *when;
        r.location = geo::GeoPoint{lat, lon};
        if (!geo::valid(r.location)) {
            ++out.rejected;
            continue;
        }
        auto poi = poi_map.find(lower((*row)[5]));
        r.poi = poi == poi_map.end() ? PoiCategory::Unknown : poi->second;
        if (row->size() == 7 && !(*row)[6].empty()) r.text = (*row)[6];
        out.records.push_back(std::move(r));
    }
    return out;
}

void save_checkins(std::span<const CheckIn> records, std::ostream& out) {
    out << "user_id,timestamp,venue_id,lat,lon,poi_category,text\n";
    for (const CheckIn& r : records) {
        std::vector<std::string> row{r.user_id,
                                     format_datetime(r.when),
                                     r.venue_id,
                                     fmt_coord(r.location.lat),
                                     fmt_coord(r.location.lon),
                                     to_string(r.poi),
                                     r.text.value_or("")};
        csv::write_row(out, row);
    }
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open profile file: " + path.string());
    csv::Reader reader(in);
    csv::expect_header(reader, "user_id,gender,age,education");

    std::vector<UserProfile> profiles;
    while (auto row = reader.next()) {
        if (row->size() != 4 || (*row)[0].empty())
            throw Error(path.string() + ": bad profile row");
        UserProfile p;
        p.user_id = (*row)[0];
        p.gender = parse_gender((*row)[1]);
        int age;
        if (parse_int((*row)[2], age) && age >= 0) p.age = age;
        const std::string edu = lower((*row)[3]);
        if (edu == "primary") p.education = Education::Primary;
        else if (edu == "secondary") p.education = Education::Secondary;
        else if (edu == "tertiary") p.education = Education::Tertiary;
        profiles.push_back(std::move(p));
    }
    return profiles;
}

void save_profiles(std::span<const UserProfile> profiles, std::ostream& out) {
    out << "user_id,gender,age,education\n";
    for (const UserProfile& p : profiles) {
        std::string edu;
        if (p.education == Education::Primary) edu = "primary";
        else if (p.education == Education::Secondary) edu = "secondary";
        else if (p.education == Education::Tertiary) edu = "tertiary";
        std::vector<std::string> row{p.user_id,
                                     p.gender ? std::string(1, *p.gender) : "",
                                     p.age ? std::to_string(*p.age) : "",
                                     edu};
        csv::write_row(out, row);
    }
}

Survey load_survey(const std::filesystem::path& persons_path,
                   const std::filesystem::path& trips_path) {
    Survey survey;
    {
        std::ifstream in(persons_path, std::ios::binary);
        if (!in)
            throw csv::FileUnreadable("cannot open survey persons: " +
                                      persons_path.string());
        csv::Reader reader(in);
        csv::expect_header(reader, "person_id,gender,age,home_zone,district,is_commuter");
        std::unordered_set<std::string> seen;
        while (auto row = reader.next()) {
            if (row->size() != 6) throw Error(persons_path.string() + ": bad person row");
            SurveyPerson p;
            p.person_id = (*row)[0];
            auto g = parse_gender((*row)[1]);
            if (p.person_id.empty() || !g || !parse_int((*row)[2], p.age) || p.age < 0)
                throw Error(persons_path.string() + ": bad person row for '" +
                            (*row)[0] + "'");
            if (!seen.insert(p.person_id).second)
                throw Error(persons_path.string() + ": duplicate person_id " +
                            p.person_id);
            p.gender = *g;
            p.home_zone = (*row)[3];
            p.district = (*row)[4];
            p.is_commuter = (*row)[5] == "1" || lower((*row)[5]) == "true";
            survey.persons.push_back(std::move(p));
        }
    }
    {
        std::ifstream in(trips_path, std::ios::binary);
        if (!in)
            throw csv::FileUnreadable("cannot open survey trips: " + trips_path.string());
        csv::Reader reader(in);
        csv::expect_header(reader, "person_id,purpose,dest_zone,depart,arrive");
        std::unordered_set<std::string> person_ids;
        for (const SurveyPerson& p : survey.persons) person_ids.insert(p.person_id);
        while (auto row = reader.next()) {
            if (row->size() != 5) throw Error(trips_path.string() + ": bad trip row");
            SurveyTrip t;
            t.person_id = (*row)[0];
            if (!person_ids.count(t.person_id))
                throw OrphanTrip("trip references unknown person_id: " + t.person_id);
            const std::string purpose = lower((*row)[1]);
            if (purpose == "home") t.purpose = TripPurpose::Home;
            else if (purpose == "work") t.purpose = TripPurpose::Work;
            else if (purpose == "entertainment") t.purpose = TripPurpose::Entertainment;
            else if (purpose == "other") t.purpose = TripPurpose::Other;
            else throw Error(trips_path.string() + ": unknown trip purpose '" +
                             (*row)[1] + "'");
            t.dest_zone = (*row)[2];
            auto depart = parse_datetime((*row)[3]);
            auto arrive = parse_datetime((*row)[4]);
            if (!depart || !arrive || *arrive < *depart)
                throw Error(trips_path.string() + ": bad trip times for person " +
                            t.person_id);
            t.depart = *depart;
            t.arrive = *arrive;
            survey.trips.push_back(std::move(t));
        }
    }
    return survey;
}

void save_survey_persons(std::span<const SurveyPerson> persons, std::ostream& out) {
    out << "person_id,gender,age,home_zone,district,is_commuter\n";
    for (const SurveyPerson& p : persons) {
        std::vector<std::string> row{p.person_id,      std::string(1, p.gender),
                                     std::to_string(p.age), p.home_zone,
                                     p.district,       p.is_commuter ? "1" : "0"};
        csv::write_row(out, row);
    }
}

void save_survey_trips(std::span<const SurveyTrip> trips, std::ostream& out) {
    out << "person_id,purpose,dest_zone,depart,arrive\n";
    for (const SurveyTrip& t : trips) {
        std::vector<std::string> row{t.person_id, to_string(t.purpose), t.dest_zone,
                                     format_datetime(t.depart), format_datetime(t.arrive)};
        csv::write_row(out, row);
    }
}

std::vector<CheckIn> filter_active_users(std::span<const CheckIn> records,
                                         std::size_t min_checkins) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const CheckIn& r : records) ++counts[r.user_id];
    std::vector<CheckIn> kept;
    kept.reserve(records.size());
    for (const CheckIn& r : records)
        if (counts[r.user_id] >= min_checkins) kept.push_back(r);
    return kept;
}

}  // namespace mobiscape::ingest
