#include "mobiscape/ground_truth.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "mobiscape/csv.hpp"

namespace mobiscape::ground_truth {

using ingest::CheckIn;
using ingest::PoiCategory;

const char* to_string(PlaceRole role) {
    return role == PlaceRole::Home ? "home" : "work";
}

void validate(const KeywordConfig& cfg) {
    if (cfg.home_keywords.empty() || cfg.work_keywords.empty())
        throw BadKeywordConfig("keyword sets must both be non-empty");
    std::set<std::string> home(cfg.home_keywords.begin(), cfg.home_keywords.end());
    for (const std::string& w : cfg.work_keywords)
        if (home.count(w))
            throw BadKeywordConfig("keyword appears in both sets: " + w);
}

KeywordConfig default_keywords() {
    KeywordConfig cfg;
    cfg.home_keywords = {"家",  "床",  "起床", "早起", "睡觉",
                         "早安", "晚安", "宿舍", "寝室", "出门"};
    cfg.work_keywords = {"上班", "下班", "上学", "放学", "单位", "公司",
                         "办公室", "工位", "教室", "加班", "值班"};
    return cfg;
}

KeywordConfig load_keywords(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open keyword file: " + path.string());
    csv::Reader reader(in);
    csv::expect_header(reader, "role,keyword");
    KeywordConfig cfg;
    while (auto row = reader.next()) {
        if (row->size() != 2 || (*row)[1].empty())
            throw Error(path.string() + ": bad keyword row");
        if ((*row)[0] == "home") cfg.home_keywords.push_back((*row)[1]);
        else if ((*row)[0] == "work") cfg.work_keywords.push_back((*row)[1]);
        else throw Error(path.string() + ": unknown role '" + (*row)[0] + "'");
    }
    validate(cfg);
    return cfg;
}

namespace {

bool role_category(PoiCategory poi, PlaceRole role) {
    if (role == PlaceRole::Home) return poi == PoiCategory::Residential;
    return poi == PoiCategory::Corporation || poi == PoiCategory::School ||
           poi == PoiCategory::IndustrialPark;
}

}  // namespace

std::vector<std::pair<std::string, int>> poi_candidates(
    std::span<const CheckIn> user_records, PlaceRole role) {
    // distinct calendar days per role-consistent venue
    std::map<std::string, std::set<std::int32_t>> days;
    for (const CheckIn& r : user_records)
        if (role_category(r.poi, role)) days[r.venue_id].insert(r.when.day_number);

    std::vector<std::pair<std::string, int>> out;
    for (const auto& [venue, d] : days)
        if (d.size() >= 4) out.emplace_back(venue, static_cast<int>(d.size()));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

bool keyword_match(std::span<const std::string> texts,
                   std::span<const std::string> keywords) {
    for (const std::string& text : texts)
        for (const std::string& kw : keywords)
            if (!kw.empty() && text.find(kw) != std::string::npos) return true;
    return false;
}

std::vector<LabeledPlace> build_ground_truth(std::span<const CheckIn> records,
                                             const KeywordConfig& cfg) {
    validate(cfg);

    std::map<std::string, std::vector<const CheckIn*>> by_user;
    for (const CheckIn& r : records) by_user[r.user_id].push_back(&r);

    std::vector<LabeledPlace> out;
    for (const auto& [user_id, recs] : by_user) {
        std::vector<CheckIn> user_records;
        user_records.reserve(recs.size());
        for (const CheckIn* r : recs) user_records.push_back(*r);

        for (PlaceRole role : {PlaceRole::Home, PlaceRole::Work}) {
            auto candidates = poi_candidates(user_records, role);
            if (candidates.empty()) continue;
            const auto& [venue, days] = candidates.front();

            std::vector<std::string> texts;
            const CheckIn* first_at_venue = nullptr;
            for (const CheckIn* r : recs) {
                if (r->venue_id != venue) continue;
                if (!first_at_venue) first_at_venue = r;
                if (r->text) texts.push_back(*r->text);
            }
            const auto& keywords = role == PlaceRole::Home ? cfg.home_keywords
                                                           : cfg.work_keywords;
            if (!keyword_match(texts, keywords)) continue;

            LabeledPlace place;
            place.user_id = user_id;
            place.role = role;
            place.venue_id = venue;
            place.location = first_at_venue->location;
            place.checkin_days = days;
            out.push_back(std::move(place));
        }
    }
    return out;
}

void save_ground_truth(std::span<const LabeledPlace> places, std::ostream& out) {
    out << "user_id,role,venue_id,lat,lon,checkin_days\n";
    char buf[32];
    for (const LabeledPlace& p : places) {
        std::vector<std::string> row;
        row.push_back(p.user_id);
        row.push_back(to_string(p.role));
        row.push_back(p.venue_id);
        std::snprintf(buf, sizeof buf, "%.9f", p.location.lat);
        row.push_back(buf);
        std::snprintf(buf, sizeof buf, "%.9f", p.location.lon);
        row.push_back(buf);
        row.push_back(std::to_string(p.checkin_days));
        csv::write_row(out, row);
    }
}

std::vector<LabeledPlace> load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv::FileUnreadable("cannot open ground truth: " + path.string());
    csv::Reader reader(in);
    csv::expect_header(reader, "user_id,role,venue_id,lat,lon,checkin_days");
    std::vector<LabeledPlace> out;
    while (auto row = reader.next()) {
        if (row->size() != 6) throw Error(path.string() + ": bad ground-truth row");
        LabeledPlace p;
        p.user_id = (*row)[0];
        if ((*row)[1] == "home") p.role = PlaceRole::Home;
        else if ((*row)[1] == "work") p.role = PlaceRole::Work;
        else throw Error(path.string() + ": unknown role '" + (*row)[1] + "'");
        p.venue_id = (*row)[2];
        try {
            p.location.lat = std::stod((*row)[3]);
            p.location.lon = std::stod((*row)[4]);
            p.checkin_days = std::stoi((*row)[5]);
        } catch (const std::exception&) {
            throw Error(path.string() + ": non-numeric ground-truth row");
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace mobiscape::ground_truth
