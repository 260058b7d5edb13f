#include <doctest.h>

#include <set>
#include <sstream>

#include "mobiscape/ground_truth.hpp"
#include "test_util.hpp"

using namespace mobiscape;
using ground_truth::PlaceRole;
using ingest::CheckIn;
using ingest::PoiCategory;

namespace {

CheckIn make(const std::string& user, const std::string& venue, PoiCategory poi,
             int month, int day, int hour, const char* text = nullptr) {
    CheckIn r;
    r.user_id = user;
    r.venue_id = venue;
    r.poi = poi;
    r.when = make_datetime(2013, month, day, hour);
    r.location = {39.9, 116.4};
    if (text) r.text = text;
    return r;
}

}  // namespace

TEST_CASE("poi_candidates day and category filters") {
    std::vector<CheckIn> records;
    // residential venue on 4 distinct days
    for (int d = 1; d <= 4; ++d) records.push_back(make("u", "vr", PoiCategory::Residential, 3, d, 23));
    // burst of 10 check-ins on one day
    for (int i = 0; i < 10; ++i) records.push_back(make("u", "vburst", PoiCategory::Residential, 3, 9, 10 + i % 5));
    // corporation venue on 5 days
    for (int d = 1; d <= 5; ++d) records.push_back(make("u", "vw", PoiCategory::Corporation, 3, d, 10));

    auto home = ground_truth::poi_candidates(records, PlaceRole::Home);
    REQUIRE(home.size() == 1);
    CHECK(home[0].first == "vr");
    CHECK(home[0].second == 4);

    auto work = ground_truth::poi_candidates(records, PlaceRole::Work);
    REQUIRE(work.size() == 1);
    CHECK(work[0].first == "vw");

    SUBCASE("sorted by days descending, venue ascending") {
        for (int d = 10; d <= 15; ++d)
            records.push_back(make("u", "vr2", PoiCategory::Residential, 3, d, 23));
        for (int d = 10; d <= 13; ++d)
            records.push_back(make("u", "va", PoiCategory::Residential, 3, d, 23));
        auto sorted = ground_truth::poi_candidates(records, PlaceRole::Home);
        REQUIRE(sorted.size() == 3);
        CHECK(sorted[0].first == "vr2");  // 6 days
        CHECK(sorted[1].first == "va");   // 4 days, ties with vr, earlier id
        CHECK(sorted[2].first == "vr");
    }
}

TEST_CASE("keyword_match is literal substring") {
    std::vector<std::string> texts{"晚安北京"};
    std::vector<std::string> night{"晚安"};
    CHECK(ground_truth::keyword_match(texts, night));
    CHECK_FALSE(ground_truth::keyword_match({}, night));
    std::vector<std::string> hello{"hello"};
    std::vector<std::string> office{"办公室"};
    CHECK_FALSE(ground_truth::keyword_match(hello, office));
}

TEST_CASE("keyword config validation") {
    ground_truth::KeywordConfig cfg = ground_truth::default_keywords();
    CHECK_NOTHROW(ground_truth::validate(cfg));
    cfg.work_keywords.push_back(cfg.home_keywords.front());
    CHECK_THROWS_AS(ground_truth::validate(cfg), ground_truth::BadKeywordConfig);
    ground_truth::KeywordConfig empty;
    CHECK_THROWS_AS(ground_truth::validate(empty), ground_truth::BadKeywordConfig);
}

TEST_CASE("build_ground_truth intersects the two steps") {
    auto cfg = ground_truth::default_keywords();

    SUBCASE("confirmed home label") {
        std::vector<CheckIn> records;
        for (int d = 1; d <= 5; ++d) records.push_back(make("u", "vr", PoiCategory::Residential, 3, d, 23));
        records.push_back(make("u", "vr", PoiCategory::Residential, 3, 6, 23, "准备睡觉了"));
        auto places = ground_truth::build_ground_truth(records, cfg);
        REQUIRE(places.size() == 1);
        CHECK(places[0].role == PlaceRole::Home);
        CHECK(places[0].venue_id == "vr");
        CHECK(places[0].checkin_days >= 4);
    }
    SUBCASE("keyword-free texts kill the nomination") {
        std::vector<CheckIn> records;
        for (int d = 1; d <= 5; ++d)
            records.push_back(make("u", "vr", PoiCategory::Residential, 3, d, 23, "无关内容"));
        CHECK(ground_truth::build_ground_truth(records, cfg).empty());
    }
    SUBCASE("confirmation at a different venue does not rescue the top one") {
        std::vector<CheckIn> records;
        for (int d = 1; d <= 6; ++d) records.push_back(make("u", "vtop", PoiCategory::Residential, 3, d, 23));
        for (int d = 1; d <= 4; ++d)
            records.push_back(make("u", "vother", PoiCategory::Residential, 3, d, 22, "睡觉"));
        CHECK(ground_truth::build_ground_truth(records, cfg).empty());
    }
    SUBCASE("home without work is expected") {
        std::vector<CheckIn> records;
        for (int d = 1; d <= 4; ++d)
            records.push_back(make("u", "vr", PoiCategory::Residential, 3, d, 23, "回家"));
        auto places = ground_truth::build_ground_truth(records, cfg);
        REQUIRE(places.size() == 1);
        CHECK(places[0].role == PlaceRole::Home);
    }
}

TEST_CASE("ground truth invariants on a randomized corpus") {
    auto cfg = ground_truth::default_keywords();
    std::mt19937_64 gen(11);
    std::vector<CheckIn> records;
    const PoiCategory cats[] = {PoiCategory::Residential, PoiCategory::Corporation,
                                PoiCategory::Entertainment, PoiCategory::Unknown};
    for (int i = 0; i < 2000; ++i) {
        auto r = make("u" + std::to_string(gen() % 25), "v" + std::to_string(gen() % 60),
                      cats[gen() % 4], 3 + int(gen() % 2), 1 + int(gen() % 28),
                      int(gen() % 24));
        if (gen() % 4 == 0) r.text = (gen() % 2) ? "睡觉" : "上班中";
        records.push_back(std::move(r));
    }
    auto places = ground_truth::build_ground_truth(records, cfg);

    std::set<std::pair<std::string, int>> seen;  // at most one label per (user, role)
    for (const auto& p : places) {
        CHECK(p.checkin_days >= 4);
        CHECK(seen.insert({p.user_id, static_cast<int>(p.role)}).second);
        // role-consistent category on the raw records
        std::set<std::int32_t> days;
        for (const auto& r : records) {
            if (r.user_id != p.user_id || r.venue_id != p.venue_id) continue;
            days.insert(r.when.day_number);
            if (p.role == PlaceRole::Home) CHECK(r.poi == PoiCategory::Residential);
            else
                CHECK((r.poi == PoiCategory::Corporation || r.poi == PoiCategory::School ||
                       r.poi == PoiCategory::IndustrialPark));
        }
        CHECK(static_cast<int>(days.size()) == p.checkin_days);
    }

    // deterministic given identical inputs
    auto again = ground_truth::build_ground_truth(records, cfg);
    REQUIRE(again.size() == places.size());
    for (std::size_t i = 0; i < places.size(); ++i) {
        CHECK(again[i].user_id == places[i].user_id);
        CHECK(again[i].venue_id == places[i].venue_id);
    }
}

TEST_CASE("keyword and ground-truth files round trip") {
    testutil::TempDir dir("gt");
    testutil::write_file(dir.file("kw.csv"),
                         "role,keyword\nhome,睡觉\nhome,晚安\nwork,上班\n");
    auto cfg = ground_truth::load_keywords(dir.file("kw.csv"));
    CHECK(cfg.home_keywords.size() == 2);
    CHECK(cfg.work_keywords.size() == 1);

    std::vector<ground_truth::LabeledPlace> places(2);
    places[0] = {"u1", PlaceRole::Home, {39.9, 116.4}, "v1", 5};
    places[1] = {"u1", PlaceRole::Work, {39.95, 116.41}, "v2", 8};
    std::ostringstream out;
    ground_truth::save_ground_truth(places, out);
    testutil::write_file(dir.file("gt.csv"), out.str());
    auto loaded = ground_truth::load_ground_truth(dir.file("gt.csv"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[1].role == PlaceRole::Work);
    CHECK(loaded[1].checkin_days == 8);
    CHECK(loaded[0].location.lat == doctest::Approx(39.9));
}
