#include <doctest.h>

#include <random>
#include <sstream>

#include "mobiscape/csv.hpp"
#include "mobiscape/datetime.hpp"
#include "mobiscape/ingest.hpp"
#include "test_util.hpp"

using namespace mobiscape;
using ingest::CheckIn;

TEST_CASE("datetime parsing") {
    auto t = parse_datetime("2013-05-13T09:30:00");
    REQUIRE(t.has_value());
    CHECK(t->hour() == 9);
    CHECK(t->iso_weekday() == 1);  // a Monday
    CHECK(format_datetime(*t) == "2013-05-13T09:30:00");

    CHECK(parse_datetime("2013-05-13 09:30:00").has_value());
    CHECK_FALSE(parse_datetime("2013-13-01T00:00:00").has_value());
    CHECK_FALSE(parse_datetime("2013-02-30T00:00:00").has_value());
    CHECK_FALSE(parse_datetime("2013-05-13T24:00:00").has_value());
    CHECK_FALSE(parse_datetime("garbage").has_value());

    CHECK(make_datetime(2013, 5, 18).iso_weekday() == 6);  // Saturday
    CHECK(make_datetime(2013, 5, 19).is_weekday() == false);
}

TEST_CASE("csv reader handles quoting") {
    std::istringstream in("a,\"b,with comma\",\"quote \"\"q\"\"\",\"multi\nline\"\nx,y,z,w\n");
    csv::Reader reader(in);
    auto r1 = reader.next();
    REQUIRE(r1.has_value());
    REQUIRE(r1->size() == 4);
    CHECK((*r1)[1] == "b,with comma");
    CHECK((*r1)[2] == "quote \"q\"");
    CHECK((*r1)[3] == "multi\nline");
    auto r2 = reader.next();
    REQUIRE(r2.has_value());
    CHECK((*r2)[0] == "x");
    CHECK_FALSE(reader.next().has_value());
}

namespace {

const char* kHeader = "user_id,timestamp,venue_id,lat,lon,poi_category,text\n";

}

TEST_CASE("load_checkins") {
    testutil::TempDir dir("checkins");

    SUBCASE("empty file with valid header") {
        testutil::write_file(dir.file("c.csv"), kHeader);
        auto load = ingest::load_checkins(dir.file("c.csv"));
        CHECK(load.records.empty());
        CHECK(load.rejected == 0);
    }
    SUBCASE("malformed rows are counted, not fatal") {
        testutil::write_file(dir.file("c.csv"),
                             std::string(kHeader) +
                                 "u1,2013-05-13T10:00:00,v1,39.9,116.4,residential,hi\n"
                                 "u1,2013-05-13T11:00:00,v1,91.0,116.4,residential,bad lat\n"
                                 "u1,2013-05-14T10:00:00,v2,39.9,116.4,entertainment,\n"
                                 "u2,2013-05-14T12:00:00,v3,39.8,116.3,unknown,x\n");
        auto load = ingest::load_checkins(dir.file("c.csv"));
        CHECK(load.records.size() == 3);
        CHECK(load.rejected == 1);
        CHECK(load.records[0].text == "hi");
        CHECK_FALSE(load.records[1].text.has_value());  // empty text column
    }
    SUBCASE("missing text column entirely") {
        testutil::write_file(dir.file("c.csv"),
                             std::string(kHeader) +
                                 "u1,2013-05-13T10:00:00,v1,39.9,116.4,residential\n");
        auto load = ingest::load_checkins(dir.file("c.csv"));
        REQUIRE(load.records.size() == 1);
        CHECK_FALSE(load.records[0].text.has_value());
    }
    SUBCASE("unmapped POI label collapses to Unknown") {
        testutil::write_file(dir.file("c.csv"),
                             std::string(kHeader) +
                                 "u1,2013-05-13T10:00:00,v1,39.9,116.4,noodle_shop,\n");
        auto load = ingest::load_checkins(dir.file("c.csv"));
        REQUIRE(load.records.size() == 1);
        CHECK(load.records[0].poi == ingest::PoiCategory::Unknown);
    }
    SUBCASE("a custom mapping file reroutes labels") {
        testutil::write_file(dir.file("map.csv"),
                             "label,category\nnoodle_shop,entertainment\napartment,residential\n");
        testutil::write_file(dir.file("c.csv"),
                             std::string(kHeader) +
                                 "u1,2013-05-13T10:00:00,v1,39.9,116.4,noodle_shop,\n"
                                 "u1,2013-05-14T10:00:00,v2,39.9,116.4,Apartment,\n");
        auto mapping = ingest::load_poi_mapping(dir.file("map.csv"));
        auto load = ingest::load_checkins(dir.file("c.csv"), mapping);
        REQUIRE(load.records.size() == 2);
        CHECK(load.records[0].poi == ingest::PoiCategory::Entertainment);
        CHECK(load.records[1].poi == ingest::PoiCategory::Residential);
    }
    SUBCASE("header mismatch") {
        testutil::write_file(dir.file("c.csv"), "user,when\n");
        CHECK_THROWS_AS(ingest::load_checkins(dir.file("c.csv")), csv::HeaderMismatch);
    }
    SUBCASE("unreadable file") {
        CHECK_THROWS_AS(ingest::load_checkins(dir.file("absent.csv")),
                        csv::FileUnreadable);
    }
}

namespace {

std::vector<CheckIn> user_with_n_records(const std::string& user, int n) {
    std::vector<CheckIn> records;
    for (int i = 0; i < n; ++i) {
        CheckIn r;
        r.user_id = user;
        r.when = make_datetime(2013, 5, 1 + (i % 28), 10);
        r.venue_id = "v" + std::to_string(i % 3);
        r.location = {39.9, 116.4};
        records.push_back(r);
    }
    return records;
}

}  // namespace

TEST_CASE("filter_active_users threshold and idempotence") {
    auto a = user_with_n_records("a", 14);
    auto b = user_with_n_records("b", 15);
    std::vector<CheckIn> all;
    for (int i = 0; i < 15; ++i) {
        if (i < 14) all.push_back(a[i]);
        all.push_back(b[i]);
    }
    auto kept = ingest::filter_active_users(all);
    CHECK(kept.size() == 15);
    for (const auto& r : kept) CHECK(r.user_id == "b");

    // idempotent
    auto twice = ingest::filter_active_users(kept);
    CHECK(twice.size() == kept.size());

    CHECK(ingest::filter_active_users({}).empty());
}

TEST_CASE("filter_active_users postcondition on random input") {
    std::mt19937_64 gen(3);
    std::vector<CheckIn> records;
    for (int i = 0; i < 400; ++i) {
        CheckIn r;
        r.user_id = "u" + std::to_string(gen() % 40);
        r.when = make_datetime(2013, 3, 1 + int(gen() % 28), int(gen() % 24));
        r.venue_id = "v" + std::to_string(gen() % 5);
        r.location = {39.9, 116.4};
        records.push_back(r);
    }
    auto kept = ingest::filter_active_users(records, 12);
    std::map<std::string, int> counts;
    for (const auto& r : kept) ++counts[r.user_id];
    for (const auto& [user, n] : counts) CHECK(n >= 12);
    // relative order preserved: kept is a subsequence of records
    std::size_t cursor = 0;
    for (const auto& r : records)
        if (cursor < kept.size() && kept[cursor] == r) ++cursor;
    CHECK(cursor == kept.size());
}

TEST_CASE("check-in serialization fixpoint") {
    auto records = user_with_n_records("u", 6);
    records[2].text = "带逗号,和引号\"的文本";
    records[3].poi = ingest::PoiCategory::Entertainment;
    std::ostringstream first;
    ingest::save_checkins(records, first);

    testutil::TempDir dir("roundtrip");
    testutil::write_file(dir.file("c.csv"), first.str());
    auto load = ingest::load_checkins(dir.file("c.csv"));
    CHECK(load.rejected == 0);
    std::ostringstream second;
    ingest::save_checkins(load.records, second);
    CHECK(second.str() == first.str());
}

TEST_CASE("load_survey referential integrity") {
    testutil::TempDir dir("survey");
    const std::string persons =
        "person_id,gender,age,home_zone,district,is_commuter\n"
        "p1,F,25,Z1,D1,1\n"
        "p2,M,40,Z2,D2,0\n";
    SUBCASE("clean load") {
        testutil::write_file(dir.file("p.csv"), persons);
        testutil::write_file(dir.file("t.csv"),
                             "person_id,purpose,dest_zone,depart,arrive\n"
                             "p1,work,Z2,2013-05-13T08:00:00,2013-05-13T08:40:00\n"
                             "p1,home,Z1,2013-05-13T18:00:00,2013-05-13T18:40:00\n"
                             "p2,entertainment,Z1,2013-05-13T19:00:00,2013-05-13T19:20:00\n");
        auto survey = ingest::load_survey(dir.file("p.csv"), dir.file("t.csv"));
        CHECK(survey.persons.size() == 2);
        CHECK(survey.trips.size() == 3);
        CHECK(survey.persons[0].is_commuter);
        CHECK(survey.trips[0].purpose == ingest::TripPurpose::Work);
    }
    SUBCASE("orphan trip names the person") {
        testutil::write_file(dir.file("p.csv"), persons);
        testutil::write_file(dir.file("t.csv"),
                             "person_id,purpose,dest_zone,depart,arrive\n"
                             "ghost,work,Z2,2013-05-13T08:00:00,2013-05-13T08:40:00\n");
        try {
            ingest::load_survey(dir.file("p.csv"), dir.file("t.csv"));
            FAIL("expected OrphanTrip");
        } catch (const ingest::OrphanTrip& e) {
            CHECK(std::string(e.what()).find("ghost") != std::string::npos);
        }
    }
    SUBCASE("empty trips file") {
        testutil::write_file(dir.file("p.csv"), persons);
        testutil::write_file(dir.file("t.csv"), "person_id,purpose,dest_zone,depart,arrive\n");
        auto survey = ingest::load_survey(dir.file("p.csv"), dir.file("t.csv"));
        CHECK(survey.persons.size() == 2);
        CHECK(survey.trips.empty());
    }
}
