// mobiscape: end-to-end driver for check-in place identification, parameter
// calibration, sample reconstruction and survey validation.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobiscape/calibration.hpp"
#include "mobiscape/csv.hpp"
#include "mobiscape/geo.hpp"
#include "mobiscape/ground_truth.hpp"
#include "mobiscape/ingest.hpp"
#include "mobiscape/location_id.hpp"
#include "mobiscape/metrics.hpp"
#include "mobiscape/popsynth.hpp"
#include "mobiscape/synthcity.hpp"

namespace ms = mobiscape;
using ms::geo::GeoPoint;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Applies `key=value` lines from --config FILE as defaults: a key becomes
// "--key value" unless that flag already appears on the command line, so
// explicit flags always win.
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw ms::Error("cannot open config file: " + config_path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ms::Error("bad config line (want key=value): " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const std::string flag = "--" + key;
        bool already = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) already = true;
        if (!already) {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ms::Error(std::string("bad ") + what + " list: " + s);
        }
    }
    if (out.empty()) throw ms::Error(std::string("empty ") + what + " list");
    return out;
}

// --- stage file formats beyond the ingest module ---------------------------

struct PlaceRow {
    std::string user_id;
    std::string role;  // home | work
    GeoPoint location;
    std::string zone_id;
};

void write_places(const std::vector<ms::ident::PersonPlaces>& people,
                  const ms::geo::ZoneRegistry& registry, std::ostream& out) {
    out << "user_id,role,lat,lon,zone_id\n";
    for (const auto& p : people) {
        auto row = [&](const char* role, const GeoPoint& loc) {
            std::vector<std::string> fields{p.user_id, role, fmt(loc.lat, "%.9f"),
                                            fmt(loc.lon, "%.9f"),
                                            ms::geo::assign_zone(loc, registry).zone_id};
            ms::csv::write_row(out, fields);
        };
        if (p.home) row("home", p.home->centroid);
        if (p.work) row("work", p.work->centroid);
    }
}

std::vector<PlaceRow> load_places(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ms::csv::FileUnreadable("cannot open places file: " + path.string());
    ms::csv::Reader reader(in);
    ms::csv::expect_header(reader, "user_id,role,lat,lon,zone_id");
    std::vector<PlaceRow> rows;
    while (auto row = reader.next()) {
        if (row->size() != 5) throw ms::Error(path.string() + ": bad places row");
        PlaceRow r;
        r.user_id = (*row)[0];
        r.role = (*row)[1];
        r.location = GeoPoint{std::stod((*row)[2]), std::stod((*row)[3])};
        r.zone_id = (*row)[4];
        rows.push_back(std::move(r));
    }
    return rows;
}

struct NoncommuteRow {
    std::string user_id;
    std::string venue_id;
    std::string label;  // entertainment | other | unknown
    GeoPoint location;
    int days = 0;
};

void write_noncommute(const std::vector<ms::ident::PersonPlaces>& people,
                      std::ostream& out) {
    out << "user_id,venue_id,label,lat,lon,days\n";
    for (const auto& p : people) {
        auto rows = [&](const char* label, const std::vector<ms::ident::VenueStat>& vs) {
            for (const auto& v : vs) {
                std::vector<std::string> fields{p.user_id,
                                                v.venue_id,
                                                label,
                                                fmt(v.location.lat, "%.9f"),
                                                fmt(v.location.lon, "%.9f"),
                                                std::to_string(v.days)};
                ms::csv::write_row(out, fields);
            }
        };
        rows("entertainment", p.entertainment);
        rows("other", p.other);
        rows("unknown", p.unknown);
    }
}

std::vector<NoncommuteRow> load_noncommute(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ms::csv::FileUnreadable("cannot open non-commute file: " + path.string());
    ms::csv::Reader reader(in);
    ms::csv::expect_header(reader, "user_id,venue_id,label,lat,lon,days");
    std::vector<NoncommuteRow> rows;
    while (auto row = reader.next()) {
        if (row->size() != 6) throw ms::Error(path.string() + ": bad non-commute row");
        NoncommuteRow r;
        r.user_id = (*row)[0];
        r.venue_id = (*row)[1];
        r.label = (*row)[2];
        r.location = GeoPoint{std::stod((*row)[3]), std::stod((*row)[4])};
        r.days = std::stoi((*row)[5]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_params_json(const ms::ident::IdentParams& p,
                       const std::filesystem::path& path) {
    nlohmann::json j{{"r_m", p.r_m}, {"a", p.a}, {"b", p.b}, {"k1", p.k1}, {"k2", p.k2}};
    ms::csv::atomic_write(path, [&](std::ostream& out) { out << j.dump(2) << "\n"; });
}

ms::ident::IdentParams load_params_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ms::csv::FileUnreadable("cannot open params file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return ms::ident::IdentParams{j.at("r_m").get<double>(), j.at("a").get<double>(),
                                      j.at("b").get<double>(), j.at("k1").get<double>(),
                                      j.at("k2").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ms::Error("bad params file " + path.string() + ": " + e.what());
    }
}

// PersonPlaces reconstructed from the identify stage outputs; enough for
// mobility attachment and validation.
std::map<std::string, ms::ident::PersonPlaces> places_from_rows(
    const std::vector<PlaceRow>& rows) {
    std::map<std::string, ms::ident::PersonPlaces> by_user;
    for (const PlaceRow& r : rows) {
        auto& p = by_user[r.user_id];
        p.user_id = r.user_id;
        ms::ident::PlaceCluster cluster;
        cluster.centroid = r.location;
        if (r.role == "home") p.home = std::move(cluster);
        else if (r.role == "work") p.work = std::move(cluster);
        else throw ms::Error("places file: unknown role '" + r.role + "'");
    }
    return by_user;
}

// --- subcommand implementations --------------------------------------------

struct GenArgs {
    std::uint64_t seed = 0;
    std::string out_dir;
    ms::synthcity::CityConfig cfg;
    std::string bias;
    std::string checkin_range;
};

int run_gen(GenArgs& args) {
    args.cfg.rng_seed = args.seed;
    if (!args.bias.empty()) {
        auto w = parse_double_list(args.bias, "bias");
        if (w.size() != args.cfg.bias_spec.size())
            throw ms::Error("--bias needs exactly 8 weights");
        std::copy(w.begin(), w.end(), args.cfg.bias_spec.begin());
    }
    if (!args.checkin_range.empty()) {
        auto r = parse_double_list(args.checkin_range, "checkins-per-user");
        if (r.size() != 2) throw ms::Error("--checkins-per-user needs lo,hi");
        args.cfg.checkins_per_user_range = {static_cast<int>(r[0]),
                                            static_cast<int>(r[1])};
    }
    auto city = ms::synthcity::generate(args.cfg);
    ms::synthcity::write_city(city, args.out_dir);
    std::cout << "gen: " << city.checkins.size() << " check-ins, "
              << city.survey_persons.size() << " survey persons, " << city.zones.size()
              << " zones -> " << args.out_dir << "\n";
    return 0;
}

struct GroundTruthArgs {
    std::string checkins, keywords, out, poi_map;
    std::size_t min_checkins = 15;
};

int run_ground_truth(const GroundTruthArgs& args) {
    auto load = ms::ingest::load_checkins(args.checkins, args.poi_map.empty()
                                                            ? ms::ingest::default_poi_mapping()
                                                            : ms::ingest::load_poi_mapping(args.poi_map));
    auto active = ms::ingest::filter_active_users(load.records, args.min_checkins);
    auto cfg = args.keywords.empty() ? ms::ground_truth::default_keywords()
                                     : ms::ground_truth::load_keywords(args.keywords);
    auto places = ms::ground_truth::build_ground_truth(active, cfg);
    ms::csv::atomic_write(args.out, [&](std::ostream& out) {
        ms::ground_truth::save_ground_truth(places, out);
    });
    std::size_t homes = 0, works = 0;
    for (const auto& p : places)
        (p.role == ms::ground_truth::PlaceRole::Home ? homes : works) += 1;
    std::cout << "ground-truth: " << homes << " homes, " << works << " works ("
              << load.rejected << " malformed rows skipped)\n";
    return 0;
}

struct CalibrateArgs {
    std::string checkins, truth, report_out, params_out, poi_map;
    std::uint64_t seed = 0;
    std::string radii = "20,50,70,100,200,300,500";
    std::size_t iters = 20000;
    std::size_t storage = 200;
    std::size_t min_checkins = 15;
};

int run_calibrate(const CalibrateArgs& args) {
    auto load = ms::ingest::load_checkins(args.checkins, args.poi_map.empty()
                                                             ? ms::ingest::default_poi_mapping()
                                                             : ms::ingest::load_poi_mapping(args.poi_map));
    auto active = ms::ingest::filter_active_users(load.records, args.min_checkins);
    auto truth = ms::ground_truth::load_ground_truth(args.truth);
    auto radii = parse_double_list(args.radii, "radius");

    ms::calib::ParamBounds bounds;  // [0,1] everywhere
    ms::calib::CrsConfig cfg;
    cfg.p = args.storage;
    cfg.n_iter = args.iters;
    cfg.rng_seed = args.seed;

    auto reports = ms::calib::sweep_radius(radii, truth, active, bounds, cfg);

    ms::csv::atomic_write(args.report_out, [&](std::ostream& out) {
        out << "radius,a,b,k1,k2,f,home_p50_km,work_p50_km,home_cov,work_cov\n";
        for (const auto& r : reports) {
            std::vector<std::string> row{
                fmt(r.radius_m, "%.9g"),       fmt(r.calibrated.a, "%.9g"),
                fmt(r.calibrated.b, "%.9g"),   fmt(r.calibrated.k1, "%.9g"),
                fmt(r.calibrated.k2, "%.9g"),  fmt(r.best_f, "%.9g"),
                fmt(r.home.p50),               fmt(r.work.p50),
                fmt(r.home.coverage),          fmt(r.work.coverage)};
            ms::csv::write_row(out, row);
        }
    });

    // lowest objective wins; exact ties go to the radius covering more users
    const auto best = std::min_element(
        reports.begin(), reports.end(), [](const auto& a, const auto& b) {
            if (a.best_f != b.best_f) return a.best_f < b.best_f;
            return a.home.coverage + a.work.coverage > b.home.coverage + b.work.coverage;
        });
    write_params_json(best->calibrated, args.params_out);
    std::cout << "calibrate: best radius " << best->radius_m << " m, objective "
              << fmt(best->best_f, "%.9g") << " -> " << args.params_out << "\n";
    return 0;
}

struct IdentifyArgs {
    std::string checkins, zones, params_file, poi_map;
    std::string places_out, noncommute_out;
    std::size_t min_checkins = 15;
    double r = -1, a = -1, b = -1, k1 = -1, k2 = -1;
};

int run_identify(const IdentifyArgs& args) {
    ms::ident::IdentParams params;
    if (!args.params_file.empty()) {
        params = load_params_json(args.params_file);
    } else {
        params = ms::ident::IdentParams{args.r, args.a, args.b, args.k1, args.k2};
    }
    auto registry = ms::geo::load_zones(args.zones);
    auto load = ms::ingest::load_checkins(args.checkins, args.poi_map.empty()
                                                             ? ms::ingest::default_poi_mapping()
                                                             : ms::ingest::load_poi_mapping(args.poi_map));
    auto active = ms::ingest::filter_active_users(load.records, args.min_checkins);
    auto people = ms::ident::identify_all(active, params);

    ms::csv::atomic_write(args.places_out, [&](std::ostream& out) {
        write_places(people, registry, out);
    });
    ms::csv::atomic_write(args.noncommute_out,
                          [&](std::ostream& out) { write_noncommute(people, out); });
    std::size_t homes = 0, works = 0;
    for (const auto& p : people) {
        homes += p.home.has_value();
        works += p.work.has_value();
    }
    std::cout << "identify: " << people.size() << " users anchored (" << homes
              << " homes, " << works << " works)\n";
    return 0;
}

struct SynthesizeArgs {
    std::string places, noncommute, profiles, survey_persons, survey_trips, zones;
    std::string population_out, fit_out, screening_out, constraints_prefix;
    std::uint64_t seed = 0;
    std::size_t steps = 50000;
    double alpha = 0.999;
};

int run_synthesize(const SynthesizeArgs& args) {
    auto registry = ms::geo::load_zones(args.zones);
    auto place_rows = load_places(args.places);
    auto places_by_person = places_from_rows(place_rows);
    auto profiles = ms::ingest::load_profiles(args.profiles);
    auto survey = ms::ingest::load_survey(args.survey_persons, args.survey_trips);

    std::vector<std::string> districts;
    for (const auto& z : registry.zones()) districts.push_back(z.district);
    auto scheme = ms::popsynth::default_scheme(districts);

    if (!args.screening_out.empty()) {
        const std::vector<std::string> attrs{"gender", "age", "district"};
        auto screening = ms::popsynth::screen_attributes(survey.persons, survey.trips,
                                                         registry, scheme, attrs);
        ms::csv::atomic_write(args.screening_out, [&](std::ostream& out) {
            out << "attribute,h,p_value,groups,n\n";
            for (const auto& r : screening) {
                std::vector<std::string> row{r.attribute, fmt(r.h, "%.6f"),
                                             fmt(r.p_value, "%.6g"),
                                             std::to_string(r.groups),
                                             std::to_string(r.n)};
                ms::csv::write_row(out, row);
            }
        });
    }

    // eligible sample: identified home, age and gender on file, age mappable
    std::map<std::string, const ms::ingest::UserProfile*> profile_by_user;
    for (const auto& p : profiles) profile_by_user[p.user_id] = &p;
    std::vector<ms::popsynth::Candidate> candidates;
    std::size_t skipped = 0;
    for (const auto& [user_id, pp] : places_by_person) {
        if (!pp.home) continue;
        auto it = profile_by_user.find(user_id);
        if (it == profile_by_user.end() || !it->second->age || !it->second->gender) {
            ++skipped;
            continue;
        }
        if (*it->second->age < scheme.age_bands.front().first) {
            ++skipped;
            continue;
        }
        const auto& home_zone = ms::geo::assign_zone(pp.home->centroid, registry);
        ms::popsynth::Candidate c;
        c.person_id = user_id;
        c.gender = *it->second->gender;
        c.age = *it->second->age;
        c.home_zone = home_zone.zone_id;
        c.home_district = home_zone.district;
        c.commuter = pp.work.has_value();
        candidates.push_back(std::move(c));
    }
    if (candidates.empty()) throw ms::Error("synthesize: no eligible candidates");

    auto constraints =
        ms::popsynth::build_constraints(survey.persons, scheme, registry, true);

    if (!args.constraints_prefix.empty()) {
        for (const auto& [name, table] : constraints) {
            ms::csv::atomic_write(args.constraints_prefix + name + ".csv",
                                  [&, &table = table](std::ostream& out) {
                out << "zone_id,tabulation,cell,target\n";
                for (const auto& z : table.zones) {
                    auto rows = [&](const std::string& tab, const std::vector<int>& cells,
                                    auto cell_name) {
                        for (std::size_t i = 0; i < cells.size(); ++i) {
                            std::vector<std::string> row{z.zone_id, tab, cell_name(i),
                                                         std::to_string(cells[i])};
                            ms::csv::write_row(out, row);
                        }
                    };
                    rows("gender", z.cells.gender, [&](std::size_t i) {
                        return std::string(1, table.scheme.genders[i]);
                    });
                    rows("age", z.cells.age,
                         [&](std::size_t i) { return table.scheme.age_band_name(i); });
                    rows("age_gender", z.cells.age_gender, [&](std::size_t i) {
                        return table.scheme.cross_name(i / table.scheme.genders.size(),
                                                       i % table.scheme.genders.size());
                    });
                    rows("district", z.cells.district,
                         [&](std::size_t i) { return table.scheme.districts[i]; });
                }
            });
        }
    }

    ms::popsynth::AnnealConfig anneal;
    anneal.steps = args.steps;
    anneal.alpha = args.alpha;
    anneal.rng_seed = args.seed;
    auto population = ms::popsynth::synthesize(candidates, constraints, anneal);
    auto clones = ms::popsynth::attach_mobility(population, places_by_person);

    ms::csv::atomic_write(args.population_out, [&](std::ostream& out) {
        out << "clone_id,person_id,zone_id,gender,age,district,commuter\n";
        for (const auto& c : clones) {
            std::vector<std::string> row{c.clone_id,
                                         c.person_id,
                                         c.zone_id,
                                         std::string(1, c.gender),
                                         std::to_string(c.age),
                                         c.district,
                                         c.commuter ? "1" : "0"};
            ms::csv::write_row(out, row);
        }
    });
    ms::csv::atomic_write(args.fit_out, [&](std::ostream& out) {
        out << "stratum,tabulation,tae,cpe\n";
        for (const auto& r : population.fit) {
            std::vector<std::string> row{r.stratum, r.tabulation, std::to_string(r.tae),
                                         fmt(r.cpe, "%.6f")};
            ms::csv::write_row(out, row);
        }
    });
    std::cout << "synthesize: " << clones.size() << " clones, total TAE "
              << population.total_tae << " (" << skipped
              << " samples lacked usable profiles)\n";
    return 0;
}

struct ValidateArgs {
    std::string places, noncommute, survey_persons, survey_trips, zones;
    std::string population;  // optional
    std::string out, hist_out;
};

int run_validate(const ValidateArgs& args) {
    auto registry = ms::geo::load_zones(args.zones);
    auto place_rows = load_places(args.places);
    auto noncommute_rows = load_noncommute(args.noncommute);
    auto survey = ms::ingest::load_survey(args.survey_persons, args.survey_trips);
    const auto universe = registry.zone_ids();

    using ms::geo::ZoneCounts;

    // survey side
    ZoneCounts survey_home, survey_work, survey_ent, survey_other;
    std::map<std::string, const ms::ingest::SurveyTrip*> first_work_trip;
    for (const auto& t : survey.trips) {
        if (t.purpose == ms::ingest::TripPurpose::Work)
            first_work_trip.try_emplace(t.person_id, &t);
        else if (t.purpose == ms::ingest::TripPurpose::Entertainment)
            survey_ent[t.dest_zone] += 1;
        else if (t.purpose == ms::ingest::TripPurpose::Other)
            survey_other[t.dest_zone] += 1;
    }
    std::vector<std::pair<GeoPoint, GeoPoint>> survey_commutes;
    for (const auto& p : survey.persons) {
        survey_home[p.home_zone] += 1;
        auto it = first_work_trip.find(p.person_id);
        if (it == first_work_trip.end()) continue;
        survey_work[it->second->dest_zone] += 1;
        survey_commutes.emplace_back(registry.at(p.home_zone).centroid,
                                     registry.at(it->second->dest_zone).centroid);
    }

    // check-in side (microdata)
    ZoneCounts micro_home, micro_work, micro_ent, micro_other;
    std::map<std::string, GeoPoint> user_home, user_work;
    for (const PlaceRow& r : place_rows) {
        if (r.role == "home") {
            micro_home[r.zone_id] += 1;
            user_home[r.user_id] = r.location;
        } else {
            micro_work[r.zone_id] += 1;
            user_work[r.user_id] = r.location;
        }
    }
    for (const NoncommuteRow& r : noncommute_rows) {
        if (r.label == "unknown") continue;
        const auto& zone = ms::geo::assign_zone(r.location, registry);
        // non-commute popularity is days-weighted
        (r.label == "entertainment" ? micro_ent : micro_other)[zone.zone_id] += r.days;
    }
    std::vector<std::pair<GeoPoint, GeoPoint>> micro_commutes;
    for (const auto& [user, home] : user_home) {
        auto it = user_work.find(user);
        if (it != user_work.end()) micro_commutes.emplace_back(home, it->second);
    }

    struct Row {
        std::string metric, activity, value;
    };
    std::vector<Row> rows;
    auto compare_side = [&](const std::string& suffix, const ZoneCounts& home,
                            const ZoneCounts& work, const ZoneCounts& ent,
                            const ZoneCounts& other) {
        auto one = [&](const char* activity, const ZoneCounts& c, const ZoneCounts& s) {
            if (c.empty() || s.empty()) return;
            const auto cd = ms::metrics::to_distribution(c, universe);
            const auto sd = ms::metrics::to_distribution(s, universe);
            rows.push_back(Row{"CS" + suffix, activity,
                               fmt(ms::metrics::cosine_similarity(cd, sd))});
            rows.push_back(Row{"DC_km" + suffix, activity,
                               fmt(ms::metrics::gravity_distance(c, s, registry))});
        };
        one("home", home, survey_home);
        one("work", work, survey_work);
        one("entertainment", ent, survey_ent);
        one("other", other, survey_other);
    };
    compare_side("", micro_home, micro_work, micro_ent, micro_other);

    std::optional<ms::metrics::DistanceHistogram> survey_hist, micro_hist, syn_hist;
    if (!survey_commutes.empty())
        survey_hist = ms::metrics::commute_histogram(survey_commutes);
    if (!micro_commutes.empty())
        micro_hist = ms::metrics::commute_histogram(micro_commutes);
    if (micro_hist && survey_hist)
        rows.push_back(Row{"CR", "commute",
                           fmt(ms::metrics::coincidence_ratio(*micro_hist, *survey_hist))});

    // synthetic population side, when provided
    if (!args.population.empty()) {
        std::ifstream in(args.population, std::ios::binary);
        if (!in)
            throw ms::csv::FileUnreadable("cannot open population: " + args.population);
        ms::csv::Reader reader(in);
        ms::csv::expect_header(reader,
                               "clone_id,person_id,zone_id,gender,age,district,commuter");
        std::map<std::string, std::vector<const NoncommuteRow*>> noncommute_by_user;
        for (const auto& r : noncommute_rows) noncommute_by_user[r.user_id].push_back(&r);

        ZoneCounts syn_home, syn_work, syn_ent, syn_other;
        std::vector<std::pair<GeoPoint, GeoPoint>> syn_commutes;
        while (auto row = reader.next()) {
            if (row->size() != 7) throw ms::Error("bad population row");
            const std::string& person = (*row)[1];
            syn_home[(*row)[2]] += 1;  // the zone the clone was placed in
            auto home_it = user_home.find(person);
            auto work_it = user_work.find(person);
            if (work_it != user_work.end()) {
                syn_work[ms::geo::assign_zone(work_it->second, registry).zone_id] += 1;
                if (home_it != user_home.end())
                    syn_commutes.emplace_back(home_it->second, work_it->second);
            }
            auto nc = noncommute_by_user.find(person);
            if (nc != noncommute_by_user.end()) {
                for (const NoncommuteRow* r : nc->second) {
                    if (r->label == "unknown") continue;
                    const auto& zone = ms::geo::assign_zone(r->location, registry);
                    (r->label == "entertainment" ? syn_ent : syn_other)[zone.zone_id] +=
                        r->days;
                }
            }
        }
        compare_side("_syn", syn_home, syn_work, syn_ent, syn_other);
        if (!syn_commutes.empty()) syn_hist = ms::metrics::commute_histogram(syn_commutes);
        if (syn_hist && survey_hist)
            rows.push_back(Row{"CR_syn", "commute",
                               fmt(ms::metrics::coincidence_ratio(*syn_hist, *survey_hist))});
    }

    ms::csv::atomic_write(args.out, [&](std::ostream& out) {
        out << "metric,activity,value\n";
        for (const auto& r : rows) {
            std::vector<std::string> fields{r.metric, r.activity, r.value};
            ms::csv::write_row(out, fields);
        }
    });

    if (!args.hist_out.empty() && survey_hist) {
        const auto& primary = syn_hist ? *syn_hist : micro_hist.value();
        ms::csv::atomic_write(args.hist_out, [&](std::ostream& out) {
            out << "bin_lo_km,fraction_c,fraction_s\n";
            for (std::size_t i = 0; i < primary.p.size(); ++i) {
                std::vector<std::string> fields{fmt(i * primary.width_km, "%.2f"),
                                                fmt(primary.p[i], "%.9g"),
                                                fmt(survey_hist->p[i], "%.9g")};
                ms::csv::write_row(out, fields);
            }
        });
    }
    std::cout << "validate: " << rows.size() << " metric rows -> " << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"check-in mobility toolkit: purpose-specific place identification, "
                 "CRS calibration, population synthesis and survey validation"};
    app.require_subcommand(1);
    std::string config_file;

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate a synthetic city");
    gen->add_option("--seed", gen_args.seed, "rng seed")->required();
    gen->add_option("--out", gen_args.out_dir, "output directory")->required();
    gen->add_option("--users", gen_args.cfg.n_users, "check-in users");
    gen->add_option("--zones", gen_args.cfg.n_zones, "zone count");
    gen->add_option("--days", gen_args.cfg.days_span, "observation window, days");
    gen->add_option("--survey", gen_args.cfg.survey_size, "survey persons");
    gen->add_option("--noise", gen_args.cfg.noise_venue_rate, "noise check-in rate");
    gen->add_option("--jitter", gen_args.cfg.gps_jitter_m, "venue jitter, meters");
    gen->add_option("--home-rate", gen_args.cfg.home_event_rate, "home check-in rate");
    gen->add_option("--work-rate", gen_args.cfg.work_event_rate, "work check-in rate");
    gen->add_option("--commuter-share", gen_args.cfg.commuter_share, "commuter share");
    gen->add_option("--districts", gen_args.cfg.n_districts, "district count");
    gen->add_option("--bias", gen_args.bias, "8 comma-separated age-band weights");
    gen->add_option("--checkins-per-user", gen_args.checkin_range, "lo,hi target range");

    GroundTruthArgs gt_args;
    auto* gt = app.add_subcommand("ground-truth", "label homes/works from POI + keywords");
    gt->add_option("--checkins", gt_args.checkins, "check-in CSV")->required();
    gt->add_option("--keywords", gt_args.keywords, "keyword CSV (role,keyword)");
    gt->add_option("--poi-map", gt_args.poi_map, "POI label mapping CSV (label,category)");
    gt->add_option("--min-checkins", gt_args.min_checkins, "activity filter");
    gt->add_option("--out", gt_args.out, "labeled places CSV")->required();

    CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate", "fit identification parameters by CRS");
    cal->add_option("--checkins", cal_args.checkins, "check-in CSV")->required();
    cal->add_option("--truth", cal_args.truth, "labeled places CSV")->required();
    cal->add_option("--seed", cal_args.seed, "rng seed")->required();
    cal->add_option("--radii", cal_args.radii, "comma-separated radii, meters");
    cal->add_option("--poi-map", cal_args.poi_map, "POI label mapping CSV (label,category)");
    cal->add_option("--iters", cal_args.iters, "CRS iterations");
    cal->add_option("--storage", cal_args.storage, "CRS storage size");
    cal->add_option("--min-checkins", cal_args.min_checkins, "activity filter");
    cal->add_option("--report-out", cal_args.report_out, "sweep report CSV")->required();
    cal->add_option("--params-out", cal_args.params_out, "params JSON")->required();

    IdentifyArgs id_args;
    auto* id = app.add_subcommand("identify", "identify home/work/non-commute places");
    id->add_option("--checkins", id_args.checkins, "check-in CSV")->required();
    id->add_option("--zones", id_args.zones, "zone CSV")->required();
    id->add_option("--params", id_args.params_file, "params JSON from calibrate");
    id->add_option("--poi-map", id_args.poi_map, "POI label mapping CSV (label,category)");
    id->add_option("--r", id_args.r, "clustering radius, meters");
    id->add_option("--a", id_args.a, "cluster-days threshold");
    id->add_option("--b", id_args.b, "timespan threshold");
    id->add_option("--k1", id_args.k1, "home gate");
    id->add_option("--k2", id_args.k2, "work gate");
    id->add_option("--min-checkins", id_args.min_checkins, "activity filter");
    id->add_option("--places-out", id_args.places_out, "places CSV")->required();
    id->add_option("--noncommute-out", id_args.noncommute_out, "non-commute CSV")
        ->required();

    SynthesizeArgs syn_args;
    auto* syn = app.add_subcommand("synthesize", "reconstruct the sample per survey "
                                                 "marginals (per-zone annealing)");
    syn->add_option("--places", syn_args.places, "places CSV from identify")->required();
    syn->add_option("--noncommute", syn_args.noncommute, "non-commute CSV")->required();
    syn->add_option("--profiles", syn_args.profiles, "user profile CSV")->required();
    syn->add_option("--survey-persons", syn_args.survey_persons, "survey persons CSV")
        ->required();
    syn->add_option("--survey-trips", syn_args.survey_trips, "survey trips CSV")
        ->required();
    syn->add_option("--zones", syn_args.zones, "zone CSV")->required();
    syn->add_option("--seed", syn_args.seed, "rng seed")->required();
    syn->add_option("--steps", syn_args.steps, "annealing steps per zone");
    syn->add_option("--alpha", syn_args.alpha, "cooling factor per step");
    syn->add_option("--population-out", syn_args.population_out, "population CSV")
        ->required();
    syn->add_option("--fit-out", syn_args.fit_out, "fit report CSV")->required();
    syn->add_option("--screening-out", syn_args.screening_out, "Kruskal-Wallis CSV");
    syn->add_option("--constraints-out-prefix", syn_args.constraints_prefix,
                    "write constraint tables with this path prefix");

    ValidateArgs val_args;
    auto* val = app.add_subcommand("validate", "compute CS/DC/CR against the survey");
    val->add_option("--places", val_args.places, "places CSV")->required();
    val->add_option("--noncommute", val_args.noncommute, "non-commute CSV")->required();
    val->add_option("--survey-persons", val_args.survey_persons, "survey persons CSV")
        ->required();
    val->add_option("--survey-trips", val_args.survey_trips, "survey trips CSV")
        ->required();
    val->add_option("--zones", val_args.zones, "zone CSV")->required();
    val->add_option("--population", val_args.population, "population CSV (optional)");
    val->add_option("--out", val_args.out, "metrics CSV")->required();
    val->add_option("--hist-out", val_args.hist_out, "commute histogram CSV");

    // optional key=value defaults file on every subcommand; explicit flags win
    for (CLI::App* sub : {gen, gt, cal, id, syn, val})
        sub->add_option("--config", config_file, "key=value defaults file");

    std::vector<std::string> args;
    try {
        args = merge_config_args(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return run_gen(gen_args);
        if (*gt) return run_ground_truth(gt_args);
        if (*cal) return run_calibrate(cal_args);
        if (*id) {
            if (id_args.params_file.empty() &&
                (id_args.r < 0 || id_args.a < 0 || id_args.b < 0 || id_args.k1 < 0 ||
                 id_args.k2 < 0)) {
                std::cerr << "error: identify needs --params or all of "
                             "--r/--a/--b/--k1/--k2\n";
                return 2;
            }
            return run_identify(id_args);
        }
        if (*syn) return run_synthesize(syn_args);
        if (*val) return run_validate(val_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
