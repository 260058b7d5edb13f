#include "mobiscape/location_id.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "mobiscape/parallel.hpp"

namespace mobiscape::ident {

using ingest::CheckIn;
using ingest::PoiCategory;

std::pair<std::vector<VenueStat>, int> venue_stats(std::span<const CheckIn> user_records) {
    if (user_records.empty()) throw Error("venue_stats: no records");

    std::map<std::string, std::set<std::int32_t>> venue_days;
    std::map<std::string, geo::GeoPoint> venue_loc;
    std::int32_t first_day = user_records.front().when.day_number;
    std::int32_t last_day = first_day;
    for (const CheckIn& r : user_records) {
        auto [it, inserted] = venue_loc.try_emplace(r.venue_id, r.location);
        (void)it;
        (void)inserted;
        venue_days[r.venue_id].insert(r.when.day_number);
        first_day = std::min(first_day, r.when.day_number);
        last_day = std::max(last_day, r.when.day_number);
    }

    std::vector<VenueStat> stats;
    stats.reserve(venue_days.size());
    for (const auto& [venue, days] : venue_days)
        stats.push_back(VenueStat{venue, venue_loc[venue], static_cast<int>(days.size())});
    const int total_days = static_cast<int>(last_day - first_day) + 1;
    return {std::move(stats), total_days};
}

std::vector<Cluster> cluster_venues(std::vector<VenueStat> stats, double r_m) {
    if (r_m <= 0.0) throw Error("cluster_venues: radius must be positive");
    std::sort(stats.begin(), stats.end(), [](const VenueStat& a, const VenueStat& b) {
        if (a.days != b.days) return a.days > b.days;
        return a.venue_id < b.venue_id;
    });

    struct Acc {
        double day_sum = 0.0;
        double lat_sum = 0.0;
        double lon_sum = 0.0;
    };
    std::vector<Cluster> clusters;
    std::vector<Acc> accs;
    const double r_km = r_m / 1000.0;
    for (VenueStat& v : stats) {
        std::size_t target = clusters.size();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (geo::haversine_km(v.location, clusters[c].centroid) <= r_km) {
                target = c;
                break;
            }
        }
        if (target == clusters.size()) {
            clusters.push_back(Cluster{});
            accs.push_back(Acc{});
        }
        Acc& acc = accs[target];
        acc.day_sum += v.days;
        acc.lat_sum += v.location.lat * v.days;
        acc.lon_sum += v.location.lon * v.days;
        clusters[target].centroid =
            geo::GeoPoint{acc.lat_sum / acc.day_sum, acc.lon_sum / acc.day_sum};
        clusters[target].members.push_back(std::move(v));
    }
    return clusters;
}

bool in_work_window(const DateTime& t) {
    if (!t.is_weekday()) return false;
    const int h = t.hour();
    return (h >= 9 && h < 12) || (h >= 13 && h < 18);
}

bool in_home_window(const DateTime& t) {
    const int h = t.hour();
    return h >= 22 || h < 7;
}

void compute_events(std::vector<Cluster>& clusters,
                    std::span<const CheckIn> user_records) {
    std::unordered_map<std::string, std::size_t> venue_to_cluster;
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (const VenueStat& m : clusters[c].members) venue_to_cluster[m.venue_id] = c;

    std::vector<std::set<std::int32_t>> day_sets(clusters.size());
    std::vector<std::int32_t> first(clusters.size(), 0), last(clusters.size(), 0);
    std::vector<bool> seen(clusters.size(), false);
    for (Cluster& c : clusters) {
        c.work_events = 0;
        c.home_events = 0;
    }
    for (const CheckIn& r : user_records) {
        auto it = venue_to_cluster.find(r.venue_id);
        if (it == venue_to_cluster.end()) continue;
        const std::size_t c = it->second;
        day_sets[c].insert(r.when.day_number);
        if (!seen[c]) {
            first[c] = last[c] = r.when.day_number;
            seen[c] = true;
        } else {
            first[c] = std::min(first[c], r.when.day_number);
            last[c] = std::max(last[c], r.when.day_number);
        }
        if (in_work_window(r.when)) ++clusters[c].work_events;
        if (in_home_window(r.when)) ++clusters[c].home_events;
    }

    long long work_total = 0, home_total = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        clusters[c].cluster_days = static_cast<int>(day_sets[c].size());
        clusters[c].timespan_days = seen[c] ? static_cast<int>(last[c] - first[c]) + 1 : 0;
        work_total += clusters[c].work_events;
        home_total += clusters[c].home_events;
    }
    for (Cluster& c : clusters) {
        c.work_pct = work_total > 0 ? static_cast<double>(c.work_events) / work_total : 0.0;
        c.home_pct = home_total > 0 ? static_cast<double>(c.home_events) / home_total : 0.0;
    }
}

std::vector<std::size_t> important_indices(std::span<const Cluster> clusters,
                                           int total_days, double a, double b) {
    if (total_days < 1) throw Error("important_indices: total_days must be >= 1");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const double day_share = static_cast<double>(clusters[i].cluster_days) / total_days;
        const double span_share =
            static_cast<double>(clusters[i].timespan_days) / total_days;
        if (day_share >= a && span_share >= b) keep.push_back(i);
    }
    return keep;
}

std::vector<Cluster> important_clusters(std::span<const Cluster> clusters,
                                        int total_days, double a, double b) {
    std::vector<Cluster> out;
    for (std::size_t i : important_indices(clusters, total_days, a, b))
        out.push_back(clusters[i]);
    return out;
}

namespace {

const std::string& lead_venue(const Cluster& c) {
    // members join in global (days desc, venue asc) order, so the first
    // member is the densest with the canonical tie-break
    return c.members.front().venue_id;
}

// shared secondary ordering: larger cluster_days, then lead venue_id
bool tie_better(const Cluster& a, const Cluster& b) {
    if (a.cluster_days != b.cluster_days) return a.cluster_days > b.cluster_days;
    return lead_venue(a) < lead_venue(b);
}

}  // namespace

HomeWork identify_home_work(std::span<const Cluster> clusters,
                            std::span<const std::size_t> important, double k1,
                            double k2) {
    HomeWork result;
    if (important.empty()) return result;

    std::size_t best_home = important.front();
    for (std::size_t i : important) {
        const Cluster& cand = clusters[i];
        const Cluster& cur = clusters[best_home];
        if (cand.home_pct > cur.home_pct ||
            (cand.home_pct == cur.home_pct && tie_better(cand, cur)))
            best_home = i;
    }
    if (clusters[best_home].home_pct >= k1) result.home = best_home;

    std::optional<std::size_t> best_work;
    for (std::size_t i : important) {
        if (result.home && i == *result.home) continue;
        if (!best_work) {
            best_work = i;
            continue;
        }
        const Cluster& cand = clusters[i];
        const Cluster& cur = clusters[*best_work];
        const double cand_margin = cand.work_pct - cand.home_pct;
        const double cur_margin = cur.work_pct - cur.home_pct;
        if (cand_margin > cur_margin ||
            (cand_margin == cur_margin && tie_better(cand, cur)))
            best_work = i;
    }
    if (best_work && clusters[*best_work].work_pct >= k2) result.work = best_work;
    return result;
}

HomeWork identify_home_work(std::span<const Cluster> important, double k1, double k2) {
    std::vector<std::size_t> all(important.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return identify_home_work(important, all, k1, k2);
}

PersonPlaces label_noncommute(std::span<const CheckIn> user_records,
                              PersonPlaces places) {
    if (!places.home && !places.work)
        throw NoAnchor("user " + places.user_id + " has neither home nor work");

    std::unordered_set<std::string> anchored;
    if (places.home)
        anchored.insert(places.home->venue_ids.begin(), places.home->venue_ids.end());
    if (places.work)
        anchored.insert(places.work->venue_ids.begin(), places.work->venue_ids.end());

    std::map<std::string, std::pair<std::set<std::int32_t>, const CheckIn*>> venues;
    for (const CheckIn& r : user_records) {
        if (anchored.count(r.venue_id)) continue;
        auto& [days, first] = venues[r.venue_id];
        days.insert(r.when.day_number);
        if (!first) first = &r;
    }

    places.entertainment.clear();
    places.other.clear();
    places.unknown.clear();
    for (const auto& [venue_id, entry] : venues) {
        const auto& [days, first] = entry;
        VenueStat stat{venue_id, first->location, static_cast<int>(days.size())};
        switch (first->poi) {
            case PoiCategory::Entertainment:
                places.entertainment.push_back(std::move(stat));
                break;
            case PoiCategory::Unknown:
                places.unknown.push_back(std::move(stat));
                break;
            default:
                places.other.push_back(std::move(stat));
        }
    }
    return places;
}

std::optional<PersonPlaces> identify_user(const std::string& user_id,
                                          std::span<const CheckIn> user_records,
                                          const IdentParams& params) {
    auto [stats, total_days] = venue_stats(user_records);
    std::vector<Cluster> clusters = cluster_venues(std::move(stats), params.r_m);
    compute_events(clusters, user_records);
    auto important = important_indices(clusters, total_days, params.a, params.b);
    HomeWork hw = identify_home_work(clusters, important, params.k1, params.k2);
    if (!hw.home && !hw.work) return std::nullopt;

    auto to_place = [&](std::size_t c) {
        PlaceCluster place;
        place.centroid = clusters[c].centroid;
        for (const VenueStat& m : clusters[c].members) place.venue_ids.push_back(m.venue_id);
        return place;
    };
    PersonPlaces places;
    places.user_id = user_id;
    if (hw.home) places.home = to_place(*hw.home);
    if (hw.work) places.work = to_place(*hw.work);
    return label_noncommute(user_records, std::move(places));
}

std::vector<PersonPlaces> identify_all(std::span<const CheckIn> records,
                                       const IdentParams& params) {
    std::map<std::string, std::vector<CheckIn>> by_user;
    for (const CheckIn& r : records) by_user[r.user_id].push_back(r);

    std::vector<std::pair<const std::string*, const std::vector<CheckIn>*>> users;
    users.reserve(by_user.size());
    for (const auto& [id, recs] : by_user) users.emplace_back(&id, &recs);

    std::vector<std::optional<PersonPlaces>> results(users.size());
    parallel_for(users.size(), [&](std::size_t i) {
        results[i] = identify_user(*users[i].first, *users[i].second, params);
    });

    std::vector<PersonPlaces> out;
    for (auto& r : results)
        if (r) out.push_back(std::move(*r));
    return out;
}

}  // namespace mobiscape::ident
