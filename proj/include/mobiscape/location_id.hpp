#ifndef MOBISCAPE_LOCATION_ID_HPP
#define MOBISCAPE_LOCATION_ID_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"
#include "mobiscape/ingest.hpp"

namespace mobiscape::ident {

MOBISCAPE_DEFINE_ERROR(NoAnchor);

// The five tuning parameters of the identification algorithm.
struct IdentParams {
    double r_m = 300.0;  // clustering radius, meters
    double a = 0.0;      // cluster-days share threshold
    double b = 0.0;      // timespan share threshold
    double k1 = 0.0;     // home-event share gate
    double k2 = 0.0;     // work-event share gate
};

struct VenueStat {
    std::string venue_id;
    geo::GeoPoint location;
    int days = 0;  // distinct check-in days at this venue
};

struct Cluster {
    geo::GeoPoint centroid;          // days-weighted mean of member locations
    std::vector<VenueStat> members;  // in join order
    int cluster_days = 0;            // distinct days across members, each day once
    int timespan_days = 0;           // first..last member check-in, both ends counted
    int work_events = 0;
    int home_events = 0;
    double work_pct = 0.0;  // this cluster's share of the user's work events
    double home_pct = 0.0;
};

// One VenueStat per distinct venue_id plus the user's observation window
// length in days (first to last record, both ends counted).
std::pair<std::vector<VenueStat>, int> venue_stats(
    std::span<const ingest::CheckIn> user_records);

// Greedy pass over venues sorted by days descending (ties by venue_id): a
// venue joins the first cluster whose current centroid lies within r meters,
// else founds a new cluster. Joining moves the centroid to the days-weighted
// mean of the members.
std::vector<Cluster> cluster_venues(std::vector<VenueStat> stats, double r_m);

// Event windows:
//   work: Mon-Fri, [09:00,12:00) or [13:00,18:00)
//   home: any day,  [22:00,24:00) or [00:00,07:00)
bool in_work_window(const DateTime& t);
bool in_home_window(const DateTime& t);

// Fills cluster_days, timespan, event counts and cross-cluster percentages.
void compute_events(std::vector<Cluster>& clusters,
                    std::span<const ingest::CheckIn> user_records);

// Indices of clusters passing both cluster_days/total >= a and
// timespan/total >= b, order preserved.
std::vector<std::size_t> important_indices(std::span<const Cluster> clusters,
                                           int total_days, double a, double b);
std::vector<Cluster> important_clusters(std::span<const Cluster> clusters,
                                        int total_days, double a, double b);

struct HomeWork {
    std::optional<std::size_t> home;  // index into the cluster list passed in
    std::optional<std::size_t> work;
};

// Home: the cluster with the highest home-event share, kept iff that share
// reaches k1. Work: among the remaining clusters, the one with the largest
// (work share - home share) margin, kept iff its work share reaches k2.
// Ties break by larger cluster_days, then by the leading member's venue_id.
HomeWork identify_home_work(std::span<const Cluster> important, double k1, double k2);
HomeWork identify_home_work(std::span<const Cluster> clusters,
                            std::span<const std::size_t> important, double k1,
                            double k2);

struct PlaceCluster {
    geo::GeoPoint centroid;
    std::vector<std::string> venue_ids;
};

struct PersonPlaces {
    std::string user_id;
    std::optional<PlaceCluster> home;
    std::optional<PlaceCluster> work;
    // venues outside the home/work clusters, labeled by POI category
    std::vector<VenueStat> entertainment;
    std::vector<VenueStat> other;
    std::vector<VenueStat> unknown;
};

// Labels every distinct venue outside the home/work clusters. Throws NoAnchor
// when places has neither home nor work; callers skip such users.
PersonPlaces label_noncommute(std::span<const ingest::CheckIn> user_records,
                              PersonPlaces places);

// Full per-user pipeline; nullopt when neither home nor work is identified.
std::optional<PersonPlaces> identify_user(const std::string& user_id,
                                          std::span<const ingest::CheckIn> user_records,
                                          const IdentParams& params);

// Groups records by user (first-appearance order preserved for grouping;
// output sorted by user_id) and identifies everyone with an anchor.
std::vector<PersonPlaces> identify_all(std::span<const ingest::CheckIn> records,
                                       const IdentParams& params);

}  // namespace mobiscape::ident

#endif
