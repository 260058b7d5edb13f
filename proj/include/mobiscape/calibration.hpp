#ifndef MOBISCAPE_CALIBRATION_HPP
#define MOBISCAPE_CALIBRATION_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/ground_truth.hpp"
#include "mobiscape/location_id.hpp"

namespace mobiscape::calib {

MOBISCAPE_DEFINE_ERROR(InfeasibleBounds);

// Search box for (a, b, k1, k2); the clustering radius is swept separately.
struct ParamBounds {
    struct Interval {
        double lo = 0.0;
        double hi = 1.0;
    };
    Interval a, b, k1, k2;

    std::array<Interval, 4> as_array() const { return {a, b, k1, k2}; }
};

struct CrsConfig {
    std::size_t p = 200;        // storage size
    std::size_t n_iter = 20000; // iteration budget; rejected reflections count
    std::size_t m = 4;          // reflection subset uses m+1 points
    std::uint64_t rng_seed = 0;
};

struct CrsPoint {
    std::array<double, 4> x{};
    double f = 0.0;
};

struct CrsResult {
    std::array<double, 4> best_x{};
    double best_f = 0.0;
    std::array<double, 4> top_mean{};  // mean of the best min(200, p) points
    std::vector<CrsPoint> storage;     // final storage, all within bounds
    std::vector<double> fmin_trace;    // per iteration, both non-increasing
    std::vector<double> fmax_trace;
};

using Objective = std::function<double(const std::array<double, 4>&)>;

// Price-style controlled random search: keep a storage of p points, refine by
// reflecting a random member of a random (m+1)-subset through the centroid of
// the others, replacing the worst stored point on improvement. Out-of-bounds
// reflections are rejected and still consume an iteration.
CrsResult crs_minimize(const Objective& eval, const ParamBounds& bounds,
                       const CrsConfig& cfg);

// Accuracy-and-coverage objective over matched identification errors (km).
// Each role term is (1/n^2) * sum(err / max err); an empty role counts as the
// worst case 1, an all-exact role as 0. Result is the mean of the two terms.
double objective_from_errors(std::span<const double> home_err_km,
                             std::span<const double> work_err_km);

// Per-user features that do not depend on (a, b, k1, k2): clusters at a fixed
// radius plus the user's ground-truth labels.
struct PreparedUser {
    std::vector<ident::Cluster> clusters;
    int total_days = 1;
    std::optional<geo::GeoPoint> home_label;
    std::optional<geo::GeoPoint> work_label;
};

std::vector<PreparedUser> prepare_users(
    std::span<const ground_truth::LabeledPlace> truth,
    std::span<const ingest::CheckIn> records, double r_m);

struct EvalDetail {
    double f = 1.0;
    std::vector<double> home_err_km;  // matched labeled users only
    std::vector<double> work_err_km;
    std::size_t home_labeled = 0;
    std::size_t work_labeled = 0;
};

EvalDetail evaluate_params(std::span<const PreparedUser> prepared,
                           const ident::IdentParams& params);

// Runs the identification over every labeled user and scores it.
double objective(const ident::IdentParams& params,
                 std::span<const ground_truth::LabeledPlace> truth,
                 std::span<const ingest::CheckIn> records);

struct QuantileReport {
    double p25 = 0.0, p50 = 0.0, p75 = 0.0, p975 = 0.0;  // km
    double coverage = 0.0;  // matched / labeled
    std::size_t matched = 0;
    std::size_t labeled = 0;
};

// Linear-interpolation percentiles of the matched errors. All quantiles are 0
// when nothing matched.
QuantileReport error_quantiles(std::vector<double> errors_km, std::size_t labeled);

// q in [0, 1] over a sorted sample, rank = q * (n - 1).
double percentile(std::span<const double> sorted, double q);

struct CalibrationReport {
    double radius_m = 0.0;
    ident::IdentParams best;        // theta_min, with the radius filled in
    double best_f = 0.0;
    ident::IdentParams calibrated;  // mean of the best stored points
    QuantileReport home;            // evaluated at `calibrated`
    QuantileReport work;
};

CalibrationReport calibrate_radius(double r_m,
                                   std::span<const ground_truth::LabeledPlace> truth,
                                   std::span<const ingest::CheckIn> records,
                                   const ParamBounds& bounds, const CrsConfig& cfg);

// One CRS run per radius; per-radius seeds derive from cfg.rng_seed, so the
// whole sweep replays exactly.
std::vector<CalibrationReport> sweep_radius(
    std::span<const double> radii_m, std::span<const ground_truth::LabeledPlace> truth,
    std::span<const ingest::CheckIn> records, const ParamBounds& bounds,
    const CrsConfig& cfg);

}  // namespace mobiscape::calib

#endif
