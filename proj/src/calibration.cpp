#include "mobiscape/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mobiscape/rng.hpp"

namespace mobiscape::calib {

using ground_truth::LabeledPlace;
using ground_truth::PlaceRole;
using ingest::CheckIn;

CrsResult crs_minimize(const Objective& eval, const ParamBounds& bounds,
                       const CrsConfig& cfg) {
    const auto box = bounds.as_array();
    for (const auto& iv : box)
        if (!(iv.lo <= iv.hi))
            throw InfeasibleBounds("empty parameter interval");
    if (cfg.m < 1 || cfg.p <= cfg.m + 1)
        throw Error("crs: storage size p must exceed m + 1");

    Rng rng(cfg.rng_seed);
    const std::size_t dim = box.size();

    std::vector<CrsPoint> storage(cfg.p);
    for (CrsPoint& pt : storage) {
        for (std::size_t d = 0; d < dim; ++d) pt.x[d] = rng.uniform(box[d].lo, box[d].hi);
        pt.f = eval(pt.x);
    }

    auto worst_of = [&] {
        std::size_t w = 0;
        for (std::size_t i = 1; i < storage.size(); ++i)
            if (storage[i].f > storage[w].f) w = i;
        return w;
    };
    auto best_of = [&] {
        std::size_t b = 0;
        for (std::size_t i = 1; i < storage.size(); ++i)
            if (storage[i].f < storage[b].f) b = i;
        return b;
    };
    std::size_t worst = worst_of();
    std::size_t best = best_of();

    CrsResult result;
    result.fmin_trace.reserve(cfg.n_iter);
    result.fmax_trace.reserve(cfg.n_iter);

    std::vector<std::size_t> scratch(cfg.p);
    for (std::size_t i = 0; i < cfg.p; ++i) scratch[i] = i;

    for (std::size_t iter = 0; iter < cfg.n_iter; ++iter) {
        // m + 1 distinct storage indices (partial Fisher-Yates)
        for (std::size_t j = 0; j <= cfg.m; ++j) {
            std::size_t k = j + static_cast<std::size_t>(rng.bounded(cfg.p - j));
            std::swap(scratch[j], scratch[k]);
        }
        const std::size_t refl_slot = static_cast<std::size_t>(rng.bounded(cfg.m + 1));

        std::array<double, 4> centroid{};
        for (std::size_t j = 0; j <= cfg.m; ++j) {
            if (j == refl_slot) continue;
            const auto& x = storage[scratch[j]].x;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += x[d];
        }
        std::array<double, 4> candidate{};
        bool feasible = true;
        const auto& reflected = storage[scratch[refl_slot]].x;
        for (std::size_t d = 0; d < dim; ++d) {
            centroid[d] /= static_cast<double>(cfg.m);
            candidate[d] = 2.0 * centroid[d] - reflected[d];
            if (candidate[d] < box[d].lo || candidate[d] > box[d].hi) feasible = false;
        }

        if (feasible) {
            const double f = eval(candidate);
            if (f < storage[worst].f) {
                storage[worst] = CrsPoint{candidate, f};
                if (f < storage[best].f) best = worst;
                worst = worst_of();
            }
        }
        result.fmin_trace.push_back(storage[best].f);
        result.fmax_trace.push_back(storage[worst].f);
    }

    result.best_x = storage[best].x;
    result.best_f = storage[best].f;

    std::vector<CrsPoint> ranked = storage;
    std::sort(ranked.begin(), ranked.end(), [](const CrsPoint& a, const CrsPoint& b) {
        if (a.f != b.f) return a.f < b.f;
        return a.x < b.x;
    });
    const std::size_t take = std::min<std::size_t>(200, ranked.size());
    for (std::size_t i = 0; i < take; ++i)
        for (std::size_t d = 0; d < 4; ++d) result.top_mean[d] += ranked[i].x[d];
    for (std::size_t d = 0; d < 4; ++d) result.top_mean[d] /= static_cast<double>(take);

    result.storage = std::move(storage);
    return result;
}

namespace {

// one role's term of the objective
double role_term(std::span<const double> err_km) {
    if (err_km.empty()) return 1.0;  // identified nobody: worst case
    double d_max = 0.0;
    for (double e : err_km) d_max = std::max(d_max, e);
    if (d_max == 0.0) return 0.0;  // every identification exact
    double sum = 0.0;
    for (double e : err_km) sum += e / d_max;
    const double n = static_cast<double>(err_km.size());
    return sum / (n * n);
}

}  // namespace

double objective_from_errors(std::span<const double> home_err_km,
                             std::span<const double> work_err_km) {
    return 0.5 * (role_term(home_err_km) + role_term(work_err_km));
}

std::vector<PreparedUser> prepare_users(std::span<const LabeledPlace> truth,
                                        std::span<const CheckIn> records, double r_m) {
    std::map<std::string, PreparedUser> by_user;
    for (const LabeledPlace& place : truth) {
        PreparedUser& u = by_user[place.user_id];
        if (place.role == PlaceRole::Home) u.home_label = place.location;
        else u.work_label = place.location;
    }

    std::map<std::string, std::vector<CheckIn>> user_records;
    for (const CheckIn& r : records) {
        if (by_user.count(r.user_id)) user_records[r.user_id].push_back(r);
    }

    std::vector<PreparedUser> prepared;
    prepared.reserve(by_user.size());
    for (auto& [user_id, u] : by_user) {
        auto it = user_records.find(user_id);
        if (it == user_records.end())
            throw Error("labeled user has no check-in records: " + user_id);
        auto [stats, total_days] = ident::venue_stats(it->second);
        u.clusters = ident::cluster_venues(std::move(stats), r_m);
        ident::compute_events(u.clusters, it->second);
        u.total_days = total_days;
        prepared.push_back(std::move(u));
    }
    return prepared;
}

EvalDetail evaluate_params(std::span<const PreparedUser> prepared,
                           const ident::IdentParams& params) {
    EvalDetail detail;
    for (const PreparedUser& u : prepared) {
        if (u.home_label) ++detail.home_labeled;
        if (u.work_label) ++detail.work_labeled;
        auto important =
            ident::important_indices(u.clusters, u.total_days, params.a, params.b);
        ident::HomeWork hw =
            ident::identify_home_work(u.clusters, important, params.k1, params.k2);
        if (hw.home && u.home_label)
            detail.home_err_km.push_back(
                geo::haversine_km(u.clusters[*hw.home].centroid, *u.home_label));
        if (hw.work && u.work_label)
            detail.work_err_km.push_back(
                geo::haversine_km(u.clusters[*hw.work].centroid, *u.work_label));
    }
    detail.f = objective_from_errors(detail.home_err_km, detail.work_err_km);
    return detail;
}

double objective(const ident::IdentParams& params, std::span<const LabeledPlace> truth,
                 std::span<const CheckIn> records) {
    if (truth.empty()) throw Error("objective: ground truth is empty");
    auto prepared = prepare_users(truth, records, params.r_m);
    return evaluate_params(prepared, params).f;
}

double percentile(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted.front();
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileReport error_quantiles(std::vector<double> errors_km, std::size_t labeled) {
    QuantileReport report;
    report.matched = errors_km.size();
    report.labeled = labeled;
    report.coverage = labeled > 0
                          ? static_cast<double>(errors_km.size()) / static_cast<double>(labeled)
                          : 0.0;
    if (errors_km.empty()) return report;
    std::sort(errors_km.begin(), errors_km.end());
    report.p25 = percentile(errors_km, 0.25);
    report.p50 = percentile(errors_km, 0.50);
    report.p75 = percentile(errors_km, 0.75);
    report.p975 = percentile(errors_km, 0.975);
    return report;
}

CalibrationReport calibrate_radius(double r_m, std::span<const LabeledPlace> truth,
                                   std::span<const CheckIn> records,
                                   const ParamBounds& bounds, const CrsConfig& cfg) {
    if (truth.empty()) throw Error("calibrate_radius: ground truth is empty");
    auto prepared = prepare_users(truth, records, r_m);

    auto eval = [&](const std::array<double, 4>& x) {
        ident::IdentParams p{r_m, x[0], x[1], x[2], x[3]};
        return evaluate_params(prepared, p).f;
    };
    CrsResult crs = crs_minimize(eval, bounds, cfg);

    CalibrationReport report;
    report.radius_m = r_m;
    report.best = ident::IdentParams{r_m, crs.best_x[0], crs.best_x[1], crs.best_x[2],
                                     crs.best_x[3]};
    report.best_f = crs.best_f;
    report.calibrated = ident::IdentParams{r_m, crs.top_mean[0], crs.top_mean[1],
                                           crs.top_mean[2], crs.top_mean[3]};

    EvalDetail at_calibrated = evaluate_params(prepared, report.calibrated);
    report.home = error_quantiles(at_calibrated.home_err_km, at_calibrated.home_labeled);
    report.work = error_quantiles(at_calibrated.work_err_km, at_calibrated.work_labeled);
    return report;
}

std::vector<CalibrationReport> sweep_radius(std::span<const double> radii_m,
                                            std::span<const LabeledPlace> truth,
                                            std::span<const CheckIn> records,
                                            const ParamBounds& bounds,
                                            const CrsConfig& cfg) {
    if (radii_m.empty()) throw Error("sweep_radius: no radii given");
    std::vector<CalibrationReport> reports;
    reports.reserve(radii_m.size());
    for (std::size_t i = 0; i < radii_m.size(); ++i) {
        CrsConfig per_radius = cfg;
        per_radius.rng_seed =
            derive_seed(cfg.rng_seed, "crs-radius-" + std::to_string(i));
        reports.push_back(
            calibrate_radius(radii_m[i], truth, records, bounds, per_radius));
    }
    return reports;
}

}  // namespace mobiscape::calib
