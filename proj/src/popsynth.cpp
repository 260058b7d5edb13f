#include "mobiscape/popsynth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "mobiscape/parallel.hpp"
#include "mobiscape/rng.hpp"

namespace mobiscape::popsynth {

using ingest::SurveyPerson;
using ingest::SurveyTrip;
using ingest::TripPurpose;

std::string CategoryScheme::age_band_name(std::size_t band) const {
    const auto& [lo, hi] = age_bands.at(band);
    if (band + 1 == age_bands.size()) return std::to_string(lo) + "+";
    return std::to_string(lo) + "-" + std::to_string(hi);
}

std::string CategoryScheme::cross_name(std::size_t band, std::size_t gender) const {
    return age_band_name(band) + "-" + genders.at(gender);
}

CategoryScheme default_scheme(std::vector<std::string> districts) {
    CategoryScheme scheme;
    scheme.age_bands = {{15, 24}, {25, 26}, {27, 28}, {29, 30},
                        {31, 33}, {34, 39}, {40, 49}, {50, 200}};
    scheme.genders = {'m', 'f'};
    std::sort(districts.begin(), districts.end());
    districts.erase(std::unique(districts.begin(), districts.end()), districts.end());
    scheme.districts = std::move(districts);
    return scheme;
}

std::size_t age_band_index(const CategoryScheme& scheme, int age) {
    for (std::size_t i = 0; i < scheme.age_bands.size(); ++i) {
        const auto& [lo, hi] = scheme.age_bands[i];
        if (age >= lo && (age <= hi || i + 1 == scheme.age_bands.size())) return i;
    }
    throw UnmappablePerson("age " + std::to_string(age) + " is outside the scheme");
}

std::size_t gender_index(const CategoryScheme& scheme, char gender) {
    const char g = gender == 'M' || gender == 'm' ? 'm' : 'f';
    for (std::size_t i = 0; i < scheme.genders.size(); ++i)
        if (scheme.genders[i] == g) return i;
    throw UnmappablePerson(std::string("gender '") + gender + "' is outside the scheme");
}

std::size_t district_index(const CategoryScheme& scheme, const std::string& district) {
    auto it = std::lower_bound(scheme.districts.begin(), scheme.districts.end(), district);
    if (it == scheme.districts.end() || *it != district)
        throw UnmappablePerson("district '" + district + "' is outside the scheme");
    return static_cast<std::size_t>(it - scheme.districts.begin());
}

namespace {

CellCounts zero_cells(const CategoryScheme& scheme) {
    CellCounts c;
    c.gender.assign(scheme.genders.size(), 0);
    c.age.assign(scheme.age_bands.size(), 0);
    c.age_gender.assign(scheme.cross_size(), 0);
    c.district.assign(scheme.districts.size(), 0);
    return c;
}

// flat cell coordinates of one person under a scheme
struct CellKey {
    std::size_t gender, age, cross, district;
};

CellKey key_of(const CategoryScheme& scheme, char gender, int age,
               const std::string& district) {
    CellKey k{};
    k.gender = gender_index(scheme, gender);
    k.age = age_band_index(scheme, age);
    k.cross = k.age * scheme.genders.size() + k.gender;
    k.district = district_index(scheme, district);
    return k;
}

void check_same_shape(const CellCounts& a, const CellCounts& b) {
    if (a.gender.size() != b.gender.size() || a.age.size() != b.age.size() ||
        a.age_gender.size() != b.age_gender.size() ||
        a.district.size() != b.district.size())
        throw SchemeMismatch("tabulations use different category schemes");
}

}  // namespace

std::vector<std::pair<std::string, ConstraintTable>> build_constraints(
    std::span<const SurveyPerson> persons, const CategoryScheme& scheme,
    const geo::ZoneRegistry& registry, bool commuter_split) {
    std::vector<std::pair<std::string, ConstraintTable>> tables;
    if (commuter_split) {
        tables.emplace_back("commuter", ConstraintTable{});
        tables.emplace_back("noncommuter", ConstraintTable{});
    } else {
        tables.emplace_back("all", ConstraintTable{});
    }

    std::unordered_map<std::string, std::size_t> zone_slot;
    for (auto& [name, table] : tables) {
        table.scheme = scheme;
        table.zones.reserve(registry.zones().size());
        for (const geo::Zone& z : registry.zones())
            table.zones.push_back(ZoneTargets{z.zone_id, zero_cells(scheme), 0});
    }
    for (std::size_t i = 0; i < registry.zones().size(); ++i)
        zone_slot[registry.zones()[i].zone_id] = i;

    for (const SurveyPerson& p : persons) {
        auto slot = zone_slot.find(p.home_zone);
        if (slot == zone_slot.end())
            throw geo::UnknownZone("survey person " + p.person_id +
                                   " lives in unknown zone " + p.home_zone);
        const CellKey k = key_of(scheme, p.gender, p.age, p.district);
        ConstraintTable& table =
            commuter_split ? tables[p.is_commuter ? 0 : 1].second : tables[0].second;
        ZoneTargets& z = table.zones[slot->second];
        ++z.cells.gender[k.gender];
        ++z.cells.age[k.age];
        ++z.cells.age_gender[k.cross];
        ++z.cells.district[k.district];
        ++z.population;
    }
    return tables;
}

CellCounts tabulate(std::span<const std::size_t> members,
                    std::span<const Candidate> pool, const CategoryScheme& scheme) {
    CellCounts counts = zero_cells(scheme);
    for (std::size_t idx : members) {
        const Candidate& c = pool[idx];
        const CellKey k = key_of(scheme, c.gender, c.age, c.home_district);
        ++counts.gender[k.gender];
        ++counts.age[k.age];
        ++counts.age_gender[k.cross];
        ++counts.district[k.district];
    }
    return counts;
}

long long tae_cells(const CellCounts& target, const CellCounts& achieved) {
    check_same_shape(target, achieved);
    long long total = 0;
    auto add = [&](const std::vector<int>& t, const std::vector<int>& e) {
        for (std::size_t i = 0; i < t.size(); ++i)
            total += std::llabs(static_cast<long long>(t[i]) - e[i]);
    };
    add(target.gender, achieved.gender);
    add(target.age, achieved.age);
    add(target.age_gender, achieved.age_gender);
    add(target.district, achieved.district);
    return total;
}

AnnealResult anneal_zone(std::span<const Candidate> pool, const ZoneTargets& targets,
                         const CategoryScheme& scheme, const AnnealConfig& schedule,
                         std::uint64_t rng_seed) {
    if (targets.population < 0) throw Error("anneal_zone: negative population target");
    if (targets.population > 0 && pool.empty())
        throw Error("anneal_zone: empty candidate pool for zone " + targets.zone_id);

    // cell keys once per candidate
    std::vector<CellKey> keys;
    keys.reserve(pool.size());
    for (const Candidate& c : pool)
        keys.push_back(key_of(scheme, c.gender, c.age, c.home_district));

    Rng rng(rng_seed);
    AnnealResult result;
    result.zone.zone_id = targets.zone_id;

    CellCounts achieved = zero_cells(scheme);
    check_same_shape(targets.cells, achieved);

    // |T - E| change from moving one person's cell by +1/-1
    long long tae = 0;
    auto apply = [&](const CellKey& k, int delta) {
        auto bump = [&](std::vector<int>& e, const std::vector<int>& t, std::size_t i) {
            tae -= std::llabs(static_cast<long long>(t[i]) - e[i]);
            e[i] += delta;
            tae += std::llabs(static_cast<long long>(t[i]) - e[i]);
        };
        bump(achieved.gender, targets.cells.gender, k.gender);
        bump(achieved.age, targets.cells.age, k.age);
        bump(achieved.age_gender, targets.cells.age_gender, k.cross);
        bump(achieved.district, targets.cells.district, k.district);
    };

    // baseline TAE with an empty zone is the sum of all targets
    tae = tae_cells(targets.cells, achieved);

    auto& members = result.zone.members;
    members.reserve(static_cast<std::size_t>(targets.population));
    for (int i = 0; i < targets.population; ++i) {
        const std::size_t idx = static_cast<std::size_t>(rng.bounded(pool.size()));
        members.push_back(idx);
        apply(keys[idx], +1);
    }

    result.trace.push_back(tae);
    if (!members.empty() && tae > 0) {
        double temperature = std::max(1.0, static_cast<double>(tae) / schedule.t0_divisor);
        for (std::size_t step = 0; step < schedule.steps; ++step) {
            const std::size_t pos = static_cast<std::size_t>(rng.bounded(members.size()));
            const std::size_t incoming = static_cast<std::size_t>(rng.bounded(pool.size()));
            const std::size_t outgoing = members[pos];

            const long long before = tae;
            apply(keys[outgoing], -1);
            apply(keys[incoming], +1);
            const long long delta = tae - before;

            bool accept = delta <= 0;
            if (!accept)
                accept = rng.uniform() < std::exp(-static_cast<double>(delta) / temperature);
            if (accept) {
                members[pos] = incoming;
            } else {
                apply(keys[incoming], -1);
                apply(keys[outgoing], +1);
            }
            temperature *= schedule.alpha;
            result.trace.push_back(tae);
            if (tae == 0) break;
        }
    }
    result.zone.tae = tae;
    return result;
}

namespace {

void accumulate_fit(const ConstraintTable& table, const std::vector<ZoneSynthesis>& zones,
                    std::span<const Candidate> pool, const std::string& stratum,
                    std::vector<FitRow>& fit, long long& total_tae) {
    CellCounts tae_acc = zero_cells(table.scheme);   // per-cell |T - E| sums
    CellCounts target_acc = zero_cells(table.scheme);
    auto add_abs = [](std::vector<int>& acc, const std::vector<int>& t,
                      const std::vector<int>& e) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(t[i] - e[i]);
    };
    auto add = [](std::vector<int>& acc, const std::vector<int>& t) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t[i];
    };
    for (std::size_t z = 0; z < table.zones.size(); ++z) {
        const CellCounts achieved = tabulate(zones[z].members, pool, table.scheme);
        add_abs(tae_acc.gender, table.zones[z].cells.gender, achieved.gender);
        add_abs(tae_acc.age, table.zones[z].cells.age, achieved.age);
        add_abs(tae_acc.age_gender, table.zones[z].cells.age_gender, achieved.age_gender);
        add_abs(tae_acc.district, table.zones[z].cells.district, achieved.district);
        add(target_acc.gender, table.zones[z].cells.gender);
        add(target_acc.age, table.zones[z].cells.age);
        add(target_acc.age_gender, table.zones[z].cells.age_gender);
        add(target_acc.district, table.zones[z].cells.district);
    }
    auto emit = [&](const std::string& name, const std::vector<int>& tae_cells_,
                    const std::vector<int>& target_cells) {
        long long tab_tae = 0, tab_n = 0;
        for (int v : tae_cells_) tab_tae += v;
        for (int v : target_cells) tab_n += v;
        FitRow row;
        row.stratum = stratum;
        row.tabulation = name;
        row.tae = tab_tae;
        row.cpe = tab_n > 0 ? static_cast<double>(tab_tae) / static_cast<double>(tab_n) * 100.0
                            : 0.0;
        fit.push_back(row);
        total_tae += tab_tae;
    };
    emit("district", tae_acc.district, target_acc.district);
    emit("age", tae_acc.age, target_acc.age);
    emit("gender", tae_acc.gender, target_acc.gender);
    emit("age_gender", tae_acc.age_gender, target_acc.age_gender);
}

}  // namespace

SyntheticPopulation synthesize(
    std::span<const Candidate> candidates,
    std::span<const std::pair<std::string, ConstraintTable>> constraints,
    const AnnealConfig& cfg) {
    if (constraints.empty()) throw Error("synthesize: no constraint tables");

    SyntheticPopulation population;
    population.scheme = constraints.front().second.scheme;

    for (const auto& [name, table] : constraints) {
        Stratum stratum;
        stratum.name = name;
        for (const Candidate& c : candidates) {
            if (name == "commuter" && !c.commuter) continue;
            if (name == "noncommuter" && c.commuter) continue;
            stratum.pool.push_back(c);
        }
        long long demand = 0;
        for (const ZoneTargets& z : table.zones) demand += z.population;
        if (demand > 0 && stratum.pool.empty()) {
            // a stratum the identification step left empty samples from the
            // whole microdata instead
            stratum.pool.assign(candidates.begin(), candidates.end());
        }
        if (demand > 0 && stratum.pool.empty())
            throw Error("synthesize: stratum '" + name + "' has no candidates");

        stratum.zones.resize(table.zones.size());
        auto* zones_out = &stratum.zones;
        const auto* pool = &stratum.pool;
        const CategoryScheme& scheme = table.scheme;
        parallel_for(table.zones.size(), [&, zones_out, pool](std::size_t i) {
            const std::uint64_t zone_seed =
                derive_seed(cfg.rng_seed, name + "/" + table.zones[i].zone_id);
            (*zones_out)[i] =
                anneal_zone(*pool, table.zones[i], scheme, cfg, zone_seed).zone;
        });
        population.strata.push_back(std::move(stratum));
    }

    population.total_tae = 0;
    for (std::size_t s = 0; s < population.strata.size(); ++s)
        accumulate_fit(constraints[s].second, population.strata[s].zones,
                       population.strata[s].pool, population.strata[s].name,
                       population.fit, population.total_tae);
    return population;
}

long long tae(const SyntheticPopulation& population,
              std::span<const std::pair<std::string, ConstraintTable>> constraints) {
    if (population.strata.size() != constraints.size())
        throw SchemeMismatch("tae: stratum count differs from constraint tables");
    long long total = 0;
    for (std::size_t s = 0; s < constraints.size(); ++s) {
        const auto& [name, table] = constraints[s];
        const Stratum& stratum = population.strata[s];
        if (stratum.name != name || stratum.zones.size() != table.zones.size())
            throw SchemeMismatch("tae: population does not match constraint tables");
        for (std::size_t z = 0; z < table.zones.size(); ++z)
            total += tae_cells(table.zones[z].cells,
                               tabulate(stratum.zones[z].members, stratum.pool,
                                        table.scheme));
    }
    return total;
}

std::vector<EnrichedClone> attach_mobility(
    const SyntheticPopulation& population,
    const std::map<std::string, ident::PersonPlaces>& places_by_person) {
    std::vector<EnrichedClone> clones;
    for (const Stratum& stratum : population.strata) {
        for (const ZoneSynthesis& zone : stratum.zones) {
            std::size_t seq = 0;
            for (std::size_t idx : zone.members) {
                const Candidate& c = stratum.pool[idx];
                auto it = places_by_person.find(c.person_id);
                if (it == places_by_person.end())
                    throw DanglingPersonId("no mobility record for person " + c.person_id);
                EnrichedClone clone;
                clone.clone_id =
                    stratum.name + "-" + zone.zone_id + "-" + std::to_string(seq++);
                clone.person_id = c.person_id;
                clone.zone_id = zone.zone_id;
                clone.gender = c.gender;
                clone.age = c.age;
                clone.district = c.home_district;
                clone.commuter = c.commuter;
                clone.places = &it->second;
                if (it->second.home && it->second.work)
                    clone.commute_km = geo::haversine_km(it->second.home->centroid,
                                                         it->second.work->centroid);
                clones.push_back(std::move(clone));
            }
        }
    }
    return clones;
}

// --- Kruskal-Wallis -------------------------------------------------------

double kruskal_wallis_h(const std::vector<std::vector<double>>& groups) {
    std::vector<std::vector<double>> nonempty;
    for (const auto& g : groups)
        if (!g.empty()) nonempty.push_back(g);
    if (nonempty.size() < 2)
        throw DegenerateGroups("kruskal_wallis_h: need >= 2 non-empty groups");

    struct Obs {
        double value;
        std::size_t group;
    };
    std::vector<Obs> pooled;
    for (std::size_t g = 0; g < nonempty.size(); ++g)
        for (double v : nonempty[g]) pooled.push_back(Obs{v, g});
    std::sort(pooled.begin(), pooled.end(),
              [](const Obs& a, const Obs& b) { return a.value < b.value; });

    const std::size_t n = pooled.size();
    std::vector<double> rank_sum(nonempty.size(), 0.0);
    double tie_sum = 0.0;  // sum of t^3 - t over tie runs
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].value == pooled[i].value) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) tie_sum += t * t * t - t;
        for (std::size_t k = i; k < j; ++k) rank_sum[pooled[k].group] += midrank;
        i = j;
    }

    const double dn = static_cast<double>(n);
    double h = 0.0;
    for (std::size_t g = 0; g < nonempty.size(); ++g)
        h += rank_sum[g] * rank_sum[g] / static_cast<double>(nonempty[g].size());
    h = 12.0 / (dn * (dn + 1.0)) * h - 3.0 * (dn + 1.0);

    const double correction = 1.0 - tie_sum / (dn * dn * dn - dn);
    if (correction <= 0.0) return 0.0;  // every observation tied
    return h / correction;
}

namespace {

// regularized incomplete gamma, series form (x < a + 1)
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// regularized upper incomplete gamma, continued fraction (x >= a + 1)
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double frac = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        frac *= delta;
        if (std::fabs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * frac;
}

}  // namespace

double chi_square_sf(double x, int df) {
    if (df < 1) throw Error("chi_square_sf: df must be >= 1");
    if (x <= 0.0) return 1.0;
    const double a = static_cast<double>(df) / 2.0;
    const double xx = x / 2.0;
    if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
    return gamma_q_cf(a, xx);
}

std::vector<KwResult> screen_attributes(std::span<const SurveyPerson> persons,
                                        std::span<const SurveyTrip> trips,
                                        const geo::ZoneRegistry& registry,
                                        const CategoryScheme& scheme,
                                        std::span<const std::string> attributes) {
    // first work trip per person defines the commute
    std::unordered_map<std::string, const SurveyTrip*> work_trip;
    for (const SurveyTrip& t : trips)
        if (t.purpose == TripPurpose::Work) work_trip.try_emplace(t.person_id, &t);

    struct Commuter {
        const SurveyPerson* person;
        double distance_km;
    };
    std::vector<Commuter> commuters;
    for (const SurveyPerson& p : persons) {
        auto it = work_trip.find(p.person_id);
        if (it == work_trip.end()) continue;
        const double d = geo::haversine_km(registry.at(p.home_zone).centroid,
                                           registry.at(it->second->dest_zone).centroid);
        commuters.push_back(Commuter{&p, d});
    }

    std::vector<KwResult> results;
    for (const std::string& attr : attributes) {
        std::vector<std::vector<double>> groups;
        if (attr == "gender") {
            groups.resize(scheme.genders.size());
            for (const Commuter& c : commuters)
                groups[gender_index(scheme, c.person->gender)].push_back(c.distance_km);
        } else if (attr == "age") {
            groups.resize(scheme.age_bands.size());
            for (const Commuter& c : commuters)
                groups[age_band_index(scheme, c.person->age)].push_back(c.distance_km);
        } else if (attr == "district") {
            groups.resize(scheme.districts.size());
            for (const Commuter& c : commuters)
                groups[district_index(scheme, c.person->district)].push_back(c.distance_km);
        } else {
            throw Error("screen_attributes: unknown attribute '" + attr + "'");
        }

        KwResult r;
        r.attribute = attr;
        for (const auto& g : groups)
            if (!g.empty()) {
                ++r.groups;
                r.n += g.size();
            }
        r.h = kruskal_wallis_h(groups);  // DegenerateGroups if < 2 non-empty
        r.p_value = r.groups >= 2 ? chi_square_sf(r.h, static_cast<int>(r.groups) - 1) : 1.0;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace mobiscape::popsynth
