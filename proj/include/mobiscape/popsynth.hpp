#ifndef MOBISCAPE_POPSYNTH_HPP
#define MOBISCAPE_POPSYNTH_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mobiscape/errors.hpp"
#include "mobiscape/geo.hpp"
#include "mobiscape/ingest.hpp"
#include "mobiscape/location_id.hpp"

namespace mobiscape::popsynth {

MOBISCAPE_DEFINE_ERROR(DegenerateGroups);
MOBISCAPE_DEFINE_ERROR(UnmappablePerson);
MOBISCAPE_DEFINE_ERROR(SchemeMismatch);
MOBISCAPE_DEFINE_ERROR(DanglingPersonId);

// Constraint categories: gender, age bands, age-by-gender, home district.
struct CategoryScheme {
    // inclusive [lo, hi]; the last band is open-ended
    std::vector<std::pair<int, int>> age_bands;
    std::vector<char> genders;          // {'m', 'f'}
    std::vector<std::string> districts; // sorted levels

    std::size_t cross_size() const { return age_bands.size() * genders.size(); }
    std::string age_band_name(std::size_t band) const;
    std::string cross_name(std::size_t band, std::size_t gender) const;
};

// The stock eight bands starting at age 15: 15-24, 25-26, 27-28, 29-30,
// 31-33, 34-39, 40-49, 50+.
CategoryScheme default_scheme(std::vector<std::string> districts);

// Throws UnmappablePerson for ages below the scheme floor.
std::size_t age_band_index(const CategoryScheme& scheme, int age);
std::size_t gender_index(const CategoryScheme& scheme, char gender);
std::size_t district_index(const CategoryScheme& scheme, const std::string& district);

// Counts for one zone across the four tabulations.
struct CellCounts {
    std::vector<int> gender;
    std::vector<int> age;
    std::vector<int> age_gender;
    std::vector<int> district;
};

struct ZoneTargets {
    std::string zone_id;
    CellCounts cells;
    int population = 0;
};

struct ConstraintTable {
    CategoryScheme scheme;
    std::vector<ZoneTargets> zones;  // zone_id order
};

// Per-stratum tables; first entry is "commuter", second "noncommuter" when
// commuter_split is set, otherwise a single "all" table.
std::vector<std::pair<std::string, ConstraintTable>> build_constraints(
    std::span<const ingest::SurveyPerson> persons, const CategoryScheme& scheme,
    const geo::ZoneRegistry& registry, bool commuter_split = true);

// A sample person eligible for cloning. Age and gender must be known; the
// home district/zone come from the identified home location.
struct Candidate {
    std::string person_id;
    char gender = 'M';
    int age = 0;
    std::string home_district;
    std::string home_zone;
    bool commuter = false;
};

CellCounts tabulate(std::span<const std::size_t> members,
                    std::span<const Candidate> pool, const CategoryScheme& scheme);

// Sum of |target - achieved| across every cell of all four tabulations.
long long tae_cells(const CellCounts& target, const CellCounts& achieved);

struct ZoneSynthesis {
    std::string zone_id;
    std::vector<std::size_t> members;  // indices into the stratum pool; clones allowed
    long long tae = 0;
};

struct AnnealConfig {
    std::size_t steps = 50000;  // per zone
    double alpha = 0.999;       // geometric cooling per step
    double t0_divisor = 10.0;   // T0 = max(1, initial TAE / t0_divisor)
    std::uint64_t rng_seed = 0; // master seed; zones derive their own
};

struct AnnealResult {
    ZoneSynthesis zone;
    std::vector<long long> trace;  // TAE after each step, starting at the initial
};

// Fills the zone to its population target by uniform sampling with
// replacement, then proposes single-member swaps: downhill moves always
// accepted, uphill with probability exp(-dTAE/T) under geometric cooling.
// Stops at TAE = 0 or after the step budget.
AnnealResult anneal_zone(std::span<const Candidate> pool, const ZoneTargets& targets,
                         const CategoryScheme& scheme, const AnnealConfig& schedule,
                         std::uint64_t rng_seed);

struct FitRow {
    std::string stratum;
    std::string tabulation;  // district / age / gender / age_gender
    long long tae = 0;
    double cpe = 0.0;        // TAE / total target population of the tabulation * 100
};

struct Stratum {
    std::string name;  // "commuter" / "noncommuter" / "all"
    std::vector<Candidate> pool;
    std::vector<ZoneSynthesis> zones;
};

struct SyntheticPopulation {
    CategoryScheme scheme;
    std::vector<Stratum> strata;
    long long total_tae = 0;
    std::vector<FitRow> fit;
};

// Anneals every zone of every stratum. The "commuter"/"noncommuter" strata
// draw from the matching partition of the candidates; an "all" stratum draws
// from everyone. Zones are independent problems; per-zone seeds derive from
// (seed, stratum, zone_id), so parallel and serial runs produce identical
// output.
SyntheticPopulation synthesize(std::span<const Candidate> candidates,
                               std::span<const std::pair<std::string, ConstraintTable>> constraints,
                               const AnnealConfig& cfg);

// Recomputes the global TAE of a population from scratch.
long long tae(const SyntheticPopulation& population,
              std::span<const std::pair<std::string, ConstraintTable>> constraints);

struct EnrichedClone {
    std::string clone_id;
    std::string person_id;
    std::string zone_id;
    char gender = 'M';
    int age = 0;
    std::string district;
    bool commuter = false;
    std::optional<double> commute_km;
    const ident::PersonPlaces* places = nullptr;
};

// Attaches each clone's source mobility by person id; commuters report their
// home-to-work great-circle distance.
std::vector<EnrichedClone> attach_mobility(
    const SyntheticPopulation& population,
    const std::map<std::string, ident::PersonPlaces>& places_by_person);

// --- attribute screening -------------------------------------------------

// Tie-corrected Kruskal-Wallis H over >= 2 non-empty groups.
double kruskal_wallis_h(const std::vector<std::vector<double>>& groups);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, int df);

struct KwResult {
    std::string attribute;
    double h = 0.0;
    double p_value = 1.0;
    std::size_t groups = 0;
    std::size_t n = 0;
};

// Kruskal-Wallis screening of commuting distance against person attributes
// ("gender", "age", "district"). Distances are measured between the home-zone
// centroid and the first work trip's destination-zone centroid.
std::vector<KwResult> screen_attributes(std::span<const ingest::SurveyPerson> persons,
                                        std::span<const ingest::SurveyTrip> trips,
                                        const geo::ZoneRegistry& registry,
                                        const CategoryScheme& scheme,
                                        std::span<const std::string> attributes);

}  // namespace mobiscape::popsynth

#endif
