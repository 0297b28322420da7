#include "foodsec/caloric.h"
#include "foodsec/parallel.h"
#include "foodsec/stats.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace foodsec {

std::string to_string(Activity activity) {
    switch (activity) {
    case Activity::not_active:
        return "NotActive";
    case Activity::somewhat_active:
        return "SomewhatActive";
    case Activity::very_active:
        return "VeryActive";
    }
    return "Unknown";
}

std::string to_string(Bound bound) {
    switch (bound) {
    case Bound::lower:
        return "lower";
    case Bound::upper:
        return "upper";
    case Bound::midpoint:
        return "midpoint";
    }
    return "unknown";
}

Activity parse_activity(const std::string &text) {
    for (auto a : {Activity::not_active, Activity::somewhat_active, Activity::very_active}) {
        if (text == to_string(a)) {
            return a;
        }
    }
    throw ValidationError("unknown activity '" + text + "'");
}

Bound parse_bound(const std::string &text) {
    for (auto b : {Bound::lower, Bound::upper, Bound::midpoint}) {
        if (text == to_string(b)) {
            return b;
        }
    }
    throw ValidationError("unknown bound '" + text + "'");
}

double CaloricBand::value(Bound bound) const noexcept {
    switch (bound) {
    case Bound::lower:
        return kcal_min;
    case Bound::upper:
        return kcal_max;
    case Bound::midpoint:
        return 0.5 * (kcal_min + kcal_max);
    }
    return kcal_min;
}

CaloricTable CaloricTable::standard() {
    struct Row {
        int lo, hi;
        double na_min, na_max, sa_min, sa_max, va_min, va_max;
    };
    static constexpr Row male[] = {
        {2, 3, 1000, 1200, 1000, 1400, 1000, 1400},
        {4, 8, 1200, 1400, 1400, 1600, 1600, 2000},
        {9, 13, 1600, 2000, 1800, 2200, 2000, 2600},
        {14, 18, 2000, 2400, 2400, 2800, 2800, 3200},
        {19, 30, 2400, 2600, 2600, 2800, 3000, 3000},
        {31, 50, 2200, 2400, 2400, 2600, 2800, 3000},
        {51, kOpenAge, 2000, 2200, 2200, 2400, 2400, 2800},
    };
    static constexpr Row female[] = {
        {2, 3, 1000, 1000, 1000, 1200, 1000, 1400},
        {4, 8, 1200, 1400, 1400, 1600, 1400, 1800},
        {9, 13, 1400, 1600, 1600, 2000, 1800, 2200},
        {14, 18, 1800, 1800, 2000, 2000, 2400, 2400},
        {19, 30, 1800, 2000, 2000, 2200, 2400, 2400},
        {31, 50, 1800, 1800, 2000, 2000, 2200, 2200},
        {51, kOpenAge, 1600, 1600, 1800, 1800, 2000, 2200},
    };
    CaloricTable t;
    for (auto [sex, rows] : {std::pair{Sex::male, std::span<const Row>(male)},
                             std::pair{Sex::female, std::span<const Row>(female)}}) {
        for (const auto &r : rows) {
            t.rows.push_back({sex, r.lo, r.hi, Activity::not_active, r.na_min, r.na_max});
            t.rows.push_back({sex, r.lo, r.hi, Activity::somewhat_active, r.sa_min, r.sa_max});
            t.rows.push_back({sex, r.lo, r.hi, Activity::very_active, r.va_min, r.va_max});
        }
    }
    return t;
}

int CaloricTable::first_age() const {
    if (rows.empty()) {
        throw ValidationError("caloric table is empty");
    }
    int first = rows.front().age_min;
    for (const auto &r : rows) {
        first = std::min(first, r.age_min);
    }
    return first;
}

void CaloricTable::validate() const {
    if (!(infant_kcal >= 0.0) || !std::isfinite(infant_kcal)) {
        throw ValidationError("infant calorie default must be non-negative");
    }
    const int first = first_age();
    if (first < 1) {
        throw ValidationError("caloric table must leave an infant band below its first age");
    }
    for (const auto &r : rows) {
        if (!(r.kcal_min >= 0.0) || !(r.kcal_min <= r.kcal_max)) {
            throw ValidationError(fmt::format("caloric band {}-{}: need 0 <= kcal_min <= kcal_max",
                                              r.age_min, r.age_max));
        }
        if (r.age_max != kOpenAge && r.age_max < r.age_min) {
            throw ValidationError(fmt::format("caloric band {}-{}: inverted ages", r.age_min, r.age_max));
        }
    }
    for (auto sex : {Sex::female, Sex::male}) {
        for (auto act : {Activity::not_active, Activity::somewhat_active, Activity::very_active}) {
            std::vector<const CaloricBand *> bands;
            for (const auto &r : rows) {
                if (r.sex == sex && r.activity == act) {
                    bands.push_back(&r);
                }
            }
            std::sort(bands.begin(), bands.end(),
                      [](const CaloricBand *a, const CaloricBand *b) { return a->age_min < b->age_min; });
            const auto label = fmt::format("{} {}", sex == Sex::female ? "female" : "male", to_string(act));
            if (bands.empty() || bands.front()->age_min != first) {
                throw ValidationError(fmt::format("caloric table: {} does not start at age {}", label, first));
            }
            for (std::size_t i = 0; i + 1 < bands.size(); ++i) {
                if (bands[i]->age_max == kOpenAge || bands[i]->age_max + 1 != bands[i + 1]->age_min) {
                    throw ValidationError(fmt::format(
                        "caloric table: {} bands overlap or leave a gap after age {}", label,
                        bands[i]->age_min));
                }
            }
            if (bands.back()->age_max != kOpenAge) {
                throw ValidationError(fmt::format("caloric table: {} has no open-ended top band", label));
            }
        }
    }
}

const CaloricBand &CaloricTable::band(Sex sex, Activity activity, int age) const {
    for (const auto &r : rows) {
        if (r.sex == sex && r.activity == activity && r.contains(age)) {
            return r;
        }
    }
    throw ValidationError(fmt::format("caloric table has no {} {} band for age {}",
                                      sex == Sex::female ? "female" : "male", to_string(activity), age));
}

namespace {

std::vector<AgeBand> caloric_bands(const CaloricTable &table) {
    std::set<std::pair<int, int>> seen;
    for (const auto &r : table.rows) {
        seen.insert({r.age_min, r.age_max});
    }
    std::vector<AgeBand> out{{0, table.first_age() - 1}};
    for (const auto &[lo, hi] : seen) {
        out.push_back({lo, hi});
    }
    return out;
}

bool in_band(const AgeBand &b, int age) {
    return age >= b.age_min && (b.age_max == kOpenAge || age <= b.age_max);
}

// Sum over caloric bands of band population times a per-band kcal value.
double weighted_requirement(const AgeSexPyramid &pyramid, const CaloricTable &table,
                            Activity activity, Bound bound) {
    CompensatedSum total;
    for (auto sex : {Sex::female, Sex::male}) {
        const auto &counts = pyramid.counts(sex);
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            if (counts[a] == 0.0) {
                continue;
            }
            const int start = kPeriodYears * static_cast<int>(a);
            for (int age = start; age < start + kPeriodYears; ++age) {
                const double kcal = age < table.first_age()
                                        ? table.infant_kcal
                                        : table.band(sex, activity, age).value(bound);
                total.add(kcal * counts[a] / kPeriodYears);
            }
        }
    }
    return total.value() * 1000.0;
}

} // namespace

CaloricGroupCounts map_pyramid_to_caloric_groups(const AgeSexPyramid &pyramid,
                                                 const CaloricTable &table) {
    pyramid.validate();
    CaloricGroupCounts out;
    out.bands = caloric_bands(table);
    out.female.assign(out.bands.size(), 0.0);
    out.male.assign(out.bands.size(), 0.0);
    for (auto sex : {Sex::female, Sex::male}) {
        auto &dest = sex == Sex::female ? out.female : out.male;
        const auto &counts = pyramid.counts(sex);
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            const int start = kPeriodYears * static_cast<int>(a);
            for (std::size_t b = 0; b < out.bands.size(); ++b) {
                int shared = 0;
                for (int age = start; age < start + kPeriodYears; ++age) {
                    shared += in_band(out.bands[b], age) ? 1 : 0;
                }
                dest[b] += counts[a] * shared / kPeriodYears;
            }
        }
    }
    return out;
}

double caloric_requirement(const AgeSexPyramid &pyramid, const CaloricTable &table,
                           Activity activity, Bound bound) {
    return weighted_requirement(pyramid, table, activity, bound);
}

RequirementEstimate min_caloric_requirement(const AgeSexPyramid &pyramid, const CaloricTable &table,
                                            Activity activity, Bound bound) {
    pyramid.validate();
    RequirementEstimate r;
    r.country = pyramid.country;
    r.year = pyramid.year;
    r.kcal_per_day_lower = weighted_requirement(pyramid, table, Activity::not_active, Bound::lower);
    r.kcal_per_day_upper = weighted_requirement(pyramid, table, Activity::very_active, Bound::upper);
    r.kcal_per_day_point = weighted_requirement(pyramid, table, activity, bound);
    r.basis = to_string(activity) + "/" + to_string(bound);
    return r;
}

TrajectorySet<RequirementEstimate>
requirement_trajectories(const TrajectorySet<AgeSexPyramid> &pyramids, const CaloricTable &table,
                         Activity activity, Bound bound) {
    table.validate();
    TrajectorySet<RequirementEstimate> out;
    out.years = pyramids.years;
    out.ids = pyramids.ids;
    out.paths.resize(pyramids.paths.size());
    parallel_for(pyramids.paths.size(), [&](std::size_t j) {
        auto &path = out.paths[j];
        path.reserve(pyramids.paths[j].size());
        for (const auto &p : pyramids.paths[j]) {
            path.push_back(min_caloric_requirement(p, table, activity, bound));
        }
    });
    return out;
}

ScalarTrajectories point_requirements(const TrajectorySet<RequirementEstimate> &set) {
    ScalarTrajectories out;
    out.years = set.years;
    out.ids = set.ids;
    for (const auto &path : set.paths) {
        std::vector<double> v;
        v.reserve(path.size());
        for (const auto &r : path) {
            v.push_back(r.kcal_per_day_point);
        }
        out.paths.push_back(std::move(v));
    }
    return out;
}

} // namespace foodsec
