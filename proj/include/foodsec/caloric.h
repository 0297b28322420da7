#pragma once

#include "foodsec/types.h"

#include <string>
#include <vector>

namespace foodsec {

enum class Activity { not_active, somewhat_active, very_active };
enum class Bound { lower, upper, midpoint };

std::string to_string(Activity activity);
std::string to_string(Bound bound);
Activity parse_activity(const std::string &text);
Bound parse_bound(const std::string &text);

inline constexpr int kOpenAge = -1;

/// Daily calorie range for one sex, age band and activity level. age_max == kOpenAge marks an
/// open-ended band.
struct CaloricBand {
    Sex sex{Sex::female};
    int age_min{0};
    int age_max{0};
    Activity activity{Activity::not_active};
    double kcal_min{0.0};
    double kcal_max{0.0};

    [[nodiscard]] bool contains(int age) const noexcept {
        return age >= age_min && (age_max == kOpenAge || age <= age_max);
    }
    [[nodiscard]] double value(Bound bound) const noexcept;
};

struct CaloricTable {
    std::vector<CaloricBand> rows;
    /// Daily intake assigned to ages below the first tabulated band.
    double infant_kcal{800.0};

    /// Dietary-guideline calorie needs for ages 2 and up, by sex and activity level.
    static CaloricTable standard();

    /// Checks ranges, overlaps and coverage of every age from the first band upwards.
    void validate() const;
    [[nodiscard]] int first_age() const;
    /// The band covering one single age; throws ValidationError if absent.
    [[nodiscard]] const CaloricBand &band(Sex sex, Activity activity, int age) const;
};

struct AgeBand {
    int age_min{0};
    int age_max{0}; // kOpenAge for the open band
};

/// Pyramid counts redistributed onto caloric age bands, assuming ages are uniform within each
/// five-year group. Band 0 is the infant band below the first tabulated age.
struct CaloricGroupCounts {
    std::vector<AgeBand> bands;
    std::vector<double> female;
    std::vector<double> male;
};

CaloricGroupCounts map_pyramid_to_caloric_groups(const AgeSexPyramid &pyramid,
                                                 const CaloricTable &table = CaloricTable::standard());

struct RequirementEstimate {
    std::string country;
    int year{0};
    double kcal_per_day_lower{0.0};
    double kcal_per_day_upper{0.0};
    double kcal_per_day_point{0.0};
    std::string basis;
};

/// Total daily calories sum_a R_a P_a over both sexes (counts in thousands).
/// The point estimate uses the given activity and bound; lower uses the smallest non-active
/// values and upper the largest very-active values.
RequirementEstimate min_caloric_requirement(const AgeSexPyramid &pyramid, const CaloricTable &table,
                                            Activity activity = Activity::somewhat_active,
                                            Bound bound = Bound::midpoint);

/// Single requirement value for one activity and bound.
double caloric_requirement(const AgeSexPyramid &pyramid, const CaloricTable &table,
                           Activity activity, Bound bound);

TrajectorySet<RequirementEstimate>
requirement_trajectories(const TrajectorySet<AgeSexPyramid> &pyramids, const CaloricTable &table,
                         Activity activity = Activity::somewhat_active,
                         Bound bound = Bound::midpoint);

/// The point estimates of a requirement trajectory set.
ScalarTrajectories point_requirements(const TrajectorySet<RequirementEstimate> &set);

} // namespace foodsec
