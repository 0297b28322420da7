#pragma once

#include "foodsec/types.h"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace foodsec {

// ---------------------------------------------------------------------------------------------
// Vital-rate dynamics
// ---------------------------------------------------------------------------------------------

/// Product-of-logistics increment d * s((x - l) / w1) * s((u - x) / w2), s(z) = 1 / (1 + e^-z).
struct DoubleLogistic {
    double d{0.0};
    double l{0.0};
    double u{1.0};
    double w1{1.0};
    double w2{1.0};

    void validate(const char *name) const;
};

double double_logistic(double x, const DoubleLogistic &theta);

/// Female-minus-male life expectancy gap: constant mean plus Gaussian noise.
struct GapModel {
    double mean{0.0};
    double var{0.0};
};

inline constexpr std::size_t kFirstFertileGroup = 3; // 15-19
inline constexpr std::size_t kFertileGroups = 7;     // 15-19 ... 45-49
inline constexpr double kTfrMin = 0.5;
inline constexpr double kTfrMax = 10.0;
inline constexpr double kE0Min = 20.0;
inline constexpr double kE0Max = 110.0;

struct VitalParams {
    DoubleLogistic theta_tfr;
    DoubleLogistic theta_e0;
    double var_tfr{0.0};
    double var_e0{0.0};
    GapModel e0_gap;
    /// Per-year fertility proportions h_a for 15-19 ... 45-49; sum of 5 h_a is one.
    std::array<double, kFertileGroups> fertility_schedule{};
    /// Males per female birth.
    double srb{1.05};
    double start_tfr{2.0};
    double start_e0_f{75.0};

    void validate() const;
};

/// One simulated realization of the vital rates; index 0 is the starting value, index k the
/// value driving period k - 1 -> k.
struct VitalPath {
    std::uint64_t trajectory_id{0};
    std::vector<double> tfr;
    std::vector<double> e0_f;
    std::vector<double> e0_m;
};

struct VitalPathSet {
    int base_year{0};
    std::vector<VitalPath> paths; // ascending trajectory id

    [[nodiscard]] std::vector<int> years() const;
    [[nodiscard]] ScalarTrajectories tfr() const;
    [[nodiscard]] ScalarTrajectories e0_female() const;
    [[nodiscard]] ScalarTrajectories e0_male() const;
    [[nodiscard]] const VitalPath &find(std::uint64_t id) const;
};

/// f_{k+1} = clamp(f_k - g2(f_k) + eta, 0.5, 10), eta ~ N(0, var_tfr).
std::vector<double> tfr_path(double start_tfr, const VitalParams &params, int horizon,
                             std::uint64_t master_seed, std::uint64_t trajectory_id);

/// Female e0 path e_{k+1} = clamp(e_k + g1(e_k) + eta, 20, 110) and male path e_f - gap_k with
/// gap_k = gap mean + noise, clamped at zero.
std::pair<std::vector<double>, std::vector<double>> e0_paths(double start_e0_f,
                                                             const VitalParams &params,
                                                             int horizon,
                                                             std::uint64_t master_seed,
                                                             std::uint64_t trajectory_id);

/// Trajectory ids are 1..n. Years run base_year, base_year + 5, ... over horizon periods.
ScalarTrajectories simulate_tfr_paths(double start_tfr, const VitalParams &params, int horizon,
                                      std::size_t n, std::uint64_t seed, int base_year = 0);

struct E0Trajectories {
    ScalarTrajectories female;
    ScalarTrajectories male;
};

E0Trajectories simulate_e0_paths(double start_e0_f, const VitalParams &params, int horizon,
                                 std::size_t n, std::uint64_t seed, int base_year = 0);

VitalPathSet simulate_vital_paths(const VitalParams &params, int base_year, int horizon,
                                  std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------
// Mortality
// ---------------------------------------------------------------------------------------------

/// Gompertz-Makeham hazard mu(x) = gamma0 + alpha * exp(beta x) with fixed gamma0 and beta.
struct GompertzMakeham {
    static constexpr double gamma0 = 0.001;
    static constexpr double beta = 0.09;

    double alpha{1e-4};

    [[nodiscard]] double cumulative_hazard(double age) const noexcept;
    [[nodiscard]] double survival(double age) const noexcept;
    /// Age beyond which survival is below exp(-60).
    [[nodiscard]] double terminal_age() const noexcept;
};

/// Five-year survival ratios for cohort projection.
///
/// survival[a] for a < 19 is 5L_{a+1} / 5L_a (moving group a into a + 1); survival[19] is
/// T_100 / T_95 (moving 95-99 into 100+); survival[20] is T_105 / T_100 (remaining in 100+).
/// birth_survival is 5L_0 / (5 l_0), the share of a period's births alive in 0-4 at period end.
struct LifeTable {
    double e0{0.0};
    double alpha{0.0};
    AgeVector survival{};
    double birth_survival{1.0};
    /// 5L_a for the 20 closed groups and T_100 in the last slot (l_0 = 1).
    AgeVector person_years{};
};

/// Life expectancy at birth implied by a Gompertz-Makeham level alpha.
double gompertz_makeham_e0(double alpha);

LifeTable life_table_from_alpha(double alpha);

/// Solves alpha by bracketed false position on log(alpha) so that e0 matches the target within 1e-6 years.
/// The hazard shape is shared by both sexes; sex only labels the request.
/// Throws ValidationError outside [20, 110] and NumericalError if the target cannot be bracketed.
LifeTable life_table_from_e0(double e0_target, Sex sex);

/// Survival identically one; used to check conservation in projection tests.
LifeTable immortal_life_table();

// ---------------------------------------------------------------------------------------------
// Migration
// ---------------------------------------------------------------------------------------------

/// Age-sex distribution of net migrants; the 42 weights sum to one.
struct MigrationSplit {
    AgeVector female{};
    AgeVector male{};

    void validate() const;
    /// Working-age profile: 15-39 weighted 0.10/0.25/0.30/0.20/0.15, half per sex.
    static MigrationSplit standard();
};

/// Deterministic net migration (thousands per five-year period) per migration level.
struct MigrationSchedule {
    std::string country;
    std::map<Level, std::map<int, double>> net_by_period;
    MigrationSplit split = MigrationSplit::standard();

    /// Net migration for the horizon periods starting at base_year; missing periods are an error.
    [[nodiscard]] std::vector<double> series(Level level, int base_year, int horizon) const;
};

// ---------------------------------------------------------------------------------------------
// Cohort-component projection
// ---------------------------------------------------------------------------------------------

struct StepAccounting {
    double births{0.0};
    double deaths{0.0};
    /// Migration actually applied: requested net migration plus any mass added back by clamping.
    double migration{0.0};
    double requested_migration{0.0};
    bool clamped{false};
    double clamped_mass{0.0};
};

struct CohortStep {
    AgeSexPyramid next;
    StepAccounting accounting;
};

/// One five-year step: survive cohorts, add births from start-of-period women, add migrants.
/// Negative counts after migration are clamped to zero and flagged.
CohortStep project_cohorts(const AgeSexPyramid &pyramid, double tfr, const LifeTable &female,
                           const LifeTable &male, double net_migration,
                           const VitalParams &params, const MigrationSplit &split);

CohortStep project_cohorts(const AgeSexPyramid &pyramid, double tfr, double e0_f, double e0_m,
                           double net_migration, const VitalParams &params,
                           const MigrationSplit &split);

struct PopulationTrajectories {
    TrajectorySet<AgeSexPyramid> pyramids;
    /// accounting[j][k] describes the step from pyramids.years[k] to pyramids.years[k + 1].
    std::vector<std::vector<StepAccounting>> accounting;
    std::size_t clamp_events{0};
};

/// Projects the given trajectories (all when ids is empty) from the base pyramid using their
/// vital paths and a per-period net migration series.
PopulationTrajectories project_population(const AgeSexPyramid &base, const VitalPathSet &vitals,
                                          std::span<const double> migration,
                                          const VitalParams &params, const MigrationSplit &split,
                                          std::span<const std::uint64_t> ids = {});

PopulationTrajectories generate_population_trajectories(const AgeSexPyramid &base,
                                                        const VitalParams &params,
                                                        std::span<const double> migration,
                                                        const MigrationSplit &split, int horizon,
                                                        std::size_t n, std::uint64_t seed);

/// Linear interpolation of five-year pyramids to every calendar year in the covered range.
TrajectorySet<AgeSexPyramid> interpolate_annual(const TrajectorySet<AgeSexPyramid> &pyramids);

ScalarTrajectories total_population(const TrajectorySet<AgeSexPyramid> &pyramids);

} // namespace foodsec
