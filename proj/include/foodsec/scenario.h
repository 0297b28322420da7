#pragma once

#include "foodsec/types.h"

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace foodsec {

// ---------------------------------------------------------------------------------------------
// Quantile sub-scenarios
// ---------------------------------------------------------------------------------------------

/// Probabilities splitting a terminal-year sample into Low / Medium / High.
struct QuantileRule {
    double q_lo{1.0 / 3.0};
    double q_hi{2.0 / 3.0};

    void validate() const;
};

/// Interpolated quantile values q(q_lo), q(q_hi) of one sample.
struct LevelThresholds {
    double lo{0.0};
    double hi{0.0};
};

LevelThresholds level_thresholds(std::span<const double> values, const QuantileRule &rule);

/// High iff v >= hi, Low iff v < lo, Medium otherwise.
Level classify_value(double v, const LevelThresholds &thresholds);

/// Classifies every value against the quantiles of the sample itself.
///
/// Comparisons are made against the order statistic equivalent to each interpolated quantile,
/// so the result is the same as classify_value with level_thresholds, but depends only on ranks.
std::vector<Level> classify_level(std::span<const double> values, const QuantileRule &rule = {});

struct LevelCounts {
    std::size_t low{0};
    std::size_t medium{0};
    std::size_t high{0};
};

LevelCounts count_levels(std::span<const Level> levels);

// ---------------------------------------------------------------------------------------------
// SSP narratives
// ---------------------------------------------------------------------------------------------

enum class CountryGroup { hi_fert, lo_fert, rich_oecd };
enum class Ssp { ssp1 = 1, ssp2, ssp3, ssp4, ssp5 };

inline constexpr std::array<Ssp, 5> kAllSsps{Ssp::ssp1, Ssp::ssp2, Ssp::ssp3, Ssp::ssp4, Ssp::ssp5};

std::string to_string(CountryGroup group);
std::string to_string(Ssp ssp);
CountryGroup parse_country_group(const std::string &text);
Ssp parse_ssp(const std::string &text);

struct LevelCell {
    Level tfr{Level::medium};
    Level e0{Level::medium};
    Level migration{Level::medium};
};

/// Fertility, life expectancy and migration level per (country group, SSP).
struct ScenarioDefinition {
    std::map<CountryGroup, std::map<Ssp, LevelCell>> cells;

    /// The standard SSP narrative mapping.
    static ScenarioDefinition standard();
    /// Parses {"HiFert": {"SSP1": {"tfr_level": "Low", "e0_level": "High", "mig_level": "Medium"}}}.
    static ScenarioDefinition from_json(const std::string &text);
    [[nodiscard]] std::string to_json() const;

    [[nodiscard]] const LevelCell &cell(CountryGroup group, Ssp ssp) const;
};

/// Trajectories whose (TFR, e0) levels match one SSP cell, plus its migration level.
struct SspMembers {
    Ssp ssp{Ssp::ssp2};
    LevelCell cell;
    std::vector<std::uint64_t> ids;
    std::vector<std::string> diagnostics;
};

SspMembers compose_ssp_scenario(Ssp ssp, CountryGroup group, std::span<const std::uint64_t> ids,
                                std::span<const Level> tfr_levels,
                                std::span<const Level> e0_levels,
                                const ScenarioDefinition &definition = ScenarioDefinition::standard());

// ---------------------------------------------------------------------------------------------
// Economic and climate drivers
// ---------------------------------------------------------------------------------------------

struct MaGEInputs {
    double A_tfp{1.0};
    double B_energy{1.0};
    double K_capital{1.0};
    double L_labour{1.0};
    double E_energy{1.0};
    double alpha{0.31};
    double sigma{0.136};

    void validate() const;
};

/// Three-factor CES output {(A K^a L^(1-a))^r + (B E)^r}^(1/r), r = (sigma - 1) / sigma.
double ces_output(const MaGEInputs &inputs);

struct CappedPath {
    std::vector<double> values;
    std::vector<bool> capped;
    [[nodiscard]] std::size_t capped_count() const;
};

CappedPath cap_land_projection(std::span<const double> raw, double cap);

struct SspRcpSpec {
    const char *name;
    Ssp ssp;
    const char *rcp;
};

/// The six combined scenarios in canonical order.
inline constexpr std::array<SspRcpSpec, 6> kSspRcpScenarios{{
    {"SSP1-1.9", Ssp::ssp1, "RCP1.9"},
    {"SSP1-2.6", Ssp::ssp1, "RCP2.6"},
    {"SSP2-4.5", Ssp::ssp2, "RCP4.5"},
    {"SSP3-7.0", Ssp::ssp3, "RCP7.0"},
    {"SSP4-6.0", Ssp::ssp4, "RCP6.0"},
    {"SSP5-8.5", Ssp::ssp5, "RCP8.5"},
}};

std::vector<std::string> ssp_rcp_names();

/// Annual deterministic driver paths; NaN marks a missing value.
struct DriverPath {
    std::vector<int> years;
    std::vector<double> gdp_per_capita;
    std::vector<double> labour;
    std::vector<double> temperature;
    std::vector<double> precipitation;

    [[nodiscard]] std::size_t index(int year) const;
    /// Restriction to [first, last]; throws if not covered.
    [[nodiscard]] DriverPath window(int first, int last) const;
};

/// Driver paths per SSP-RCP scenario name.
struct DriverTable {
    std::string country;
    std::map<std::string, DriverPath> by_scenario;
};

struct SspRcpScenario {
    std::string name;
    Ssp ssp{Ssp::ssp2};
    std::string rcp;
    Level migration_level{Level::medium};
    std::vector<std::uint64_t> member_ids;
    DriverPath drivers;
};

/// Joins SSP population memberships with driver paths covering [first_year, last_year].
/// Any missing scenario, year or driver value is collected and reported in a single error.
std::vector<SspRcpScenario> assemble_ssp_rcp(const std::map<Ssp, SspMembers> &members,
                                             const DriverTable &drivers, int first_year,
                                             int last_year);

/// Per-year arithmetic mean over the given member trajectories (all when ids is empty).
std::vector<double> conditional_mean_path(const ScalarTrajectories &set,
                                          std::span<const std::uint64_t> ids = {});

/// Subset of a trajectory set restricted to the given ids (kept in ascending id order).
template <typename T>
TrajectorySet<T> select_trajectories(const TrajectorySet<T> &set,
                                     std::span<const std::uint64_t> ids) {
    TrajectorySet<T> out;
    out.years = set.years;
    std::vector<std::uint64_t> wanted(ids.begin(), ids.end());
    std::sort(wanted.begin(), wanted.end());
    for (std::size_t j = 0; j < set.ids.size(); ++j) {
        if (std::binary_search(wanted.begin(), wanted.end(), set.ids[j])) {
            out.ids.push_back(set.ids[j]);
            out.paths.push_back(set.paths[j]);
        }
    }
    if (out.ids.size() != wanted.size()) {
        throw ValidationError("trajectory selection names ids absent from the set");
    }
    return out;
}

} // namespace foodsec
