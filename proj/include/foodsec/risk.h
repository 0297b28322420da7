#pragma once

#include "foodsec/types.h"

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace foodsec {

/// Sensitivity of the index to water stress: gamma = max(0, W_prev - threshold).
enum class GammaPerspective { zero, nc, lc, vc };

std::string to_string(GammaPerspective perspective);
GammaPerspective parse_perspective(const std::string &text);
/// 0.40 (NC), 0.20 (LC), 0.10 (VC); infinite for Zero.
double gamma_threshold(GammaPerspective perspective);
double gamma_value(double w_prev, GammaPerspective perspective);

enum class WaterStressClass { low, low_medium, medium_high, high, extremely_high };

std::string to_string(WaterStressClass c);
/// Bands at 0.10, 0.20, 0.40 and 0.80; a value on a boundary belongs to the higher band.
WaterStressClass classify_water_stress(double w);

/// [(1 / (1 + gamma)) C_R / Q_FSC + (gamma / (1 + gamma)) W] * 100; 100 W for infinite gamma.
double fsri(double requirement, double capacity, double w, double gamma);

struct RiskRow {
    int year{0};
    double mean{0.0};
    double q05{0.0};
    double q33{0.0};
    double q50{0.0};
    double q66{0.0};
    double q95{0.0};
    double gamma{0.0};
};

struct RiskAssessment {
    std::string mode;
    std::vector<RiskRow> rows;
    /// Per-trajectory index values (within-scenario only).
    ScalarTrajectories index;
    /// Per-trajectory gamma actually used (within-scenario only).
    ScalarTrajectories gamma;
    /// Convex risk per year when a finite uncertainty aversion was requested (across only).
    std::vector<double> rho;
};

/// Summary row of one sample: compensated mean and interpolated quantiles.
RiskRow summarize(int year, std::span<const double> sample, double gamma = 0.0);

/// Index per trajectory and year. Every set must share ids and years; gamma for the first year
/// uses w_initial, later years the same trajectory's previous-year water stress.
RiskAssessment within_scenario_risk(const ScalarTrajectories &requirement,
                                   const ScalarTrajectories &capacity,
                                   const ScalarTrajectories &water, double w_initial,
                                   GammaPerspective perspective, const std::string &label = "");

// ---------------------------------------------------------------------------------------------
// Across-scenario aggregation
// ---------------------------------------------------------------------------------------------

inline constexpr double kInfiniteTheta = std::numeric_limits<double>::infinity();

struct RiskMeasureConfig {
    std::vector<std::string> scenarios;
    std::vector<double> weights;
    /// Uncertainty aversion; infinity means the barycentric limit.
    double theta{kInfiniteTheta};
    std::size_t grid_size{1024};

    void validate() const;
    [[nodiscard]] double weight(const std::string &scenario) const;
};

enum class WeightPreset { ignorance, optimistic, pessimistic };

std::string to_string(WeightPreset preset);
WeightPreset parse_weight_preset(const std::string &text);
/// Expert credibility weights over the six SSP-RCP scenarios in canonical order.
RiskMeasureConfig preset_config(WeightPreset preset, double theta = kInfiniteTheta);

/// A discrete distribution: atoms with probabilities.
struct DiscreteMeasure {
    std::vector<double> values;
    std::vector<double> probabilities;
    [[nodiscard]] double mean() const;
};

/// Exact barycenter of empirical measures: quantile functions averaged over the union of their
/// breakpoints.
DiscreteMeasure wasserstein_barycenter_exact(std::span<const std::vector<double>> samples,
                                             std::span<const double> weights);

/// Barycenter quantile function sum_i w_i q_i(u) on the midpoints u = (k + 1/2) / m.
std::vector<double> wasserstein_barycenter_1d(std::span<const std::vector<double>> samples,
                                              std::span<const double> weights, std::size_t m);

/// sum_i w_i mean_i + 1 / (2 theta); the penalty vanishes for infinite theta.
double convex_risk(std::span<const std::vector<double>> samples, std::span<const double> weights,
                   double theta);

/// Per year: weighted mean of scenario means, weighted average of scenario quantiles and the
/// convex risk for finite theta. Scenarios missing from the input are an error unless
/// renormalize is set, in which case the remaining weights are rescaled to sum to one.
RiskAssessment across_scenario_risk(const std::map<std::string, RiskAssessment> &within,
                                    const RiskMeasureConfig &config, bool renormalize = false);

} // namespace foodsec
