#pragma once

#include "foodsec/scenario.h"
#include "foodsec/types.h"

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace foodsec {

/// Modelled quantities. FSC is per-capita food supply (kcal/capita/day); Dom, Exp, Imp are food
/// quantities; W is water stress as a fraction; Land is agricultural area; LAgr is the
/// agricultural share of total labour in percent.
enum class Target { fsc, dom, w, land, exp, imp, lagr };

inline constexpr std::array<Target, 7> kAllTargets{Target::fsc, Target::dom,  Target::w,
                                                   Target::land, Target::exp, Target::imp,
                                                   Target::lagr};

std::string to_string(Target target);
Target parse_target(const std::string &text);

/// Predictor names: P, GDP, Ltot, LAgr, Exp, Imp, Dom, W, Land, T, Pr.
struct PredictorSpec {
    std::string name;
    int lag{0};
};

/// Predictors of each log-linear equation, in coefficient order.
std::vector<PredictorSpec> standard_predictors(Target target);

/// ln y = ln a0 + trend * t + sum_j exponents[j] * ln x_j, with t = year - trend origin.
struct EquationSpec {
    Target target{Target::fsc};
    std::vector<PredictorSpec> predictors;
    double a0{1.0};
    double trend{0.0};
    std::vector<double> exponents;
    double r2{std::numeric_limits<double>::quiet_NaN()};
    double lambda{std::numeric_limits<double>::quiet_NaN()};

    [[nodiscard]] double exponent(const std::string &name) const;
    /// Evaluates the power law; values are in predictor order and must be positive.
    [[nodiscard]] double evaluate(double t, std::span<const double> values) const;
    /// Same in logs: returns ln y given ln x.
    [[nodiscard]] double evaluate_log(double t, std::span<const double> log_values) const;
};

struct TwoLayerModel {
    std::string country;
    int trend_origin_year{1989};
    std::array<EquationSpec, kAllTargets.size()> equations;

    [[nodiscard]] const EquationSpec &eq(Target target) const;
    EquationSpec &eq(Target target);
    [[nodiscard]] double t(int year) const { return static_cast<double>(year - trend_origin_year); }

    /// Checks that every equation has the standard predictor form.
    void validate() const;

    /// {"country", "trend_origin_year", "water_stress_unit", "equations": {target: {a0, trend,
    /// exponents: {name: value}, r2, lambda}}}. A "percent" water-stress unit is converted to
    /// fractions on load by rescaling the affected technology coefficients.
    static TwoLayerModel from_json(const std::string &text);
    [[nodiscard]] std::string to_json() const;
};

/// A model with every exponent and trend zero and unit technology coefficients.
TwoLayerModel empty_two_layer_model(const std::string &country = "", int trend_origin_year = 1989);

// ---------------------------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------------------------

/// Regression rows in levels; every column and the response are logged before fitting.
struct LogDesign {
    std::string response_name;
    std::vector<int> years;
    std::vector<double> response;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    int trend_origin_year{1989};
};

struct RidgeFit {
    double a0{1.0};
    double trend{0.0};
    std::vector<double> exponents;
    double r2{0.0};
    double lambda{0.0};
    std::vector<double> fitted_log;
    std::vector<double> residual_log;
};

/// Ridge regression in log space on z-scored predictors; intercept and trend are unpenalized.
/// Needs at least three rows. Throws ValidationError naming the series and year of any
/// nonpositive value.
RidgeFit fit_log_ridge(const LogDesign &design, double lambda);

/// Log-spaced ridge penalties 1e-6 ... 1e2.
std::vector<double> default_lambda_grid();

/// Mean squared leave-one-out prediction error in log space for one penalty.
double loo_error(const LogDesign &design, double lambda);

/// Picks the penalty with the smallest leave-one-out error (ties go to the smaller penalty).
double select_lambda_loo(const LogDesign &design, std::span<const double> grid);

/// Annual calibration data. Units: population and labour in thousands, GDP per capita in
/// constant-2015 USD, food supply in kcal/capita/day, food quantities in tonnes, land in
/// 1000 ha, agricultural labour in percent of total labour, water stress as a fraction.
struct HistoricalRecord {
    std::string country;
    std::vector<int> years;
    std::vector<double> land;
    std::vector<double> gdp_per_capita;
    std::vector<double> labour_total;
    std::vector<double> labour_agr_pct;
    std::vector<double> population;
    std::vector<double> food_supply;
    std::vector<double> production;
    std::vector<double> exports;
    std::vector<double> imports;
    std::vector<double> precipitation;
    std::vector<double> temperature;
    std::vector<double> water_stress;

    [[nodiscard]] std::size_t size() const noexcept { return years.size(); }
    /// Column by predictor or target name (P, GDP, Ltot, LAgr, FSC, Dom, Exp, Imp, Pr, T, W, Land).
    [[nodiscard]] const std::vector<double> &series(const std::string &name) const;
    /// Contiguous years, equal column lengths, finite values.
    void validate() const;
};

/// Regression rows of one equation; the first year is dropped to supply the lagged values.
LogDesign design_for(const HistoricalRecord &history, Target target, int trend_origin_year = 1989);

/// Per-equation penalty; targets not listed are chosen by leave-one-out cross-validation.
using LambdaChoice = std::map<Target, double>;

TwoLayerModel calibrate_two_layer(const HistoricalRecord &history, const LambdaChoice &lambdas = {},
                                  int trend_origin_year = 1989);

// ---------------------------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------------------------

struct LowerLayerOutputs {
    double exports{0.0};
    double imports{0.0};
    double labour_agr{0.0};
};

LowerLayerOutputs project_lower_layer(const TwoLayerModel &model, double population,
                                      double gdp_prev, double labour_total, int year);

struct FoodSystemState {
    int year{0};
    /// Per-capita supply (kcal/capita/day) and national supply (kcal/day).
    double fsc{0.0};
    double fsc_national{0.0};
    double dom{0.0};
    double exports{0.0};
    double imports{0.0};
    double w{0.0};
    double land{0.0};
    double labour_agr{0.0};
    bool land_capped{false};
    int iterations{0};
};

struct UpperLayerInputs {
    LowerLayerOutputs lower;
    double population{0.0};
    double gdp_prev{0.0};
    double dom_prev{0.0};
    double w_prev{0.0};
    double temperature{0.0};
    double precipitation{0.0};
    int year{0};
    double land_cap{std::numeric_limits<double>::infinity()};
};

struct FixedPointOptions {
    /// Successive relative change required to accept the (Dom, W) pair.
    double tolerance{1e-8};
    int max_iterations{100};
};

/// Land first (lagged inputs only, then capped), then the simultaneous (Dom, W) pair by
/// Gauss-Seidel from the lagged values, then FSC. Throws NumericalError if the coupling
/// exponent product has magnitude of at least one or the iteration does not converge.
FoodSystemState project_upper_layer(const TwoLayerModel &model, const UpperLayerInputs &inputs,
                                    const FixedPointOptions &options = {});

/// Exact (Dom, W) solution of the coupled pair: linear in logs.
std::pair<double, double> coupled_pair_closed_form(const TwoLayerModel &model,
                                                   const UpperLayerInputs &inputs, double land);

/// Land equation value before capping.
double project_land(const TwoLayerModel &model, double population, double gdp_prev,
                    double dom_prev, int year);

/// Last observed year carried into the first projection step.
struct BaseState {
    int year{0};
    double dom{0.0};
    double w{0.0};
    double land{0.0};
    double gdp_per_capita{0.0};
};

BaseState base_state_from_history(const HistoricalRecord &history);

/// Annual projection per population trajectory. population holds annual totals (thousands)
/// covering every projected year; drivers must cover the same years. GDP enters with a one-year
/// lag, taken from the base state in the first year.
TrajectorySet<FoodSystemState> project_fsc_trajectories(const TwoLayerModel &model,
                                                        const SspRcpScenario &scenario,
                                                        const ScalarTrajectories &population,
                                                        const BaseState &base,
                                                        double land_cap = std::numeric_limits<double>::infinity(),
                                                        const FixedPointOptions &options = {});

/// Extracts one scalar field of a state trajectory set.
ScalarTrajectories state_field(const TrajectorySet<FoodSystemState> &set,
                               double FoodSystemState::*field);

} // namespace foodsec
