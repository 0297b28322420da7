#pragma once

#include "foodsec/caloric.h"
#include "foodsec/demography.h"
#include "foodsec/food_capacity.h"
#include "foodsec/io.h"
#include "foodsec/risk.h"
#include "foodsec/scenario.h"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foodsec {

/// Input files of one run. Empty optional paths fall back to built-in tables or calibration.
struct InputPaths {
    std::filesystem::path pyramid;
    std::filesystem::path vital_params;
    std::filesystem::path migration;
    std::filesystem::path history;
    std::filesystem::path drivers;
    std::filesystem::path coefficients;
    std::filesystem::path caloric_table;
    std::filesystem::path scenario_definition;
    std::filesystem::path weights;
};

struct RunConfig {
    std::string country;
    CountryGroup country_group{CountryGroup::hi_fert};
    /// Zero means the pyramid's year.
    int base_year{0};
    int horizon_year{2050};
    std::size_t n_trajectories{1000};
    std::uint64_t master_seed{20240101};
    /// Year whose TFR and female e0 are classified; zero means the horizon.
    int classification_year{0};
    QuantileRule quantiles;
    GammaPerspective perspective{GammaPerspective::lc};
    double theta{kInfiniteTheta};
    /// Preset name; ignored when custom weights are given.
    WeightPreset weight_preset{WeightPreset::ignorance};
    std::map<std::string, double> custom_weights;
    std::size_t grid_size{1024};
    double land_cap{std::numeric_limits<double>::infinity()};
    Activity activity{Activity::somewhat_active};
    Bound bound{Bound::midpoint};
    FixedPointOptions fixed_point;
    InputPaths inputs;
    std::filesystem::path output_dir{"out"};
    bool write_svg{true};

    /// Throws ValidationError on inconsistent settings.
    void validate() const;

    /// Parses a JSON document; relative paths are resolved against base_dir.
    static RunConfig from_json(const std::string &text, const std::filesystem::path &base_dir = {});
    static RunConfig load(const std::filesystem::path &path);

    /// Canonical JSON (sorted keys, no input paths).
    [[nodiscard]] std::string canonical_json() const;
    /// The risk weights implied by the preset or the custom map.
    [[nodiscard]] RiskMeasureConfig risk_measure() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL);

/// Hash of the canonical configuration and the content of every input file, as 16 hex digits.
std::string config_hash(const RunConfig &config);

struct Inputs {
    AgeSexPyramid pyramid;
    VitalParams vital_params;
    MigrationSchedule migration;
    HistoricalRecord history;
    DriverTable drivers;
    std::optional<TwoLayerModel> coefficients;
    CaloricTable caloric_table;
    ScenarioDefinition scenario_definition;
    IngestLog log;
};

/// Reads and validates every input named by the configuration.
Inputs ingest(const RunConfig &config);

/// On-disk trajectory database: one CSV per (scenario, quantity) plus a manifest.
class TrajectoryStore {
  public:
    static constexpr int kSchemaVersion = 1;

    explicit TrajectoryStore(std::filesystem::path dir);

    [[nodiscard]] const std::filesystem::path &dir() const noexcept { return dir_; }
    static std::string file_name(const std::string &scenario, const std::string &quantity);

    void put(const std::string &scenario, const std::string &quantity, const ScalarTrajectories &set);
    [[nodiscard]] ScalarTrajectories get(const std::string &scenario, const std::string &quantity) const;
    [[nodiscard]] bool contains(const std::string &scenario, const std::string &quantity) const;
    /// Scenario names with at least one stored quantity, from the manifest or the directory.
    [[nodiscard]] std::vector<std::string> scenarios() const;

    /// Writes manifest.json listing every file in the directory except itself.
    void write_manifest(std::uint64_t seed, const std::string &hash) const;

  private:
    std::filesystem::path dir_;
};

/// The years of a set that fall in [first, last].
ScalarTrajectories restrict_years(const ScalarTrajectories &set, int first, int last);

/// Stage reached before stopping.
enum class PipelineStage { population, capacity, risk };

struct PipelineResult {
    std::vector<std::string> scenarios;
    std::map<std::string, RiskAssessment> within;
    std::optional<RiskAssessment> across;
    std::vector<std::string> warnings;
    std::string hash;
    std::filesystem::path output_dir;
};

/// Simulation, classification, scenario assembly, caloric and capacity projection, and within-
/// and across-scenario risk. Every failure is rethrown with the stage name prefixed.
PipelineResult run_pipeline(const RunConfig &config,
                            PipelineStage last_stage = PipelineStage::risk);

/// Per-year median and 5 / 95 percentiles of one stored quantity.
struct FanChartRow {
    int year{0};
    double median{0.0};
    double lo90{0.0};
    double hi90{0.0};
};

std::vector<FanChartRow> fan_chart(const ScalarTrajectories &set);
std::string fan_chart_csv(const std::vector<FanChartRow> &rows);
std::string fan_chart_svg(const std::vector<FanChartRow> &rows, const std::string &title);

/// Writes fan__<scenario>__<quantity>.csv (and .svg) into the store directory; returns the CSV path.
std::filesystem::path emit_fan_chart_data(const TrajectoryStore &store, const std::string &quantity,
                                          const std::string &scenario, bool svg = true);

/// Stage-tagged diagnostic line on standard error.
void log_stage(const std::string &stage, const std::string &message);

} // namespace foodsec
