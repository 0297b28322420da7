#pragma once

#include "foodsec/caloric.h"
#include "foodsec/demography.h"
#include "foodsec/food_capacity.h"
#include "foodsec/risk.h"
#include "foodsec/scenario.h"

#include <filesystem>
#include <string>
#include <vector>

namespace foodsec {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

/// Parsed comma-separated file with a header row.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // 1-based source line of each row

    /// Column index; throws ValidationError naming the file if absent.
    [[nodiscard]] std::size_t column(const std::string &name) const;
    [[nodiscard]] bool has_column(const std::string &name) const;
    /// Numeric cell; empty cells are NaN when allow_empty is set, an error otherwise.
    [[nodiscard]] double number(std::size_t row, std::size_t col, bool allow_empty = false) const;
    [[nodiscard]] int integer(std::size_t row, std::size_t col) const;
    [[nodiscard]] const std::string &text(std::size_t row, std::size_t col) const;
    /// "file:line" prefix for diagnostics.
    [[nodiscard]] std::string where(std::size_t row) const;
};

CsvTable parse_csv(const std::string &text, const std::string &source);
CsvTable read_csv(const std::filesystem::path &path);

std::string read_text(const std::filesystem::path &path);
/// Writes atomically enough for our purposes: full content then rename.
void write_text(const std::filesystem::path &path, const std::string &content);

/// Non-fatal findings collected during ingestion.
struct IngestLog {
    std::vector<std::string> warnings;
};

/// One (country, year) pyramid; all 42 age-sex cells must be present exactly once.
AgeSexPyramid read_pyramid_csv(const std::filesystem::path &path);
std::string pyramid_csv(const AgeSexPyramid &pyramid);

VitalParams parse_vital_params_json(const std::string &text);
VitalParams read_vital_params_json(const std::filesystem::path &path);

MigrationSchedule read_migration_csv(const std::filesystem::path &path);

/// Historical calibration table. Water stress columns whose values exceed 5 are read as percent
/// and rescaled to fractions with a warning.
HistoricalRecord parse_history_csv(const CsvTable &table, IngestLog &log);
HistoricalRecord read_history_csv(const std::filesystem::path &path, IngestLog &log);

DriverTable read_drivers_csv(const std::filesystem::path &path);

CaloricTable read_caloric_table_csv(const std::filesystem::path &path);
std::string caloric_table_csv(const CaloricTable &table);

/// Either {"preset": "optimistic", "theta": 2} or a scenario -> weight map (optionally under
/// "weights").
RiskMeasureConfig parse_weights_json(const std::string &text);

TwoLayerModel read_coefficients_json(const std::filesystem::path &path);

/// Rows trajectory_id, year, value ordered by (trajectory_id, year).
std::string trajectories_csv(const ScalarTrajectories &set);
ScalarTrajectories parse_trajectories_csv(const CsvTable &table);

/// Columns year, mode, mean, q05, q33, q50, q66, q95, gamma.
std::string risk_csv(const RiskAssessment &assessment);
RiskAssessment parse_risk_csv(const CsvTable &table);

} // namespace foodsec
