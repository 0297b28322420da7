#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace foodsec {

/// Input data or configuration that fails a schema or domain check.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure that failed to converge or became unstable.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Sex { female, male };

/// Sub-scenario intensity, used both for trajectory classes and deterministic migration levels.
enum class Level { low, medium, high };

std::string to_string(Level level);
Level parse_level(const std::string &text);

/// Number of five-year age groups: 0-4, 5-9, ..., 95-99 and the open group 100+.
inline constexpr std::size_t kAgeGroups = 21;
inline constexpr int kPeriodYears = 5;

using AgeVector = std::array<double, kAgeGroups>;

/// Label of an age group, "0-4" ... "95-99", "100+".
std::string age_group_label(std::size_t group);

/// Inverse of age_group_label; throws ValidationError on unknown labels.
std::size_t age_group_index(const std::string &label);

/// Population counts (thousands) by five-year age group and sex at one point in time.
struct AgeSexPyramid {
    std::string country;
    int year{0};
    AgeVector female{};
    AgeVector male{};

    [[nodiscard]] double total() const noexcept;
    [[nodiscard]] double total(Sex sex) const noexcept;
    [[nodiscard]] const AgeVector &counts(Sex sex) const noexcept {
        return sex == Sex::female ? female : male;
    }
    [[nodiscard]] AgeVector &counts(Sex sex) noexcept {
        return sex == Sex::female ? female : male;
    }

    /// Throws ValidationError if any count is negative or non-finite.
    void validate() const;
};

/// A batch of simulated paths of one quantity, indexed by trajectory id and year.
///
/// paths[j][k] is the value of trajectory ids[j] at years[k]. Trajectory order is always
/// ascending id order so that downstream files are reproducible.
template <typename T>
struct TrajectorySet {
    std::vector<int> years;
    std::vector<std::uint64_t> ids;
    std::vector<std::vector<T>> paths;

    [[nodiscard]] std::size_t size() const noexcept { return ids.size(); }
    [[nodiscard]] std::size_t horizon() const noexcept { return years.size(); }

    [[nodiscard]] std::size_t year_index(int year) const {
        for (std::size_t k = 0; k < years.size(); ++k) {
            if (years[k] == year) {
                return k;
            }
        }
        throw ValidationError("year " + std::to_string(year) + " not covered by trajectory set");
    }

    /// The instantaneous distribution at one year: one value per trajectory.
    [[nodiscard]] std::vector<T> slice(int year) const {
        const auto k = year_index(year);
        std::vector<T> out;
        out.reserve(paths.size());
        for (const auto &p : paths) {
            out.push_back(p[k]);
        }
        return out;
    }
};

using ScalarTrajectories = TrajectorySet<double>;

} // namespace foodsec
