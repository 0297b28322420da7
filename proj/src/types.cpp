#include "foodsec/types.h"

#include <cmath>
#include <numeric>

namespace foodsec {

std::string to_string(Level level) {
    switch (level) {
    case Level::low:
        return "Low";
    case Level::medium:
        return "Medium";
    case Level::high:
        return "High";
    }
    return "Unknown";
}

Level parse_level(const std::string &text) {
    if (text == "Low" || text == "low") {
        return Level::low;
    }
    if (text == "Medium" || text == "medium") {
        return Level::medium;
    }
    if (text == "High" || text == "high") {
        return Level::high;
    }
    throw ValidationError("unknown level '" + text + "' (expected Low, Medium or High)");
}

std::string age_group_label(std::size_t group) {
    if (group + 1 == kAgeGroups) {
        return std::to_string(kPeriodYears * group) + "+";
    }
    const auto lo = kPeriodYears * group;
    return std::to_string(lo) + "-" + std::to_string(lo + kPeriodYears - 1);
}

std::size_t age_group_index(const std::string &label) {
    for (std::size_t a = 0; a < kAgeGroups; ++a) {
        if (age_group_label(a) == label) {
            return a;
        }
    }
    throw ValidationError("unknown age group '" + label + "'");
}

double AgeSexPyramid::total(Sex sex) const noexcept {
    const auto &c = counts(sex);
    return std::accumulate(c.begin(), c.end(), 0.0);
}

double AgeSexPyramid::total() const noexcept { return total(Sex::female) + total(Sex::male); }

void AgeSexPyramid::validate() const {
    for (auto sex : {Sex::female, Sex::male}) {
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            const double v = counts(sex)[a];
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("pyramid " + country + " " + std::to_string(year) +
                                      ": invalid count in group " + age_group_label(a));
            }
        }
    }
}

} // namespace foodsec
