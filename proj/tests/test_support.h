#pragma once

#include "foodsec/demography.h"
#include "foodsec/io.h"

#include <cmath>
#include <filesystem>
#include <string>

namespace testing_support {

inline std::filesystem::path data_dir() { return FOODSEC_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::path(FOODSEC_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline foodsec::VitalParams egypt_like_params() {
    foodsec::VitalParams p;
    p.theta_tfr = {0.35, 1.8, 6.5, 0.3, 1.0};
    p.theta_e0 = {2.5, 55.0, 85.0, 5.0, 5.0};
    p.var_tfr = 0.02;
    p.var_e0 = 0.3;
    p.e0_gap = {4.5, 0.25};
    p.fertility_schedule = {0.012, 0.048, 0.058, 0.044, 0.026, 0.010, 0.002};
    p.srb = 1.05;
    p.start_tfr = 3.2;
    p.start_e0_f = 74.0;
    return p;
}

inline foodsec::AgeSexPyramid sample_pyramid() {
    return foodsec::read_pyramid_csv(data_dir() / "egy_pyramid_2020.csv");
}

/// Life expectancy of the Gompertz-Makeham survival curve by composite Simpson integration.
inline double simpson_e0(double alpha) {
    constexpr double g0 = 0.001;
    constexpr double b = 0.09;
    const auto surv = [&](double x) { return std::exp(-g0 * x - alpha / b * std::expm1(b * x)); };
    double upper = 1.0;
    while (surv(upper) > 1e-20) {
        upper += 1.0;
    }
    const int n = 200000;
    const double h = upper / n;
    double s = surv(0.0) + surv(upper);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 == 1 ? 4.0 : 2.0) * surv(i * h);
    }
    return s * h / 3.0;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace testing_support
