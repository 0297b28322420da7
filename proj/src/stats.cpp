#include "foodsec/stats.h"
#include "foodsec/types.h"

#include <algorithm>
#include <cmath>

namespace foodsec {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum acc;
    for (double v : values) {
        acc.add(v);
    }
    return acc.value();
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw ValidationError("mean of an empty sample");
    }
    return compensated_sum(values) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    CompensatedSum acc;
    for (double v : values) {
        acc.add((v - m) * (v - m));
    }
    return std::sqrt(acc.value() / static_cast<double>(values.size() - 1));
}

std::vector<double> sorted_copy(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    std::sort(out.begin(), out.end());
    return out;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("quantile probability outside [0, 1]");
    }
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(h));
    if (k + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(k);
    if (frac == 0.0 || sorted[k + 1] == sorted[k]) {
        return sorted[k];
    }
    return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

double empirical_quantile(std::span<const double> sample, double p) {
    const auto sorted = sorted_copy(sample);
    return sorted_quantile(sorted, p);
}

double sorted_inverse_cdf(std::span<const double> sorted, double u) {
    if (sorted.empty()) {
        throw ValidationError("inverse CDF of an empty sample");
    }
    const auto n = static_cast<double>(sorted.size());
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(u * n)) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
    return sorted[static_cast<std::size_t>(idx)];
}

} // namespace foodsec
