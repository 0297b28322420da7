#pragma once

#include <span>
#include <vector>

namespace foodsec {

/// Neumaier-compensated summation. Sums of weights times scenario means go through here so that
/// the weight-linearity identities hold to ~1e-15 relative.
class CompensatedSum {
  public:
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

  private:
    double sum_{0.0};
    double compensation_{0.0};
};

double compensated_sum(std::span<const double> values) noexcept;
double mean(std::span<const double> values);
/// Unbiased sample standard deviation; zero for fewer than two values.
double sample_stddev(std::span<const double> values);

/// Linear-interpolation empirical quantile (x_(k) + frac * (x_(k+1) - x_(k)), h = p (n - 1)).
/// Throws ValidationError on an empty sample or p outside [0, 1].
double empirical_quantile(std::span<const double> sample, double p);

/// Same as empirical_quantile on an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

/// Left-continuous inverse CDF of the empirical measure: x_(ceil(u n) - 1), u in (0, 1).
double sorted_inverse_cdf(std::span<const double> sorted, double u);

std::vector<double> sorted_copy(std::span<const double> values);

} // namespace foodsec
