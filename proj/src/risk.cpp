#include "foodsec/risk.h"
#include "foodsec/parallel.h"
#include "foodsec/scenario.h"
#include "foodsec/stats.h"

#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numeric>

namespace foodsec {

std::string to_string(GammaPerspective perspective) {
    switch (perspective) {
    case GammaPerspective::zero:
        return "Zero";
    case GammaPerspective::nc:
        return "NC";
    case GammaPerspective::lc:
        return "LC";
    case GammaPerspective::vc:
        return "VC";
    }
    return "Unknown";
}

GammaPerspective parse_perspective(const std::string &text) {
    for (auto p : {GammaPerspective::zero, GammaPerspective::nc, GammaPerspective::lc, GammaPerspective::vc}) {
        if (text == to_string(p)) {
            return p;
        }
    }
    throw ValidationError("unknown gamma perspective '" + text + "' (expected Zero, NC, LC, VC)");
}

double gamma_threshold(GammaPerspective perspective) {
    switch (perspective) {
    case GammaPerspective::zero:
        return std::numeric_limits<double>::infinity();
    case GammaPerspective::nc:
        return 0.40;
    case GammaPerspective::lc:
        return 0.20;
    case GammaPerspective::vc:
        return 0.10;
    }
    return std::numeric_limits<double>::infinity();
}

double gamma_value(double w_prev, GammaPerspective perspective) {
    if (!(w_prev >= 0.0) || !std::isfinite(w_prev)) {
        throw ValidationError(fmt::format("water stress must be finite and non-negative, got {}", w_prev));
    }
    if (perspective == GammaPerspective::zero) {
        return 0.0;
    }
    return std::max(0.0, w_prev - gamma_threshold(perspective));
}

std::string to_string(WaterStressClass c) {
    switch (c) {
    case WaterStressClass::low:
        return "Low";
    case WaterStressClass::low_medium:
        return "LowMedium";
    case WaterStressClass::medium_high:
        return "MediumHigh";
    case WaterStressClass::high:
        return "High";
    case WaterStressClass::extremely_high:
        return "ExtremelyHigh";
    }
    return "Unknown";
}

WaterStressClass classify_water_stress(double w) {
    if (!(w >= 0.0)) {
        throw ValidationError(fmt::format("water stress must be non-negative, got {}", w));
    }
    if (w < 0.10) {
        return WaterStressClass::low;
    }
    if (w < 0.20) {
        return WaterStressClass::low_medium;
    }
    if (w < 0.40) {
        return WaterStressClass::medium_high;
    }
    if (w < 0.80) {
        return WaterStressClass::high;
    }
    return WaterStressClass::extremely_high;
}

double fsri(double requirement, double capacity, double w, double gamma) {
    if (!(capacity > 0.0)) {
        throw ValidationError(fmt::format("food system capacity must be positive, got {}", capacity));
    }
    if (!(gamma >= 0.0)) {
        throw ValidationError(fmt::format("gamma must be non-negative, got {}", gamma));
    }
    if (std::isinf(gamma)) {
        return 100.0 * w;
    }
    const double keep = 1.0 / (1.0 + gamma);
    const double water = gamma / (1.0 + gamma);
    return (keep * (requirement / capacity) + water * w) * 100.0;
}

RiskRow summarize(int year, std::span<const double> sample, double gamma) {
    const auto sorted = sorted_copy(sample);
    RiskRow r;
    r.year = year;
    r.mean = mean(sample);
    r.q05 = sorted_quantile(sorted, 0.05);
    r.q33 = sorted_quantile(sorted, 0.33);
    r.q50 = sorted_quantile(sorted, 0.50);
    r.q66 = sorted_quantile(sorted, 0.66);
    r.q95 = sorted_quantile(sorted, 0.95);
    r.gamma = gamma;
    return r;
}

namespace {

void check_aligned(const ScalarTrajectories &a, const ScalarTrajectories &b, const char *what) {
    if (a.ids != b.ids) {
        throw ValidationError(fmt::format("{}: trajectory ids do not match", what));
    }
    if (a.years != b.years) {
        throw ValidationError(fmt::format("{}: years do not match", what));
    }
}

std::vector<double> column(const ScalarTrajectories &set, std::size_t k) {
    std::vector<double> out;
    out.reserve(set.paths.size());
    for (const auto &p : set.paths) {
        out.push_back(p[k]);
    }
    return out;
}

} // namespace

RiskAssessment within_scenario_risk(const ScalarTrajectories &requirement,
                                   const ScalarTrajectories &capacity,
                                   const ScalarTrajectories &water, double w_initial,
                                   GammaPerspective perspective, const std::string &label) {
    check_aligned(requirement, capacity, "requirement vs capacity");
    check_aligned(requirement, water, "requirement vs water stress");
    if (requirement.paths.empty()) {
        throw ValidationError("within-scenario risk needs at least one trajectory");
    }
    RiskAssessment out;
    out.mode = label.empty() ? fmt::format("within:{}", to_string(perspective))
                             : fmt::format("within:{}:{}", label, to_string(perspective));
    out.index.years = out.gamma.years = requirement.years;
    out.index.ids = out.gamma.ids = requirement.ids;
    out.index.paths.resize(requirement.paths.size());
    out.gamma.paths.resize(requirement.paths.size());
    parallel_for(requirement.paths.size(), [&](std::size_t j) {
        const auto n = requirement.years.size();
        auto &idx = out.index.paths[j];
        auto &gam = out.gamma.paths[j];
        idx.resize(n);
        gam.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double w_prev = k == 0 ? w_initial : water.paths[j][k - 1];
            gam[k] = gamma_value(w_prev, perspective);
            idx[k] = fsri(requirement.paths[j][k], capacity.paths[j][k], water.paths[j][k], gam[k]);
        }
    });
    for (std::size_t k = 0; k < requirement.years.size(); ++k) {
        const auto values = column(out.index, k);
        const auto gammas = column(out.gamma, k);
        out.rows.push_back(summarize(requirement.years[k], values, mean(gammas)));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

void RiskMeasureConfig::validate() const {
    if (scenarios.size() != weights.size() || weights.empty()) {
        throw ValidationError("risk weights: one weight per scenario required");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw ValidationError(fmt::format("risk weight for {} must be non-negative", scenarios[i]));
        }
        total.add(weights[i]);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw ValidationError(fmt::format("risk weights sum to {:.17g}, not 1", total.value()));
    }
    if (!(theta > 0.0)) {
        throw ValidationError(fmt::format("uncertainty aversion theta must be positive, got {}", theta));
    }
    if (grid_size < 2) {
        throw ValidationError("barycenter grid needs at least 2 points");
    }
}

double RiskMeasureConfig::weight(const std::string &scenario) const {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (scenarios[i] == scenario) {
            return weights[i];
        }
    }
    throw ValidationError("no risk weight for scenario " + scenario);
}

std::string to_string(WeightPreset preset) {
    switch (preset) {
    case WeightPreset::ignorance:
        return "ignorance";
    case WeightPreset::optimistic:
        return "optimistic";
    case WeightPreset::pessimistic:
        return "pessimistic";
    }
    return "unknown";
}

WeightPreset parse_weight_preset(const std::string &text) {
    for (auto p : {WeightPreset::ignorance, WeightPreset::optimistic, WeightPreset::pessimistic}) {
        if (text == to_string(p)) {
            return p;
        }
    }
    throw ValidationError("unknown weight preset '" + text + "'");
}

RiskMeasureConfig preset_config(WeightPreset preset, double theta) {
    RiskMeasureConfig c;
    c.scenarios = ssp_rcp_names();
    c.theta = theta;
    switch (preset) {
    case WeightPreset::ignorance:
        c.weights.assign(6, 1.0 / 6.0);
        break;
    case WeightPreset::optimistic:
        c.weights = {1.0 / 2.0, 1.0 / 5.0, 3.0 / 20.0, 1.0 / 25.0, 1.0 / 10.0, 1.0 / 100.0};
        break;
    case WeightPreset::pessimistic:
        c.weights = {1.0 / 100.0, 1.0 / 25.0, 1.0 / 10.0, 1.0 / 5.0, 3.0 / 20.0, 1.0 / 2.0};
        break;
    }
    return c;
}

double DiscreteMeasure::mean() const {
    CompensatedSum s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.add(values[i] * probabilities[i]);
    }
    return s.value();
}

namespace {

void check_barycenter_args(std::span<const std::vector<double>> samples, std::span<const double> weights) {
    if (samples.empty() || samples.size() != weights.size()) {
        throw ValidationError("barycenter: one weight per sample required");
    }
    CompensatedSum total;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].empty()) {
            throw ValidationError(fmt::format("barycenter: sample {} is empty", i));
        }
        if (!(weights[i] >= 0.0)) {
            throw ValidationError("barycenter: weights must be non-negative");
        }
        total.add(weights[i]);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw ValidationError("barycenter: weights must sum to 1");
    }
}

// Index of the heaviest weight; differences are taken against it so that a unit weight
// reproduces that input exactly.
std::size_t reference_index(std::span<const double> weights) {
    return static_cast<std::size_t>(std::max_element(weights.begin(), weights.end()) - weights.begin());
}

double weighted_around_reference(std::span<const double> values, std::span<const double> weights,
                                 std::size_t ref) {
    CompensatedSum s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i != ref && weights[i] != 0.0) {
            s.add(weights[i] * (values[i] - values[ref]));
        }
    }
    return values[ref] + s.value();
}

std::vector<std::vector<double>> sorted_all(std::span<const std::vector<double>> samples) {
    std::vector<std::vector<double>> out;
    out.reserve(samples.size());
    for (const auto &s : samples) {
        out.push_back(sorted_copy(s));
    }
    return out;
}

} // namespace

DiscreteMeasure wasserstein_barycenter_exact(std::span<const std::vector<double>> samples,
                                             std::span<const double> weights) {
    check_barycenter_args(samples, weights);
    const auto sorted = sorted_all(samples);
    // Breakpoints k / n kept as integer fractions so that masses are correctly rounded.
    struct Fraction {
        std::uint64_t k;
        std::uint64_t n;
        [[nodiscard]] double value() const { return static_cast<double>(k) / static_cast<double>(n); }
    };
    std::vector<Fraction> breaks;
    for (const auto &s : sorted) {
        const auto n = static_cast<std::uint64_t>(s.size());
        for (std::uint64_t k = 0; k <= n; ++k) {
            breaks.push_back({k, n});
        }
    }
    const auto less = [](const Fraction &a, const Fraction &b) { return a.k * b.n < b.k * a.n; };
    const auto same = [](const Fraction &a, const Fraction &b) { return a.k * b.n == b.k * a.n; };
    std::sort(breaks.begin(), breaks.end(), less);
    breaks.erase(std::unique(breaks.begin(), breaks.end(), same), breaks.end());

    const auto ref = reference_index(weights);
    DiscreteMeasure out;
    std::vector<double> q(samples.size());
    for (std::size_t l = 0; l + 1 < breaks.size(); ++l) {
        const auto &a = breaks[l];
        const auto &b = breaks[l + 1];
        const double u = 0.5 * (a.value() + b.value());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            q[i] = sorted_inverse_cdf(sorted[i], u);
        }
        out.values.push_back(weighted_around_reference(q, weights, ref));
        out.probabilities.push_back(static_cast<double>(b.k * a.n - a.k * b.n) /
                                    static_cast<double>(a.n * b.n));
    }
    return out;
}

std::vector<double> wasserstein_barycenter_1d(std::span<const std::vector<double>> samples,
                                              std::span<const double> weights, std::size_t m) {
    check_barycenter_args(samples, weights);
    if (m < 2) {
        throw ValidationError("barycenter grid needs at least 2 points");
    }
    const auto sorted = sorted_all(samples);
    const auto ref = reference_index(weights);
    std::vector<double> out(m);
    std::vector<double> q(samples.size());
    for (std::size_t k = 0; k < m; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            q[i] = sorted_inverse_cdf(sorted[i], u);
        }
        out[k] = weighted_around_reference(q, weights, ref);
    }
    return out;
}

double convex_risk(std::span<const std::vector<double>> samples, std::span<const double> weights,
                   double theta) {
    check_barycenter_args(samples, weights);
    if (!(theta > 0.0)) {
        throw ValidationError(fmt::format("uncertainty aversion theta must be positive, got {}", theta));
    }
    std::vector<double> means;
    means.reserve(samples.size());
    for (const auto &s : samples) {
        means.push_back(mean(s));
    }
    const double base = weighted_around_reference(means, weights, reference_index(weights));
    return std::isinf(theta) ? base : base + 1.0 / (2.0 * theta);
}

RiskAssessment across_scenario_risk(const std::map<std::string, RiskAssessment> &within,
                                    const RiskMeasureConfig &config, bool renormalize) {
    config.validate();
    std::vector<std::string> names;
    std::vector<double> weights;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
        if (within.contains(config.scenarios[i])) {
            names.push_back(config.scenarios[i]);
            weights.push_back(config.weights[i]);
        } else if (config.weights[i] > 0.0) {
            missing.push_back(config.scenarios[i]);
        }
    }
    if (!missing.empty()) {
        if (!renormalize) {
            std::string list;
            for (const auto &m : missing) {
                list += (list.empty() ? "" : ", ") + m;
            }
            throw ValidationError("across-scenario risk: missing scenarios with positive weight: " + list);
        }
        CompensatedSum total;
        for (double w : weights) {
            total.add(w);
        }
        if (!(total.value() > 0.0)) {
            throw ValidationError("across-scenario risk: no remaining weight after renormalization");
        }
        for (double &w : weights) {
            w /= total.value();
        }
    }
    if (names.empty()) {
        throw ValidationError("across-scenario risk: no scenarios");
    }
    const auto &first = within.at(names.front());
    for (const auto &n : names) {
        if (within.at(n).rows.size() != first.rows.size()) {
            throw ValidationError("across-scenario risk: scenarios cover different years");
        }
        for (std::size_t k = 0; k < first.rows.size(); ++k) {
            if (within.at(n).rows[k].year != first.rows[k].year) {
                throw ValidationError("across-scenario risk: scenarios cover different years");
            }
        }
    }

    RiskAssessment out;
    out.mode = std::isinf(config.theta) ? std::string("across:barycenter")
                                        : fmt::format("across:theta={}", config.theta);
    const auto ref = reference_index(weights);
    std::vector<double> v(names.size());
    auto combine = [&](double RiskRow::*field, std::size_t k) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            v[i] = within.at(names[i]).rows[k].*field;
        }
        return weighted_around_reference(v, weights, ref);
    };
    for (std::size_t k = 0; k < first.rows.size(); ++k) {
        RiskRow r;
        r.year = first.rows[k].year;
        r.mean = combine(&RiskRow::mean, k);
        r.q05 = combine(&RiskRow::q05, k);
        r.q33 = combine(&RiskRow::q33, k);
        r.q50 = combine(&RiskRow::q50, k);
        r.q66 = combine(&RiskRow::q66, k);
        r.q95 = combine(&RiskRow::q95, k);
        r.gamma = combine(&RiskRow::gamma, k);
        out.rows.push_back(r);
        if (!std::isinf(config.theta)) {
            out.rho.push_back(r.mean + 1.0 / (2.0 * config.theta));
        }
    }
    return out;
}

} // namespace foodsec
