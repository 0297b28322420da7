#include "doctest.h"
#include "risk_oracle.h"
#include "test_support.h"

#include "foodsec/risk.h"
#include "foodsec/scenario.h"
#include "foodsec/stats.h"

#include <algorithm>
#include <cmath>
#include <random>

using namespace foodsec;
using testing_support::rel_diff;
using testing_support::variational_risk_oracle;

namespace {

ScalarTrajectories make_set(const std::vector<std::vector<double>> &paths, std::vector<int> years) {
    ScalarTrajectories s;
    s.years = std::move(years);
    for (std::size_t j = 0; j < paths.size(); ++j) {
        s.ids.push_back(j + 1);
    }
    s.paths = paths;
    return s;
}

std::vector<std::vector<double>> random_samples(std::mt19937_64 &rng, std::size_t count) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i].resize(1 + rng() % 60);
        const double mu = 80.0 + 10.0 * z(rng);
        for (auto &x : out[i]) {
            x = mu + 5.0 * z(rng);
        }
    }
    return out;
}

std::map<std::string, RiskAssessment> random_within(std::mt19937_64 &rng) {
    std::map<std::string, RiskAssessment> within;
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (const auto &name : ssp_rcp_names()) {
        std::vector<std::vector<double>> req, cap, w;
        for (int j = 0; j < 30; ++j) {
            req.push_back({u(rng) * 1e8, u(rng) * 1e8, u(rng) * 1e8});
            cap.push_back({u(rng) * 1.2e8, u(rng) * 1.2e8, u(rng) * 1.2e8});
            w.push_back({u(rng), u(rng), u(rng)});
        }
        const std::vector<int> years{2030, 2031, 2032};
        within[name] = within_scenario_risk(make_set(req, years), make_set(cap, years), make_set(w, years),
                                            1.2, GammaPerspective::lc, name);
    }
    return within;
}

bool within_ulps(double a, double b, int ulps) {
    double x = a;
    for (int i = 0; i < ulps; ++i) {
        x = std::nextafter(x, b);
    }
    return x == b;
}

} // namespace

TEST_CASE("gamma under the three perspectives") {
    CHECK(within_ulps(gamma_value(1.22, GammaPerspective::vc), 1.12, 2));
    CHECK(gamma_value(1.22, GammaPerspective::lc) == 1.02);
    CHECK(gamma_value(1.22, GammaPerspective::nc) == 0.82);
    CHECK(gamma_value(0.35, GammaPerspective::nc) == 0.0);
    CHECK(gamma_value(0.10, GammaPerspective::vc) == 0.0);
    CHECK(gamma_value(0.20, GammaPerspective::lc) == 0.0);
    CHECK(gamma_value(0.40, GammaPerspective::nc) == 0.0);
    CHECK(gamma_value(3.0, GammaPerspective::zero) == 0.0);
    CHECK_THROWS_AS(gamma_value(-0.1, GammaPerspective::lc), ValidationError);
}

TEST_CASE("gamma is ordered and has unit slope above the threshold") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double w = u(rng);
        const double vc = gamma_value(w, GammaPerspective::vc);
        const double lc = gamma_value(w, GammaPerspective::lc);
        const double nc = gamma_value(w, GammaPerspective::nc);
        CHECK(vc >= lc);
        CHECK(lc >= nc);
        CHECK(nc >= 0.0);
        if (w > 0.5) {
            CHECK(gamma_value(w + 0.25, GammaPerspective::nc) - nc == doctest::Approx(0.25).epsilon(1e-12));
        }
    }
}

TEST_CASE("water stress bands") {
    CHECK(classify_water_stress(0.05) == WaterStressClass::low);
    CHECK(classify_water_stress(0.10) == WaterStressClass::low_medium);
    CHECK(classify_water_stress(0.35) == WaterStressClass::medium_high);
    CHECK(classify_water_stress(0.40) == WaterStressClass::high);
    CHECK(classify_water_stress(0.7999) == WaterStressClass::high);
    CHECK(classify_water_stress(0.80) == WaterStressClass::extremely_high);
    CHECK(classify_water_stress(1.22) == WaterStressClass::extremely_high);
    CHECK_THROWS_AS(classify_water_stress(-0.01), ValidationError);
}

TEST_CASE("index examples") {
    CHECK(fsri(5e9, 5e9, 1.3, 0.0) == 100.0);
    CHECK(fsri(0.8, 1.0, 1.2, 1.0) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(fsri(0.8, 1.0, 1.2, std::numeric_limits<double>::infinity()) == doctest::Approx(120.0).epsilon(1e-14));
    CHECK(fsri(0.8, 1.0, 1.2, 1e12) == doctest::Approx(120.0).epsilon(1e-9));
    CHECK_THROWS_AS(fsri(1.0, 0.0, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(fsri(1.0, 1.0, 1.0, -0.5), ValidationError);
}

TEST_CASE("index monotonicity") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int i = 0; i < 500; ++i) {
        const double c = u(rng), q = u(rng), w = u(rng), g = u(rng);
        const double base = fsri(c, q, w, g);
        CHECK(fsri(c * 1.01, q, w, g) > base);
        CHECK(fsri(c, q, w * 1.01, g) > base);
        CHECK(fsri(c, q * 1.01, w, g) < base);
        CHECK(fsri(c, q, w, 0.0) == doctest::Approx(100.0 * c / q).epsilon(1e-14));
    }
}

TEST_CASE("within-scenario risk on identical trajectories") {
    const std::vector<int> years{2020, 2021, 2022};
    const std::vector<double> req{1.0, 1.1, 1.2};
    const std::vector<double> cap{1.5, 1.4, 1.3};
    const std::vector<double> w{1.1, 1.2, 1.25};
    const auto r = within_scenario_risk(make_set({req, req, req}, years), make_set({cap, cap, cap}, years),
                                        make_set({w, w, w}, years), 1.22, GammaPerspective::lc);
    REQUIRE(r.rows.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const double g = std::max(0.0, (k == 0 ? 1.22 : w[k - 1]) - 0.20);
        const double want = fsri(req[k], cap[k], w[k], g);
        CHECK(r.rows[k].mean == doctest::Approx(want).epsilon(1e-15));
        CHECK(r.rows[k].q50 == want);
        CHECK(r.rows[k].q05 == want);
        CHECK(r.index.paths[1][k] == want);
    }
}

TEST_CASE("within-scenario risk against a hand recompute") {
    const std::vector<int> years{2030, 2031};
    const auto req = make_set({{100.0, 110.0}, {90.0, 95.0}}, years);
    const auto cap = make_set({{120.0, 115.0}, {100.0, 100.0}}, years);
    const auto w = make_set({{1.3, 1.1}, {0.5, 0.15}}, years);
    const auto r = within_scenario_risk(req, cap, w, 0.9, GammaPerspective::vc);
    // First year: gamma from the initial value 0.9 -> 0.8 for both.
    const double a0 = (1.0 / 1.8 * 100.0 / 120.0 + 0.8 / 1.8 * 1.3) * 100.0;
    const double b0 = (1.0 / 1.8 * 90.0 / 100.0 + 0.8 / 1.8 * 0.5) * 100.0;
    // Second year: gamma from each trajectory's own first-year W.
    const double a1 = (1.0 / 2.2 * 110.0 / 115.0 + 1.2 / 2.2 * 1.1) * 100.0;
    const double b1 = (1.0 / 1.4 * 95.0 / 100.0 + 0.4 / 1.4 * 0.15) * 100.0;
    CHECK(r.index.paths[0][0] == doctest::Approx(a0).epsilon(1e-14));
    CHECK(r.index.paths[1][0] == doctest::Approx(b0).epsilon(1e-14));
    CHECK(r.index.paths[0][1] == doctest::Approx(a1).epsilon(1e-14));
    CHECK(r.index.paths[1][1] == doctest::Approx(b1).epsilon(1e-14));
    CHECK(r.rows[1].mean == doctest::Approx(0.5 * (a1 + b1)).epsilon(1e-14));
    CHECK(r.rows[1].q50 == doctest::Approx(0.5 * (a1 + b1)).epsilon(1e-14));
    CHECK(r.gamma.paths[1][1] == doctest::Approx(0.4).epsilon(1e-14));

    auto shifted = cap;
    shifted.ids[1] = 7;
    CHECK_THROWS_AS(within_scenario_risk(req, shifted, w, 0.9, GammaPerspective::vc), ValidationError);
}

TEST_CASE("Monte-Carlo mean converges") {
    auto draw = [](std::size_t n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::lognormal_distribution<double> ln(0.0, 0.2);
        std::vector<std::vector<double>> req, cap, w;
        for (std::size_t j = 0; j < n; ++j) {
            req.push_back({1e8 * ln(rng)});
            cap.push_back({1.3e8 * ln(rng)});
            w.push_back({1.2 * ln(rng)});
        }
        const std::vector<int> years{2050};
        const auto r = within_scenario_risk(make_set(req, years), make_set(cap, years), make_set(w, years),
                                            1.2, GammaPerspective::lc);
        const auto s = r.index.slice(2050);
        return std::pair{r.rows[0].mean, sample_stddev(s) / std::sqrt(static_cast<double>(n))};
    };
    const auto [m1, se1] = draw(2000, 1);
    const auto [m2, se2] = draw(20000, 2);
    CHECK(std::abs(m1 - m2) < 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("barycenter of identical samples is the sample") {
    const std::vector<double> s{3.0, 1.0, 2.0, 5.0};
    const std::vector<std::vector<double>> samples{s, s, s};
    const std::vector<double> w{0.2, 0.5, 0.3};
    const auto grid = wasserstein_barycenter_1d(samples, w, 8);
    CHECK(grid == std::vector<double>{1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 5.0, 5.0});
    const auto exact = wasserstein_barycenter_exact(samples, w);
    CHECK(exact.values == std::vector<double>{1.0, 2.0, 3.0, 5.0});
}

TEST_CASE("barycenter of two point masses is their midpoint") {
    const std::vector<std::vector<double>> samples{{0.0}, {2.0}};
    const std::vector<double> w{0.5, 0.5};
    for (double v : wasserstein_barycenter_1d(samples, w, 16)) {
        CHECK(v == 1.0);
    }
    const auto exact = wasserstein_barycenter_exact(samples, w);
    CHECK(exact.values == std::vector<double>{1.0});
    CHECK(exact.probabilities == std::vector<double>{1.0});
}

TEST_CASE("barycenter mean is weight-linear in the sample means") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 50; ++rep) {
        const auto samples = random_samples(rng, 6);
        std::vector<double> w(6);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double total = 0.0;
        for (auto &x : w) {
            x = u(rng);
            total += x;
        }
        for (auto &x : w) {
            x /= total;
        }
        long double want = 0.0L;
        for (std::size_t i = 0; i < 6; ++i) {
            long double m = 0.0L;
            for (double x : samples[i]) {
                m += x;
            }
            want += w[i] * (m / samples[i].size());
        }
        CHECK(rel_diff(wasserstein_barycenter_exact(samples, w).mean(), static_cast<double>(want)) < 1e-12);
        CHECK(rel_diff(convex_risk(samples, w, kInfiniteTheta), static_cast<double>(want)) < 1e-12);
    }
}

TEST_CASE("grid barycenter equals the exact one when the grid refines every sample") {
    std::mt19937_64 rng(44);
    std::vector<std::vector<double>> samples{{1.0, 4.0}, {2.0, 2.5, 9.0, 0.5}};
    const std::vector<double> w{0.3, 0.7};
    const auto grid = wasserstein_barycenter_1d(samples, w, 40);
    const auto exact = wasserstein_barycenter_exact(samples, w);
    double gmean = 0.0;
    for (double v : grid) {
        gmean += v / 40.0;
    }
    CHECK(gmean == doctest::Approx(exact.mean()).epsilon(1e-14));
    CHECK_THROWS_AS(wasserstein_barycenter_1d(samples, w, 1), ValidationError);
    const std::vector<std::vector<double>> with_empty{{1.0}, {}};
    CHECK_THROWS_AS(wasserstein_barycenter_exact(with_empty, w), ValidationError);
}

TEST_CASE("convex risk against the variational oracle") {
    const std::vector<std::vector<double>> masses{{0.0}, {2.0}};
    const std::vector<double> half{0.5, 0.5};
    CHECK(convex_risk(masses, half, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(std::abs(variational_risk_oracle(masses, half, 1.0) - 1.5) < 1e-6);

    std::mt19937_64 rng(45);
    for (int rep = 0; rep < 5; ++rep) {
        const auto samples = random_samples(rng, 3);
        const std::vector<double> w{0.2, 0.3, 0.5};
        const double inf = convex_risk(samples, w, kInfiniteTheta);
        for (double theta : {0.5, 1.0, 10.0}) {
            const double rho = convex_risk(samples, w, theta);
            CHECK(std::abs((rho - inf) - 1.0 / (2.0 * theta)) < 1e-9);
            CHECK(std::abs(rho - variational_risk_oracle(samples, w, theta)) < 1e-6);
        }
    }
    CHECK_THROWS_AS(convex_risk(masses, half, 0.0), ValidationError);
    CHECK_THROWS_AS(convex_risk(masses, half, -1.0), ValidationError);
}

TEST_CASE("convex risk decreases toward the barycentric limit") {
    const std::vector<std::vector<double>> s{{1.0, 3.0}, {2.0, 7.0}};
    const std::vector<double> w{0.4, 0.6};
    double prev = std::numeric_limits<double>::infinity();
    for (double theta : {0.1, 0.5, 1.0, 5.0, 50.0, 1e6}) {
        const double rho = convex_risk(s, w, theta);
        CHECK(rho < prev);
        prev = rho;
    }
    CHECK(prev == doctest::Approx(convex_risk(s, w, kInfiniteTheta)).epsilon(1e-6));
}

TEST_CASE("weight presets") {
    const auto ign = preset_config(WeightPreset::ignorance);
    const auto opt = preset_config(WeightPreset::optimistic);
    const auto pes = preset_config(WeightPreset::pessimistic);
    CHECK(ign.scenarios == ssp_rcp_names());
    for (double w : ign.weights) {
        CHECK(w == 1.0 / 6.0);
    }
    CHECK(opt.weights == std::vector<double>{1.0 / 2, 1.0 / 5, 3.0 / 20, 1.0 / 25, 1.0 / 10, 1.0 / 100});
    CHECK(pes.weights == std::vector<double>{1.0 / 100, 1.0 / 25, 1.0 / 10, 1.0 / 5, 3.0 / 20, 1.0 / 2});
    for (const auto &c : {ign, opt, pes}) {
        CHECK_NOTHROW(c.validate());
    }
    RiskMeasureConfig bad = ign;
    bad.weights[0] += 0.01;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("across-scenario weighted mean identities") {
    std::mt19937_64 rng(46);
    const auto within = random_within(rng);
    for (auto preset : {WeightPreset::ignorance, WeightPreset::optimistic, WeightPreset::pessimistic}) {
        const auto cfg = preset_config(preset);
        const auto across = across_scenario_risk(within, cfg);
        for (std::size_t k = 0; k < across.rows.size(); ++k) {
            long double want = 0.0L;
            for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
                want += cfg.weights[i] * static_cast<long double>(within.at(cfg.scenarios[i]).rows[k].mean);
            }
            CHECK(rel_diff(across.rows[k].mean, static_cast<double>(want)) < 1e-12);
        }
        CHECK(across.rho.empty());
    }
    const auto finite = across_scenario_risk(within, preset_config(WeightPreset::optimistic, 2.0));
    const auto limit = across_scenario_risk(within, preset_config(WeightPreset::optimistic));
    for (std::size_t k = 0; k < finite.rows.size(); ++k) {
        CHECK(std::abs(finite.rho[k] - limit.rows[k].mean - 0.25) < 1e-9);
    }
}

TEST_CASE("a single scenario with full weight reproduces it") {
    std::mt19937_64 rng(47);
    const auto within = random_within(rng);
    RiskMeasureConfig cfg;
    cfg.scenarios = ssp_rcp_names();
    cfg.weights = {0, 0, 0, 1, 0, 0};
    const auto across = across_scenario_risk(within, cfg);
    const auto &one = within.at("SSP3-7.0");
    for (std::size_t k = 0; k < one.rows.size(); ++k) {
        CHECK(across.rows[k].mean == one.rows[k].mean);
        CHECK(across.rows[k].q05 == one.rows[k].q05);
        CHECK(across.rows[k].q95 == one.rows[k].q95);
        CHECK(across.rows[k].year == one.rows[k].year);
    }
}

TEST_CASE("across-scenario mean is permutation invariant") {
    std::mt19937_64 rng(48);
    const auto within = random_within(rng);
    auto cfg = preset_config(WeightPreset::optimistic);
    const auto base = across_scenario_risk(within, cfg);
    std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
    RiskMeasureConfig perm;
    for (auto i : order) {
        perm.scenarios.push_back(cfg.scenarios[i]);
        perm.weights.push_back(cfg.weights[i]);
    }
    const auto other = across_scenario_risk(within, perm);
    for (std::size_t k = 0; k < base.rows.size(); ++k) {
        CHECK(rel_diff(base.rows[k].mean, other.rows[k].mean) < 1e-14);
    }
}

TEST_CASE("missing scenarios need explicit renormalization") {
    std::mt19937_64 rng(49);
    auto within = random_within(rng);
    within.erase("SSP5-8.5");
    const auto cfg = preset_config(WeightPreset::ignorance);
    CHECK_THROWS_WITH_AS(across_scenario_risk(within, cfg), doctest::Contains("SSP5-8.5"), ValidationError);
    const auto r = across_scenario_risk(within, cfg, true);
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
        double want = 0.0;
        for (const auto &[name, a] : within) {
            want += a.rows[k].mean / 5.0;
        }
        CHECK(rel_diff(r.rows[k].mean, want) < 1e-12);
    }
}
