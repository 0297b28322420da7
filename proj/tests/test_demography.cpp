#include "doctest.h"
#include "test_support.h"

#include "foodsec/demography.h"
#include "foodsec/stats.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace foodsec;
using testing_support::egypt_like_params;
using testing_support::rel_diff;
using testing_support::sample_pyramid;

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double increment(double x, const DoubleLogistic &t) {
    return t.d * logistic((x - t.l) / t.w1) * logistic((t.u - x) / t.w2);
}

VitalParams noiseless(VitalParams p) {
    p.var_tfr = 0.0;
    p.var_e0 = 0.0;
    p.e0_gap.var = 0.0;
    return p;
}

// Dense projection matrix over (female 0..20, male 0..20).
Eigen::MatrixXd leslie(const LifeTable &f, const LifeTable &m, double tfr, const VitalParams &p) {
    const int n = static_cast<int>(kAgeGroups);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int sex = 0; sex < 2; ++sex) {
        const auto &lt = sex == 0 ? f : m;
        const int o = sex * n;
        for (int a = 0; a < n - 1; ++a) {
            M(o + a + 1, o + a) += lt.survival[a];
        }
        M(o + n - 1, o + n - 1) += lt.survival[n - 1];
    }
    for (std::size_t i = 0; i < kFertileGroups; ++i) {
        const int col = static_cast<int>(kFirstFertileGroup + i);
        const double b = tfr * p.fertility_schedule[i] * 5.0;
        M(0, col) += b / (1.0 + p.srb) * f.birth_survival;
        M(n, col) += b * p.srb / (1.0 + p.srb) * m.birth_survival;
    }
    return M;
}

Eigen::VectorXd stack(const AgeSexPyramid &p) {
    Eigen::VectorXd v(2 * kAgeGroups);
    for (std::size_t a = 0; a < kAgeGroups; ++a) {
        v(a) = p.female[a];
        v(kAgeGroups + a) = p.male[a];
    }
    return v;
}

} // namespace

TEST_CASE("double logistic reference value") {
    const DoubleLogistic t{2.5, 50.0, 80.0, 3.0, 3.0};
    CHECK(double_logistic(65.0, t) == doctest::Approx(2.5 * 0.98665909240492).epsilon(1e-12));
    CHECK(double_logistic(65.0, t) == doctest::Approx(increment(65.0, t)).epsilon(1e-15));
}

TEST_CASE("double logistic stays within the maximum increment") {
    const DoubleLogistic t{0.4, 1.5, 7.0, 0.5, 1.2};
    for (double x = -5.0; x <= 15.0; x += 0.05) {
        const double v = double_logistic(x, t);
        CHECK(v >= 0.0);
        CHECK(v <= 0.4);
    }
}

TEST_CASE("zero variance TFR path follows the scripted recurrence") {
    auto p = noiseless(egypt_like_params());
    p.theta_tfr = {0.5, 2.0, 6.0, 0.5, 0.5};
    const auto path = tfr_path(5.0, p, 12, 1, 1);
    double f = 5.0;
    REQUIRE(path.size() == 13);
    CHECK(path[0] == 5.0);
    for (std::size_t k = 1; k < path.size(); ++k) {
        f = std::clamp(f - increment(f, p.theta_tfr), 0.5, 10.0);
        CHECK(path[k] == doctest::Approx(f).epsilon(1e-14));
    }
}

TEST_CASE("zero variance and zero decrement keep TFR constant") {
    auto p = noiseless(egypt_like_params());
    p.theta_tfr.d = 0.0;
    const auto path = tfr_path(3.1, p, 8, 42, 9);
    for (double v : path) {
        CHECK(v == 3.1);
    }
}

TEST_CASE("zero variance e0 paths follow the scripted recurrence") {
    auto p = noiseless(egypt_like_params());
    const auto [f, m] = e0_paths(60.0, p, 10, 3, 4);
    double e = 60.0;
    CHECK(f[0] == 60.0);
    CHECK(m[0] == doctest::Approx(55.5).epsilon(1e-15));
    for (std::size_t k = 1; k < f.size(); ++k) {
        e = std::clamp(e + increment(e, p.theta_e0), 20.0, 110.0);
        CHECK(f[k] == doctest::Approx(e).epsilon(1e-14));
        CHECK(m[k] == doctest::Approx(e - 4.5).epsilon(1e-14));
        CHECK(f[k] > f[k - 1]);
    }
}

TEST_CASE("noisy paths respect the clamps") {
    auto p = egypt_like_params();
    p.var_tfr = 25.0;
    p.var_e0 = 400.0;
    const auto tfr = simulate_tfr_paths(3.0, p, 20, 200, 11);
    const auto e0 = simulate_e0_paths(70.0, p, 20, 200, 11);
    for (const auto &path : tfr.paths) {
        for (double v : path) {
            CHECK(v >= kTfrMin);
            CHECK(v <= kTfrMax);
        }
    }
    for (std::size_t j = 0; j < e0.female.size(); ++j) {
        for (std::size_t k = 0; k < e0.female.horizon(); ++k) {
            CHECK(e0.female.paths[j][k] >= kE0Min);
            CHECK(e0.female.paths[j][k] <= kE0Max);
            CHECK(e0.male.paths[j][k] <= e0.female.paths[j][k]);
            CHECK(e0.male.paths[j][k] >= kE0Min);
        }
    }
}

TEST_CASE("trajectories depend only on seed and id") {
    const auto p = egypt_like_params();
    const auto small = simulate_vital_paths(p, 2020, 6, 10, 77);
    const auto large = simulate_vital_paths(p, 2020, 6, 100, 77);
    for (std::size_t j = 0; j < 10; ++j) {
        CHECK(small.paths[j].tfr == large.paths[j].tfr);
        CHECK(small.paths[j].e0_f == large.paths[j].e0_f);
        CHECK(small.paths[j].e0_m == large.paths[j].e0_m);
        CHECK(small.paths[j].tfr == tfr_path(p.start_tfr, p, 6, 77, j + 1));
    }
    const auto again = simulate_vital_paths(p, 2020, 6, 100, 77);
    for (std::size_t j = 0; j < 100; ++j) {
        CHECK(again.paths[j].tfr == large.paths[j].tfr);
    }
    const auto other = simulate_vital_paths(p, 2020, 6, 10, 78);
    CHECK(other.paths[0].tfr != small.paths[0].tfr);
    CHECK(large.years() == std::vector<int>{2020, 2025, 2030, 2035, 2040, 2045, 2050});
}

TEST_CASE("life table reproduces the requested e0 under independent integration") {
    for (double target : {40.0, 50.0, 60.0, 70.0, 80.0, 85.0}) {
        for (auto sex : {Sex::female, Sex::male}) {
            const auto lt = life_table_from_e0(target, sex);
            CHECK(std::abs(lt.e0 - target) < 1e-6);
            CHECK(std::abs(testing_support::simpson_e0(lt.alpha) - target) < 1e-4);
            const double py = std::accumulate(lt.person_years.begin(), lt.person_years.end(), 0.0);
            CHECK(py == doctest::Approx(lt.e0).epsilon(1e-9));
        }
    }
}

TEST_CASE("survival ratios fall with age and rise with e0") {
    const auto lo = life_table_from_e0(55.0, Sex::female);
    const auto hi = life_table_from_e0(80.0, Sex::female);
    CHECK(lo.survival[16] < lo.survival[4]);
    CHECK(hi.survival[16] < hi.survival[4]);
    for (std::size_t a = 0; a < kAgeGroups; ++a) {
        CHECK(lo.survival[a] > 0.0);
        CHECK(hi.survival[a] <= 1.0);
        CHECK(hi.survival[a] >= lo.survival[a]);
    }
    for (std::size_t a = 2; a + 1 < kAgeGroups; ++a) {
        CHECK(lo.survival[a] >= lo.survival[a + 1]);
    }
    CHECK(hi.birth_survival > lo.birth_survival);
}

TEST_CASE("life table rejects unreachable targets") {
    CHECK_THROWS_AS(life_table_from_e0(15.0, Sex::female), ValidationError);
    CHECK_THROWS_AS(life_table_from_e0(120.0, Sex::male), ValidationError);
    CHECK_THROWS_AS(life_table_from_e0(std::nan(""), Sex::male), ValidationError);
}

TEST_CASE("cohort step matches the dense projection matrix") {
    const auto p = egypt_like_params();
    const auto base = sample_pyramid();
    const auto split = MigrationSplit::standard();
    const auto f = life_table_from_e0(74.0, Sex::female);
    const auto m = life_table_from_e0(69.5, Sex::male);
    const double mig = 150.0;
    const auto step = project_cohorts(base, 3.0, f, m, mig, p, split);
    Eigen::VectorXd expected = leslie(f, m, 3.0, p) * stack(base);
    for (std::size_t a = 0; a < kAgeGroups; ++a) {
        expected(a) += mig * split.female[a];
        expected(kAgeGroups + a) += mig * split.male[a];
    }
    const Eigen::VectorXd got = stack(step.next);
    for (Eigen::Index i = 0; i < got.size(); ++i) {
        CHECK(rel_diff(got(i), expected(i)) < 1e-12);
    }
    CHECK(step.next.year == base.year + 5);
    CHECK_FALSE(step.accounting.clamped);
}

TEST_CASE("immortal population without births or migration is conserved") {
    auto p = egypt_like_params();
    auto base = sample_pyramid();
    const auto lt = immortal_life_table();
    const auto step = project_cohorts(base, 0.0, lt, lt, 0.0, p, MigrationSplit::standard());
    CHECK(step.next.total() == doctest::Approx(base.total()).epsilon(1e-14));
    CHECK(step.next.female[0] == 0.0);
    CHECK(step.next.male[0] == 0.0);
    CHECK(step.next.female[5] == base.female[4]);
    CHECK(step.next.male[20] == base.male[19] + base.male[20]);
    CHECK(step.accounting.deaths == 0.0);
}

TEST_CASE("single cohort survives by its ratio") {
    auto p = egypt_like_params();
    AgeSexPyramid one;
    one.year = 2000;
    one.female[12] = 100.0;
    const auto f = life_table_from_e0(70.0, Sex::female);
    const auto step = project_cohorts(one, 2.0, f, f, 0.0, p, MigrationSplit::standard());
    CHECK(step.next.female[13] == doctest::Approx(100.0 * f.survival[12]).epsilon(1e-15));
    CHECK(step.next.total() == doctest::Approx(100.0 * f.survival[12]).epsilon(1e-15));
}

TEST_CASE("accounting identity holds every step") {
    const auto p = egypt_like_params();
    const auto base = sample_pyramid();
    const std::vector<double> mig{-200, -200, -200, -200, -200, -200};
    const auto pop = generate_population_trajectories(base, p, mig, MigrationSplit::standard(), 6, 200, 5);
    for (std::size_t j = 0; j < pop.pyramids.size(); ++j) {
        for (std::size_t k = 0; k < 6; ++k) {
            const auto &a = pop.accounting[j][k];
            const double before = pop.pyramids.paths[j][k].total();
            const double after = pop.pyramids.paths[j][k + 1].total();
            CHECK(rel_diff(after, before + a.births - a.deaths + a.migration) < 1e-9);
            for (std::size_t g = 0; g < kAgeGroups; ++g) {
                CHECK(pop.pyramids.paths[j][k + 1].female[g] >= 0.0);
                CHECK(pop.pyramids.paths[j][k + 1].male[g] >= 0.0);
            }
        }
    }
}

TEST_CASE("large emigration is clamped and accounted") {
    const auto p = egypt_like_params();
    AgeSexPyramid small;
    small.year = 2020;
    small.female.fill(1.0);
    small.male.fill(1.0);
    const auto f = life_table_from_e0(70.0, Sex::female);
    const auto step = project_cohorts(small, 2.0, f, f, -500.0, p, MigrationSplit::standard());
    CHECK(step.accounting.clamped);
    CHECK(step.accounting.clamped_mass > 0.0);
    const auto &a = step.accounting;
    CHECK(rel_diff(step.next.total(), small.total() + a.births - a.deaths + a.migration) < 1e-9);
    for (std::size_t g = 0; g < kAgeGroups; ++g) {
        CHECK(step.next.female[g] >= 0.0);
        CHECK(step.next.male[g] >= 0.0);
    }
}

TEST_CASE("noiseless population projection matches chained steps") {
    const auto p = noiseless(egypt_like_params());
    const auto base = sample_pyramid();
    const std::vector<double> mig{-100, -150, -200, -250};
    const auto a = generate_population_trajectories(base, p, mig, MigrationSplit::standard(), 4, 3, 1);
    const auto b = generate_population_trajectories(base, p, mig, MigrationSplit::standard(), 4, 7, 99);
    const auto [ef, em] = e0_paths(p.start_e0_f, p, 4, 0, 0);
    const auto tfr = tfr_path(p.start_tfr, p, 4, 0, 0);
    AgeSexPyramid cur = base;
    for (std::size_t k = 0; k < 4; ++k) {
        cur = project_cohorts(cur, tfr[k + 1], ef[k + 1], em[k + 1], mig[k], p, MigrationSplit::standard()).next;
        CHECK(a.pyramids.paths[0][k + 1].female == cur.female);
        CHECK(a.pyramids.paths[2][k + 1].male == cur.male);
        CHECK(b.pyramids.paths[6][k + 1].male == cur.male);
    }
}

TEST_CASE("percentile band of total population widens") {
    const auto p = egypt_like_params();
    const auto base = sample_pyramid();
    const std::vector<double> mig(6, -200.0);
    const auto pop = generate_population_trajectories(base, p, mig, MigrationSplit::standard(), 6, 2000, 2024);
    const auto totals = total_population(pop.pyramids);
    double prev = -1.0;
    for (int year : totals.years) {
        const auto s = totals.slice(year);
        const double width = empirical_quantile(s, 0.95) - empirical_quantile(s, 0.05);
        CHECK(width >= prev * 0.99);
        prev = width;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("annual interpolation hits the knots and midpoints") {
    const auto p = egypt_like_params();
    const auto base = sample_pyramid();
    const std::vector<double> mig(2, -200.0);
    const auto pop = generate_population_trajectories(base, p, mig, MigrationSplit::standard(), 2, 4, 3);
    const auto annual = interpolate_annual(pop.pyramids);
    REQUIRE(annual.years.size() == 11);
    CHECK(annual.years.front() == 2020);
    CHECK(annual.years.back() == 2030);
    for (std::size_t j = 0; j < annual.size(); ++j) {
        CHECK(annual.paths[j][5].female == pop.pyramids.paths[j][1].female);
        const double lo = pop.pyramids.paths[j][1].female[7];
        const double hi = pop.pyramids.paths[j][2].female[7];
        CHECK(annual.paths[j][7].female[7] == doctest::Approx(lo + 0.4 * (hi - lo)).epsilon(1e-14));
    }
}

TEST_CASE("standard migration split sums to one") {
    const auto s = MigrationSplit::standard();
    double sum = 0.0;
    for (std::size_t a = 0; a < kAgeGroups; ++a) {
        sum += s.female[a] + s.male[a];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    MigrationSplit bad = s;
    bad.male[5] += 0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("vital parameters are validated") {
    auto p = egypt_like_params();
    p.fertility_schedule[0] += 0.05;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = egypt_like_params();
    p.var_tfr = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = egypt_like_params();
    p.theta_e0.w1 = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}
