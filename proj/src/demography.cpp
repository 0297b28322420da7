#include "foodsec/demography.h"
#include "foodsec/parallel.h"
#include "foodsec/random.h"

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foodsec {

namespace {

double logistic(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

void require_finite(double x, const char *what) {
    if (!std::isfinite(x)) {
        throw ValidationError(fmt::format("{} must be finite", what));
    }
}

void check_simulation_args(int horizon, std::size_t n) {
    if (horizon < 1) {
        throw ValidationError("horizon must be at least one period");
    }
    if (n < 1) {
        throw ValidationError("trajectory count must be at least one");
    }
}

std::vector<int> period_years(int base_year, int horizon) {
    std::vector<int> years(static_cast<std::size_t>(horizon) + 1);
    for (std::size_t k = 0; k < years.size(); ++k) {
        years[k] = base_year + kPeriodYears * static_cast<int>(k);
    }
    return years;
}

double integrate_survival(const GompertzMakeham &gm, double from, double to) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    if (to <= from) {
        return 0.0;
    }
    auto f = [&gm](double x) { return gm.survival(x); };
    double total = 0.0;
    for (double a = from; a < to; a += kPeriodYears) {
        total += Rule::integrate(f, a, std::min(to, a + kPeriodYears));
    }
    return total;
}

} // namespace

// ---------------------------------------------------------------------------------------------

void DoubleLogistic::validate(const char *name) const {
    for (double v : {d, l, u, w1, w2}) {
        require_finite(v, name);
    }
    if (!(l < u)) {
        throw ValidationError(fmt::format("{}: lower inflection l must be below u", name));
    }
    if (!(w1 > 0.0 && w2 > 0.0)) {
        throw ValidationError(fmt::format("{}: widths w1, w2 must be positive", name));
    }
}

double double_logistic(double x, const DoubleLogistic &theta) {
    require_finite(x, "double-logistic argument");
    return theta.d * logistic((x - theta.l) / theta.w1) * logistic((theta.u - x) / theta.w2);
}

void VitalParams::validate() const {
    theta_tfr.validate("theta_tfr");
    theta_e0.validate("theta_e0");
    if (!(var_tfr >= 0.0) || !(var_e0 >= 0.0) || !(e0_gap.var >= 0.0)) {
        throw ValidationError("noise variances must be non-negative");
    }
    require_finite(e0_gap.mean, "e0_gap mean");
    double mass = 0.0;
    for (double h : fertility_schedule) {
        if (!(h >= 0.0)) {
            throw ValidationError("fertility schedule entries must be non-negative");
        }
        mass += kPeriodYears * h;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw ValidationError(
            fmt::format("fertility schedule must satisfy sum(5 h_a) = 1, got {:.12f}", mass));
    }
    if (!(srb > 0.0)) {
        throw ValidationError("sex ratio at birth must be positive");
    }
    if (!(start_tfr >= kTfrMin && start_tfr <= kTfrMax)) {
        throw ValidationError("start TFR outside [0.5, 10]");
    }
    if (!(start_e0_f >= kE0Min && start_e0_f <= kE0Max)) {
        throw ValidationError("start female e0 outside [20, 110]");
    }
}

std::vector<double> tfr_path(double start_tfr, const VitalParams &params, int horizon,
                             std::uint64_t master_seed, std::uint64_t trajectory_id) {
    auto rng = make_stream(master_seed, trajectory_id, StreamTag::tfr);
    std::normal_distribution<double> noise(0.0, std::sqrt(params.var_tfr));
    std::vector<double> path(static_cast<std::size_t>(horizon) + 1);
    path[0] = start_tfr;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double f = path[k - 1];
        const double eta = params.var_tfr > 0.0 ? noise(rng) : 0.0;
        path[k] = std::clamp(f - double_logistic(f, params.theta_tfr) + eta, kTfrMin, kTfrMax);
    }
    return path;
}

std::pair<std::vector<double>, std::vector<double>> e0_paths(double start_e0_f,
                                                             const VitalParams &params,
                                                             int horizon,
                                                             std::uint64_t master_seed,
                                                             std::uint64_t trajectory_id) {
    auto rng = make_stream(master_seed, trajectory_id, StreamTag::e0);
    auto gap_rng = make_stream(master_seed, trajectory_id, StreamTag::e0_gap);
    std::normal_distribution<double> noise(0.0, std::sqrt(params.var_e0));
    std::normal_distribution<double> gap_noise(0.0, std::sqrt(params.e0_gap.var));

    const auto len = static_cast<std::size_t>(horizon) + 1;
    std::vector<double> female(len);
    std::vector<double> male(len);
    female[0] = start_e0_f;
    for (std::size_t k = 1; k < len; ++k) {
        const double e = female[k - 1];
        const double eta = params.var_e0 > 0.0 ? noise(rng) : 0.0;
        female[k] = std::clamp(e + double_logistic(e, params.theta_e0) + eta, kE0Min, kE0Max);
    }
    for (std::size_t k = 0; k < len; ++k) {
        const double eps = params.e0_gap.var > 0.0 ? gap_noise(gap_rng) : 0.0;
        const double gap = std::max(0.0, params.e0_gap.mean + eps);
        male[k] = std::clamp(female[k] - gap, kE0Min, kE0Max);
    }
    return {std::move(female), std::move(male)};
}

ScalarTrajectories simulate_tfr_paths(double start_tfr, const VitalParams &params, int horizon,
                                      std::size_t n, std::uint64_t seed, int base_year) {
    check_simulation_args(horizon, n);
    if (!(params.var_tfr >= 0.0)) {
        throw ValidationError("var_tfr must be non-negative");
    }
    ScalarTrajectories out;
    out.years = period_years(base_year, horizon);
    out.ids.resize(n);
    out.paths.resize(n);
    parallel_for(n, [&](std::size_t j) {
        out.ids[j] = j + 1;
        out.paths[j] = tfr_path(start_tfr, params, horizon, seed, j + 1);
    });
    return out;
}

E0Trajectories simulate_e0_paths(double start_e0_f, const VitalParams &params, int horizon,
                                 std::size_t n, std::uint64_t seed, int base_year) {
    check_simulation_args(horizon, n);
    if (!(params.var_e0 >= 0.0) || !(params.e0_gap.var >= 0.0)) {
        throw ValidationError("e0 noise variances must be non-negative");
    }
    E0Trajectories out;
    for (auto *set : {&out.female, &out.male}) {
        set->years = period_years(base_year, horizon);
        set->ids.resize(n);
        set->paths.resize(n);
    }
    parallel_for(n, [&](std::size_t j) {
        auto [f, m] = e0_paths(start_e0_f, params, horizon, seed, j + 1);
        out.female.ids[j] = out.male.ids[j] = j + 1;
        out.female.paths[j] = std::move(f);
        out.male.paths[j] = std::move(m);
    });
    return out;
}

VitalPathSet simulate_vital_paths(const VitalParams &params, int base_year, int horizon,
                                  std::size_t n, std::uint64_t seed) {
    params.validate();
    check_simulation_args(horizon, n);
    VitalPathSet out;
    out.base_year = base_year;
    out.paths.resize(n);
    parallel_for(n, [&](std::size_t j) {
        auto &p = out.paths[j];
        p.trajectory_id = j + 1;
        p.tfr = tfr_path(params.start_tfr, params, horizon, seed, p.trajectory_id);
        std::tie(p.e0_f, p.e0_m) =
            e0_paths(params.start_e0_f, params, horizon, seed, p.trajectory_id);
    });
    return out;
}

std::vector<int> VitalPathSet::years() const {
    if (paths.empty()) {
        return {};
    }
    return period_years(base_year, static_cast<int>(paths.front().tfr.size()) - 1);
}

namespace {
ScalarTrajectories extract(const VitalPathSet &set, std::vector<double> VitalPath::*member) {
    ScalarTrajectories out;
    out.years = set.years();
    for (const auto &p : set.paths) {
        out.ids.push_back(p.trajectory_id);
        out.paths.push_back(p.*member);
    }
    return out;
}
} // namespace

ScalarTrajectories VitalPathSet::tfr() const { return extract(*this, &VitalPath::tfr); }
ScalarTrajectories VitalPathSet::e0_female() const { return extract(*this, &VitalPath::e0_f); }
ScalarTrajectories VitalPathSet::e0_male() const { return extract(*this, &VitalPath::e0_m); }

const VitalPath &VitalPathSet::find(std::uint64_t id) const {
    auto it = std::lower_bound(paths.begin(), paths.end(), id,
                               [](const VitalPath &p, std::uint64_t v) { return p.trajectory_id < v; });
    if (it == paths.end() || it->trajectory_id != id) {
        throw ValidationError(fmt::format("trajectory {} not present in vital path set", id));
    }
    return *it;
}

// ---------------------------------------------------------------------------------------------

double GompertzMakeham::cumulative_hazard(double age) const noexcept {
    return gamma0 * age + alpha / beta * std::expm1(beta * age);
}

double GompertzMakeham::survival(double age) const noexcept {
    return std::exp(-cumulative_hazard(age));
}

double GompertzMakeham::terminal_age() const noexcept {
    constexpr double kLogFloor = 60.0;
    const double by_gompertz = std::log1p(kLogFloor * beta / alpha) / beta;
    return std::min(by_gompertz, kLogFloor / gamma0);
}

LifeTable life_table_from_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("Gompertz level alpha must be positive");
    }
    const GompertzMakeham gm{alpha};
    const double end = std::max(gm.terminal_age(), 110.0);

    LifeTable lt;
    lt.alpha = alpha;
    constexpr std::size_t closed = kAgeGroups - 1;
    for (std::size_t a = 0; a < closed; ++a) {
        const double x = static_cast<double>(kPeriodYears * a);
        lt.person_years[a] = integrate_survival(gm, x, x + kPeriodYears);
    }
    const double t100 = integrate_survival(gm, 100.0, end);
    const double t105 = integrate_survival(gm, 105.0, end);
    lt.person_years[closed] = t100;

    for (std::size_t a = 0; a + 1 < closed; ++a) {
        lt.survival[a] = lt.person_years[a + 1] / lt.person_years[a];
    }
    const double t95 = lt.person_years[closed - 1] + t100;
    lt.survival[closed - 1] = t100 / t95;
    lt.survival[closed] = t100 > 0.0 ? t105 / t100 : 0.0;
    lt.birth_survival = lt.person_years[0] / kPeriodYears;
    lt.e0 = std::accumulate(lt.person_years.begin(), lt.person_years.end(), 0.0);
    return lt;
}

double gompertz_makeham_e0(double alpha) { return life_table_from_alpha(alpha).e0; }

LifeTable life_table_from_e0(double e0_target, Sex /*sex*/) {
    if (!std::isfinite(e0_target) || e0_target < kE0Min || e0_target > kE0Max) {
        throw ValidationError(fmt::format("e0 target {} outside [20, 110]", e0_target));
    }
    // e0 is strictly decreasing in alpha.
    double lo = std::log(1e-14);
    double hi = std::log(10.0);
    LifeTable at_lo = life_table_from_alpha(std::exp(lo));
    LifeTable at_hi = life_table_from_alpha(std::exp(hi));
    if (at_lo.e0 < e0_target || at_hi.e0 > e0_target) {
        throw NumericalError(fmt::format(
            "life table: e0 target {} not bracketed by Gompertz-Makeham range [{}, {}]",
            e0_target, at_hi.e0, at_lo.e0));
    }
    // Illinois false position on log(alpha); the bracket is kept throughout.
    double f_lo = at_lo.e0 - e0_target;
    double f_hi = at_hi.e0 - e0_target;
    int side = 0;
    LifeTable mid_table = std::abs(f_lo) < std::abs(f_hi) ? at_lo : at_hi;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(mid > lo && mid < hi)) {
            mid = 0.5 * (lo + hi);
        }
        mid_table = life_table_from_alpha(std::exp(mid));
        const double diff = mid_table.e0 - e0_target;
        if (std::abs(diff) < 1e-8) {
            return mid_table;
        }
        if (diff > 0.0) {
            lo = mid;
            f_lo = diff;
            if (side == -1) {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = diff;
            if (side == 1) {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if (hi - lo < 1e-15) {
            break;
        }
    }
    if (std::abs(mid_table.e0 - e0_target) >= 1e-6) {
        throw NumericalError(fmt::format("life table iteration stalled at e0 {} for target {}",
                                         mid_table.e0, e0_target));
    }
    return mid_table;
}

LifeTable immortal_life_table() {
    LifeTable lt;
    lt.survival.fill(1.0);
    lt.birth_survival = 1.0;
    lt.person_years.fill(static_cast<double>(kPeriodYears));
    lt.e0 = std::numeric_limits<double>::infinity();
    return lt;
}

// ---------------------------------------------------------------------------------------------

void MigrationSplit::validate() const {
    double total = 0.0;
    for (const auto *v : {&female, &male}) {
        for (double w : *v) {
            if (!std::isfinite(w)) {
                throw ValidationError("migration split weights must be finite");
            }
            total += w;
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError(fmt::format("migration age-sex split sums to {:.12f}, not 1", total));
    }
}

MigrationSplit MigrationSplit::standard() {
    MigrationSplit s;
    constexpr std::array<double, 5> profile{0.10, 0.25, 0.30, 0.20, 0.15};
    for (std::size_t i = 0; i < profile.size(); ++i) {
        s.female[3 + i] = 0.5 * profile[i];
        s.male[3 + i] = 0.5 * profile[i];
    }
    return s;
}

std::vector<double> MigrationSchedule::series(Level level, int base_year, int horizon) const {
    std::vector<double> out;
    const auto it = net_by_period.find(level);
    for (int k = 0; k < horizon; ++k) {
        const int start = base_year + kPeriodYears * k;
        if (it == net_by_period.end() || !it->second.contains(start)) {
            throw ValidationError(fmt::format("migration: no {} net migration for period starting {}",
                                              to_string(level), start));
        }
        out.push_back(it->second.at(start));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

CohortStep project_cohorts(const AgeSexPyramid &pyramid, double tfr, const LifeTable &female,
                           const LifeTable &male, double net_migration,
                           const VitalParams &params, const MigrationSplit &split) {
    if (!std::isfinite(tfr) || tfr < 0.0 || !std::isfinite(net_migration)) {
        throw ValidationError("project_cohorts: TFR and migration must be finite, TFR >= 0");
    }
    CohortStep step;
    step.next.country = pyramid.country;
    step.next.year = pyramid.year + kPeriodYears;
    auto &acc = step.accounting;

    double births = 0.0;
    for (std::size_t i = 0; i < kFertileGroups; ++i) {
        births += tfr * params.fertility_schedule[i] * kPeriodYears *
                  pyramid.female[kFirstFertileGroup + i];
    }
    const double births_female = births / (1.0 + params.srb);
    const double births_male = births - births_female;
    acc.births = births;

    double deaths = 0.0;
    const auto survive = [&](Sex sex, const LifeTable &lt, double sex_births) {
        const auto &from = pyramid.counts(sex);
        auto &to = step.next.counts(sex);
        constexpr std::size_t open = kAgeGroups - 1;
        for (std::size_t a = 0; a < open; ++a) {
            const double moved = from[a] * lt.survival[a];
            deaths += from[a] - moved;
            if (a + 1 == open) {
                to[open] += moved;
            } else {
                to[a + 1] = moved;
            }
        }
        const double stayed = from[open] * lt.survival[open];
        deaths += from[open] - stayed;
        to[open] += stayed;

        to[0] = sex_births * lt.birth_survival;
        deaths += sex_births - to[0];
    };
    survive(Sex::female, female, births_female);
    survive(Sex::male, male, births_male);
    acc.deaths = deaths;

    acc.requested_migration = net_migration;
    for (auto sex : {Sex::female, Sex::male}) {
        auto &to = step.next.counts(sex);
        const auto &w = sex == Sex::female ? split.female : split.male;
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            to[a] += net_migration * w[a];
            if (to[a] < 0.0) {
                acc.clamped = true;
                acc.clamped_mass += -to[a];
                to[a] = 0.0;
            }
        }
    }
    acc.migration = net_migration + acc.clamped_mass;
    return step;
}

CohortStep project_cohorts(const AgeSexPyramid &pyramid, double tfr, double e0_f, double e0_m,
                           double net_migration, const VitalParams &params,
                           const MigrationSplit &split) {
    return project_cohorts(pyramid, tfr, life_table_from_e0(e0_f, Sex::female),
                           life_table_from_e0(e0_m, Sex::male), net_migration, params, split);
}

PopulationTrajectories project_population(const AgeSexPyramid &base, const VitalPathSet &vitals,
                                          std::span<const double> migration,
                                          const VitalParams &params, const MigrationSplit &split,
                                          std::span<const std::uint64_t> ids) {
    base.validate();
    split.validate();
    if (vitals.paths.empty()) {
        throw ValidationError("project_population: empty vital path set");
    }
    if (vitals.base_year != base.year) {
        throw ValidationError(fmt::format("vital paths start {} but base pyramid is {}",
                                          vitals.base_year, base.year));
    }
    const auto horizon = vitals.paths.front().tfr.size() - 1;
    if (migration.size() < horizon) {
        throw ValidationError("migration series shorter than projection horizon");
    }

    std::vector<const VitalPath *> selected;
    if (ids.empty()) {
        for (const auto &p : vitals.paths) {
            selected.push_back(&p);
        }
    } else {
        for (auto id : ids) {
            selected.push_back(&vitals.find(id));
        }
        std::sort(selected.begin(), selected.end(),
                  [](const VitalPath *a, const VitalPath *b) { return a->trajectory_id < b->trajectory_id; });
    }

    PopulationTrajectories out;
    out.pyramids.years = vitals.years();
    out.pyramids.ids.resize(selected.size());
    out.pyramids.paths.resize(selected.size());
    out.accounting.resize(selected.size());

    parallel_for(selected.size(), [&](std::size_t j) {
        const auto &v = *selected[j];
        auto &path = out.pyramids.paths[j];
        auto &acc = out.accounting[j];
        out.pyramids.ids[j] = v.trajectory_id;
        path.reserve(horizon + 1);
        acc.reserve(horizon);
        path.push_back(base);
        for (std::size_t k = 0; k < horizon; ++k) {
            auto step = project_cohorts(path.back(), v.tfr[k + 1], v.e0_f[k + 1], v.e0_m[k + 1],
                                        migration[k], params, split);
            path.push_back(std::move(step.next));
            acc.push_back(step.accounting);
        }
    });
    for (const auto &acc : out.accounting) {
        out.clamp_events += static_cast<std::size_t>(
            std::count_if(acc.begin(), acc.end(), [](const StepAccounting &s) { return s.clamped; }));
    }
    return out;
}

PopulationTrajectories generate_population_trajectories(const AgeSexPyramid &base,
                                                        const VitalParams &params,
                                                        std::span<const double> migration,
                                                        const MigrationSplit &split, int horizon,
                                                        std::size_t n, std::uint64_t seed) {
    const auto vitals = simulate_vital_paths(params, base.year, horizon, n, seed);
    return project_population(base, vitals, migration, params, split);
}

TrajectorySet<AgeSexPyramid> interpolate_annual(const TrajectorySet<AgeSexPyramid> &pyramids) {
    TrajectorySet<AgeSexPyramid> out;
    out.ids = pyramids.ids;
    if (pyramids.years.empty()) {
        out.paths.resize(pyramids.paths.size());
        return out;
    }
    const int first = pyramids.years.front();
    const int last = pyramids.years.back();
    for (int y = first; y <= last; ++y) {
        out.years.push_back(y);
    }
    out.paths.resize(pyramids.paths.size());
    for (std::size_t j = 0; j < pyramids.paths.size(); ++j) {
        const auto &knots = pyramids.paths[j];
        auto &annual = out.paths[j];
        annual.reserve(out.years.size());
        for (int y : out.years) {
            std::size_t k = 0;
            while (k + 1 < pyramids.years.size() && pyramids.years[k + 1] <= y) {
                ++k;
            }
            if (pyramids.years[k] == y || k + 1 == pyramids.years.size()) {
                annual.push_back(knots[k]);
                annual.back().year = y;
                continue;
            }
            const double w = static_cast<double>(y - pyramids.years[k]) /
                             static_cast<double>(pyramids.years[k + 1] - pyramids.years[k]);
            AgeSexPyramid p = knots[k];
            p.year = y;
            for (auto sex : {Sex::female, Sex::male}) {
                for (std::size_t a = 0; a < kAgeGroups; ++a) {
                    p.counts(sex)[a] =
                        (1.0 - w) * knots[k].counts(sex)[a] + w * knots[k + 1].counts(sex)[a];
                }
            }
            annual.push_back(p);
        }
    }
    return out;
}

ScalarTrajectories total_population(const TrajectorySet<AgeSexPyramid> &pyramids) {
    ScalarTrajectories out;
    out.years = pyramids.years;
    out.ids = pyramids.ids;
    out.paths.reserve(pyramids.paths.size());
    for (const auto &path : pyramids.paths) {
        std::vector<double> totals;
        totals.reserve(path.size());
        for (const auto &p : path) {
            totals.push_back(p.total());
        }
        out.paths.push_back(std::move(totals));
    }
    return out;
}

} // namespace foodsec
