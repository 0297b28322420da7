#include "doctest.h"

#include "foodsec/scenario.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

using namespace foodsec;

namespace {

// Interpolated quantile and threshold classification written independently of the library.
double q7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

std::vector<Level> classify_oracle(const std::vector<double> &v, double plo, double phi) {
    const double lo = q7(v, plo);
    const double hi = q7(v, phi);
    std::vector<Level> out;
    for (double x : v) {
        out.push_back(x >= hi ? Level::high : (x < lo ? Level::low : Level::medium));
    }
    return out;
}

DriverPath flat_drivers(int first, int last) {
    DriverPath d;
    for (int y = first; y <= last; ++y) {
        d.years.push_back(y);
        d.gdp_per_capita.push_back(4000.0);
        d.labour.push_back(30000.0);
        d.temperature.push_back(23.0);
        d.precipitation.push_back(20.0);
    }
    return d;
}

std::map<Ssp, SspMembers> all_members() {
    std::map<Ssp, SspMembers> m;
    for (auto ssp : kAllSsps) {
        SspMembers s;
        s.ssp = ssp;
        s.cell = ScenarioDefinition::standard().cell(CountryGroup::hi_fert, ssp);
        s.ids = {static_cast<std::uint64_t>(ssp)};
        m[ssp] = s;
    }
    return m;
}

} // namespace

TEST_CASE("thresholds on 1..100 and boundary values") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    const QuantileRule rule{0.33, 0.66};
    const auto t = level_thresholds(v, rule);
    CHECK(t.lo == doctest::Approx(33.67).epsilon(1e-14));
    CHECK(t.hi == doctest::Approx(66.34).epsilon(1e-14));
    CHECK(classify_value(66.5, t) == Level::high);
    CHECK(classify_value(33.0, t) == Level::low);
    CHECK(classify_value(50.0, t) == Level::medium);
    CHECK(classify_value(t.hi, t) == Level::high);
    CHECK(classify_value(t.lo, t) == Level::medium);
}

TEST_CASE("999 distinct values split into equal thirds") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<double> v(999);
    for (auto &x : v) {
        x = u(rng);
    }
    const auto levels = classify_level(v);
    const auto c = count_levels(levels);
    CHECK(c.low + c.medium + c.high == 999);
    CHECK(std::abs(static_cast<int>(c.low) - 333) <= 1);
    CHECK(std::abs(static_cast<int>(c.medium) - 333) <= 1);
    CHECK(std::abs(static_cast<int>(c.high) - 333) <= 1);
}

TEST_CASE("rank classification agrees with the threshold oracle") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> v(2 + rng() % 400);
        for (auto &x : v) {
            x = static_cast<double>(rng() % 50); // many ties
        }
        for (auto rule : {QuantileRule{}, QuantileRule{0.33, 0.66}, QuantileRule{0.1, 0.9}}) {
            CHECK(classify_level(v, rule) == classify_oracle(v, rule.q_lo, rule.q_hi));
        }
    }
}

TEST_CASE("all equal values are High") {
    const std::vector<double> v(25, 2.1);
    for (auto l : classify_level(v)) {
        CHECK(l == Level::high);
    }
}

TEST_CASE("classification is invariant under increasing transforms") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(777);
    for (auto &x : v) {
        x = std::round(n(rng) * 20.0) / 20.0;
    }
    std::vector<double> cube(v.size());
    std::vector<double> ex(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        cube[i] = v[i] * v[i] * v[i] + 3.0 * v[i];
        ex[i] = std::exp(v[i]);
    }
    const auto base = classify_level(v);
    CHECK(classify_level(cube) == base);
    CHECK(classify_level(ex) == base);
}

TEST_CASE("quantile rule validation") {
    CHECK_THROWS_AS((QuantileRule{0.7, 0.3}).validate(), ValidationError);
    CHECK_THROWS_AS((QuantileRule{0.0, 0.5}).validate(), ValidationError);
    CHECK_THROWS_AS((QuantileRule{0.5, 1.0}).validate(), ValidationError);
    CHECK_NOTHROW((QuantileRule{0.33, 0.66}).validate());
}

TEST_CASE("standard narrative table cells") {
    const auto d = ScenarioDefinition::standard();
    using enum Level;
    auto check = [&](CountryGroup g, Ssp s, Level t, Level e, Level m) {
        const auto &c = d.cell(g, s);
        CHECK(c.tfr == t);
        CHECK(c.e0 == e);
        CHECK(c.migration == m);
    };
    check(CountryGroup::hi_fert, Ssp::ssp1, low, high, medium);
    check(CountryGroup::rich_oecd, Ssp::ssp1, medium, high, medium);
    check(CountryGroup::hi_fert, Ssp::ssp2, medium, medium, medium);
    check(CountryGroup::hi_fert, Ssp::ssp3, high, low, low);
    check(CountryGroup::rich_oecd, Ssp::ssp3, low, low, low);
    check(CountryGroup::hi_fert, Ssp::ssp4, high, low, medium);
    check(CountryGroup::lo_fert, Ssp::ssp4, low, medium, medium);
    check(CountryGroup::lo_fert, Ssp::ssp5, low, high, high);
    check(CountryGroup::rich_oecd, Ssp::ssp5, high, high, high);
}

TEST_CASE("scenario definition json round trip") {
    const auto d = ScenarioDefinition::standard();
    const auto back = ScenarioDefinition::from_json(d.to_json());
    for (auto g : {CountryGroup::hi_fert, CountryGroup::lo_fert, CountryGroup::rich_oecd}) {
        for (auto s : kAllSsps) {
            CHECK(back.cell(g, s).tfr == d.cell(g, s).tfr);
            CHECK(back.cell(g, s).e0 == d.cell(g, s).e0);
            CHECK(back.cell(g, s).migration == d.cell(g, s).migration);
        }
    }
    CHECK_THROWS_AS(ScenarioDefinition::from_json(R"({"HiFert": {"SSP1": {"tfr_level": "Huge"}}})"),
                    ValidationError);
}

TEST_CASE("composition selects exactly the matching cell") {
    std::mt19937_64 rng(4);
    const std::size_t n = 9000;
    std::vector<std::uint64_t> ids(n);
    std::vector<Level> tl(n);
    std::vector<Level> el(n);
    for (std::size_t j = 0; j < n; ++j) {
        ids[j] = j + 1;
        tl[j] = static_cast<Level>(rng() % 3);
        el[j] = static_cast<Level>(rng() % 3);
    }
    const auto d = ScenarioDefinition::standard();
    for (auto ssp : kAllSsps) {
        const auto m = compose_ssp_scenario(ssp, CountryGroup::hi_fert, ids, tl, el);
        const auto &cell = d.cell(CountryGroup::hi_fert, ssp);
        std::set<std::uint64_t> expected;
        for (std::size_t j = 0; j < n; ++j) {
            if (tl[j] == cell.tfr && el[j] == cell.e0) {
                expected.insert(ids[j]);
            }
        }
        CHECK(std::set<std::uint64_t>(m.ids.begin(), m.ids.end()) == expected);
        CHECK(std::is_sorted(m.ids.begin(), m.ids.end()));
        // Binomial(n, 1/9) within three standard deviations.
        const double mu = n / 9.0;
        const double sd = std::sqrt(n * (1.0 / 9.0) * (8.0 / 9.0));
        CHECK(std::abs(static_cast<double>(m.ids.size()) - mu) < 3.0 * sd);
    }
}

TEST_CASE("empty composition reports a diagnostic") {
    const std::vector<std::uint64_t> ids{1, 2};
    const std::vector<Level> tl{Level::high, Level::high};
    const std::vector<Level> el{Level::high, Level::high};
    const auto m = compose_ssp_scenario(Ssp::ssp3, CountryGroup::hi_fert, ids, tl, el);
    CHECK(m.ids.empty());
    CHECK(m.diagnostics.size() == 1);
}

TEST_CASE("CES output with unit inputs") {
    MaGEInputs in;
    CHECK(ces_output(in) == doctest::Approx(0.89663).epsilon(1e-5));
    const long double r = (0.136L - 1.0L) / 0.136L;
    CHECK(ces_output(in) == doctest::Approx(static_cast<double>(std::pow(2.0L, 1.0L / r))).epsilon(1e-14));
}

TEST_CASE("CES output matches an extended precision evaluation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int rep = 0; rep < 200; ++rep) {
        MaGEInputs in{u(rng), u(rng), u(rng), u(rng), u(rng), 0.31, 0.136};
        const long double r = (0.136L - 1.0L) / 0.136L;
        const long double a = 0.31L;
        const long double cobb = in.A_tfp * std::pow(static_cast<long double>(in.K_capital), a) *
                                 std::pow(static_cast<long double>(in.L_labour), 1.0L - a);
        const long double en = static_cast<long double>(in.B_energy) * in.E_energy;
        const long double want = std::pow(std::pow(cobb, r) + std::pow(en, r), 1.0L / r);
        CHECK(ces_output(in) == doctest::Approx(static_cast<double>(want)).epsilon(1e-10));
    }
}

TEST_CASE("CES output is homogeneous and increasing") {
    MaGEInputs in{1.3, 0.8, 2.0, 1.5, 0.9, 0.31, 0.136};
    const double base = ces_output(in);
    MaGEInputs scaled = in;
    scaled.A_tfp *= 2.5;
    scaled.B_energy *= 2.5;
    CHECK(ces_output(scaled) == doctest::Approx(2.5 * base).epsilon(1e-12));
    for (double MaGEInputs::*f : {&MaGEInputs::K_capital, &MaGEInputs::L_labour, &MaGEInputs::E_energy}) {
        MaGEInputs up = in;
        up.*f *= 1.1;
        CHECK(ces_output(up) > base);
    }
    MaGEInputs bad = in;
    bad.K_capital = 0.0;
    CHECK_THROWS_AS(ces_output(bad), ValidationError);
}

TEST_CASE("land cap") {
    const std::vector<double> raw{100.0, 4199.0, 4200.0, 4300.0, 5000.0};
    const auto c = cap_land_projection(raw, 4200.0);
    CHECK(c.values == std::vector<double>{100.0, 4199.0, 4200.0, 4200.0, 4200.0});
    CHECK(c.capped_count() == 2);
    CHECK_FALSE(c.capped[2]);
    CHECK(c.capped[3]);
    const auto open = cap_land_projection(raw, std::numeric_limits<double>::infinity());
    CHECK(open.values == raw);
    CHECK_THROWS_AS(cap_land_projection(raw, 0.0), ValidationError);
}

TEST_CASE("assembly yields the six combined scenarios in order") {
    DriverTable dt;
    for (const auto &name : ssp_rcp_names()) {
        dt.by_scenario[name] = flat_drivers(2019, 2051);
    }
    const auto out = assemble_ssp_rcp(all_members(), dt, 2020, 2050);
    REQUIRE(out.size() == 6);
    const std::vector<std::string> expected{"SSP1-1.9", "SSP1-2.6", "SSP2-4.5", "SSP3-7.0", "SSP4-6.0", "SSP5-8.5"};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(out[i].name == expected[i]);
        CHECK(out[i].drivers.years.front() == 2020);
        CHECK(out[i].drivers.years.back() == 2050);
        CHECK(out[i].member_ids == std::vector<std::uint64_t>{static_cast<std::uint64_t>(out[i].ssp)});
    }
    CHECK(out[3].migration_level == Level::low);
    CHECK(out[5].migration_level == Level::high);
}

TEST_CASE("assembly reports every gap in one error") {
    DriverTable dt;
    for (const auto &name : ssp_rcp_names()) {
        dt.by_scenario[name] = flat_drivers(2020, 2050);
    }
    dt.by_scenario["SSP4-6.0"].temperature[10] = std::nan("");
    dt.by_scenario.erase("SSP1-2.6");
    try {
        assemble_ssp_rcp(all_members(), dt, 2020, 2050);
        FAIL("expected a validation error");
    } catch (const ValidationError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("SSP4-6.0") != std::string::npos);
        CHECK(msg.find("temperature_c") != std::string::npos);
        CHECK(msg.find("2030") != std::string::npos);
        CHECK(msg.find("SSP1-2.6") != std::string::npos);
    }
    dt.by_scenario["SSP1-2.6"] = flat_drivers(2020, 2040);
    dt.by_scenario["SSP4-6.0"] = flat_drivers(2020, 2050);
    CHECK_THROWS_WITH_AS(assemble_ssp_rcp(all_members(), dt, 2020, 2050),
                         doctest::Contains("2041"), ValidationError);
}

TEST_CASE("conditional mean and selection") {
    ScalarTrajectories s;
    s.years = {2020, 2021};
    s.ids = {1, 2, 3};
    s.paths = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 9.0}};
    CHECK(conditional_mean_path(s) == std::vector<double>{3.0, 5.0});
    const std::vector<std::uint64_t> pick{3, 1};
    CHECK(conditional_mean_path(s, pick) == std::vector<double>{3.0, 5.5});
    const auto sel = select_trajectories(s, pick);
    CHECK(sel.ids == std::vector<std::uint64_t>{1, 3});
    const std::vector<std::uint64_t> absent{7};
    CHECK_THROWS_AS(select_trajectories(s, absent), ValidationError);
}
