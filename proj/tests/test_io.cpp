#include "doctest.h"
#include "test_support.h"

#include "foodsec/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

using namespace foodsec;
using testing_support::data_dir;
using testing_support::scratch_dir;

namespace {

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(line);
    }
    return out;
}

std::string join(const std::vector<std::string> &lines) {
    std::string out;
    for (const auto &l : lines) {
        out += l + "\n";
    }
    return out;
}

std::string history_text() { return read_text(data_dir() / "egy_history.csv"); }

} // namespace

TEST_CASE("double formatting round trips") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<std::uint64_t> bits;
    int checked = 0;
    while (checked < 5000) {
        const auto b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v)) {
            continue;
        }
        const auto text = format_double(v);
        double back = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), back);
        CHECK(res.ec == std::errc{});
        CHECK(back == v);
        ++checked;
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv parsing handles quotes comments and blank lines") {
    const auto t = parse_csv("# note\na,b,c\n1,\"x, y\",3\n\n4,\"say \"\"hi\"\"\",6\n", "mem.csv");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.text(0, 1) == "x, y");
    CHECK(t.text(1, 1) == "say \"hi\"");
    CHECK(t.lines[1] == 5);
    CHECK(t.number(1, 2) == 6.0);
    CHECK(t.where(1) == "mem.csv:5");
}

TEST_CASE("csv errors name file and line") {
    CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2\n3\n", "f.csv"), doctest::Contains("f.csv:3"), ValidationError);
    CHECK_THROWS_AS(parse_csv("a,a\n1,2\n", "dup.csv"), ValidationError);
    const auto t = parse_csv("a,b\n1,x\n", "g.csv");
    CHECK_THROWS_WITH_AS(static_cast<void>(t.number(0, 1)), doctest::Contains("g.csv:2"), ValidationError);
    CHECK_THROWS_WITH_AS(static_cast<void>(t.column("zzz")), doctest::Contains("zzz"), ValidationError);
}

TEST_CASE("well-formed history is accepted and percent water stress rescaled") {
    IngestLog log;
    const auto h = parse_history_csv(parse_csv(history_text(), "egy_history.csv"), log);
    CHECK(h.country == "EGY");
    CHECK(h.years.front() == 1990);
    CHECK(h.years.back() == 2019);
    CHECK(h.water_stress[0] == doctest::Approx(1.15618).epsilon(1e-15));
    REQUIRE(log.warnings.size() == 1);
    CHECK(log.warnings[0].find("percent") != std::string::npos);
}

TEST_CASE("water stress of 122 percent becomes 1.22") {
    auto lines = lines_of(history_text());
    auto header = lines[0];
    auto fields = [](const std::string &l) {
        std::vector<std::string> f;
        std::stringstream s(l);
        std::string x;
        while (std::getline(s, x, ',')) {
            f.push_back(x);
        }
        return f;
    };
    auto h = fields(header);
    const auto wcol = static_cast<std::size_t>(std::find(h.begin(), h.end(), "water_stress") - h.begin());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = fields(lines[i]);
        f[wcol] = "122";
        std::string joined;
        for (std::size_t k = 0; k < f.size(); ++k) {
            joined += (k ? "," : "") + f[k];
        }
        lines[i] = joined;
    }
    IngestLog log;
    const auto rec = parse_history_csv(parse_csv(join(lines), "pct.csv"), log);
    for (double w : rec.water_stress) {
        CHECK(w == doctest::Approx(1.22).epsilon(1e-15));
    }
    CHECK(log.warnings.size() == 1);
}

TEST_CASE("missing history year is reported") {
    auto lines = lines_of(history_text());
    lines.erase(std::remove_if(lines.begin(), lines.end(),
                               [](const std::string &l) { return l.rfind("EGY,2007,", 0) == 0; }),
                lines.end());
    IngestLog log;
    CHECK_THROWS_WITH_AS(parse_history_csv(parse_csv(join(lines), "gap.csv"), log),
                         doctest::Contains("missing 2007"), ValidationError);
}

TEST_CASE("missing history column is reported") {
    auto lines = lines_of(history_text());
    for (auto &l : lines) {
        l = l.substr(0, l.rfind(','));
    }
    IngestLog log;
    CHECK_THROWS_WITH_AS(parse_history_csv(parse_csv(join(lines), "cols.csv"), log),
                         doctest::Contains("water_stress"), ValidationError);
}

TEST_CASE("nonpositive history values are reported with their line") {
    auto lines = lines_of(history_text());
    auto &l = lines[3];
    const auto first = l.find(',', l.find(',') + 1);
    const auto second = l.find(',', first + 1);
    l = l.substr(0, first + 1) + "-5" + l.substr(second);
    IngestLog log;
    CHECK_THROWS_WITH_AS(parse_history_csv(parse_csv(join(lines), "neg.csv"), log),
                         doctest::Contains("neg.csv:4"), ValidationError);
}

TEST_CASE("pyramid round trip and completeness") {
    const auto p = testing_support::sample_pyramid();
    CHECK(p.country == "EGY");
    CHECK(p.year == 2020);
    CHECK(p.female[0] == 6076.0);
    const auto dir = scratch_dir("io_pyramid");
    write_text(dir / "p.csv", pyramid_csv(p));
    const auto back = read_pyramid_csv(dir / "p.csv");
    CHECK(back.female == p.female);
    CHECK(back.male == p.male);
    auto lines = lines_of(pyramid_csv(p));
    lines.erase(lines.begin() + 10);
    write_text(dir / "short.csv", join(lines));
    CHECK_THROWS_AS(read_pyramid_csv(dir / "short.csv"), ValidationError);
}

TEST_CASE("trajectory csv round trip is exact") {
    std::mt19937_64 rng(52);
    std::normal_distribution<double> z(0.0, 1e5);
    ScalarTrajectories s;
    s.years = {2020, 2021, 2022};
    s.ids = {2, 5, 11};
    for (int j = 0; j < 3; ++j) {
        s.paths.push_back({z(rng), z(rng), z(rng)});
    }
    const auto back = parse_trajectories_csv(parse_csv(trajectories_csv(s), "t.csv"));
    CHECK(back.ids == s.ids);
    CHECK(back.years == s.years);
    CHECK(back.paths == s.paths);
}

TEST_CASE("risk csv round trip is exact") {
    RiskAssessment a;
    a.mode = "within:SSP1-1.9:LC";
    a.rows.push_back({2030, 90.125, 80.0, 85.5, 89.9, 93.1, 99.75, 1.01});
    a.rows.push_back({2031, 0.1 + 0.2, 1.0 / 3.0, 2.0, 3.0, 4.0, 5.0, 0.0});
    const auto back = parse_risk_csv(parse_csv(risk_csv(a), "r.csv"));
    CHECK(back.mode == a.mode);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[1].mean == a.rows[1].mean);
    CHECK(back.rows[1].q05 == a.rows[1].q05);
    CHECK(back.rows[0].gamma == a.rows[0].gamma);
}

TEST_CASE("weights json forms") {
    const auto p = parse_weights_json(R"({"preset": "optimistic", "theta": 2})");
    CHECK(p.weights[0] == 0.5);
    CHECK(p.theta == 2.0);
    const auto m = parse_weights_json(
        R"({"weights": {"SSP1-1.9": 0.5, "SSP1-2.6": 0.5, "SSP2-4.5": 0, "SSP3-7.0": 0, "SSP4-6.0": 0, "SSP5-8.5": 0}})");
    CHECK(m.weight("SSP1-2.6") == 0.5);
    CHECK(std::isinf(m.theta));
    CHECK_THROWS_AS(parse_weights_json(R"({"SSP1-1.9": 0.7})"), ValidationError);
    CHECK_THROWS_AS(parse_weights_json(R"({"preset": "cheerful"})"), ValidationError);
}

TEST_CASE("vital parameters json") {
    const auto v = read_vital_params_json(data_dir() / "egy_vital_params.json");
    CHECK(v.start_tfr == 3.2);
    CHECK(v.fertility_schedule[2] == 0.058);
    CHECK(v.srb == 1.05);
    CHECK_THROWS_AS(parse_vital_params_json(R"({"theta_tfr": {}})"), ValidationError);
}

TEST_CASE("drivers csv with an empty cell") {
    const auto dir = scratch_dir("io_drivers");
    auto lines = lines_of(read_text(data_dir() / "egy_drivers.csv"));
    auto &l = lines[5];
    l = l.substr(0, l.rfind(',') + 1);
    write_text(dir / "d.csv", join(lines));
    const auto d = read_drivers_csv(dir / "d.csv");
    CHECK(d.by_scenario.size() == 6);
    const auto &path = d.by_scenario.at("SSP1-1.9");
    CHECK(std::isnan(path.precipitation[4]));
    CHECK(std::isfinite(path.precipitation[3]));
    lines.push_back("EGY,SSP9-9.9,2020,1,1,1,1");
    write_text(dir / "bad.csv", join(lines));
    CHECK_THROWS_WITH_AS(read_drivers_csv(dir / "bad.csv"), doctest::Contains("SSP9-9.9"), ValidationError);
}

TEST_CASE("caloric table csv round trip") {
    const auto dir = scratch_dir("io_caloric");
    const auto t = CaloricTable::standard();
    write_text(dir / "c.csv", caloric_table_csv(t));
    const auto back = read_caloric_table_csv(dir / "c.csv");
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].age_max == t.rows[i].age_max);
        CHECK(back.rows[i].kcal_min == t.rows[i].kcal_min);
        CHECK(back.rows[i].kcal_max == t.rows[i].kcal_max);
    }
}

TEST_CASE("migration csv") {
    const auto m = read_migration_csv(data_dir() / "egy_migration.csv");
    CHECK(m.country == "EGY");
    const auto s = m.series(Level::high, 2020, 6);
    CHECK(s == std::vector<double>(6, -300.0));
    CHECK_THROWS_AS(static_cast<void>(m.series(Level::low, 2020, 20)), ValidationError);
}
