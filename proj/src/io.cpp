#include "foodsec/io.h"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace foodsec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_record(const std::string &line, const std::string &where) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else {
            cell += c;
        }
    }
    if (quoted) {
        throw ValidationError(where + ": unterminated quoted field");
    }
    out.push_back(was_quoted ? cell : trim(cell));
    return out;
}

} // namespace

CsvTable parse_csv(const std::string &text, const std::string &source) {
    CsvTable t;
    t.source = source;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            continue;
        }
        const auto where = fmt::format("{}:{}", source, line_no);
        auto cells = split_record(line, where);
        if (t.header.empty()) {
            t.header = std::move(cells);
            std::set<std::string> seen;
            for (const auto &h : t.header) {
                if (!seen.insert(h).second) {
                    throw ValidationError(fmt::format("{}: duplicate column '{}'", where, h));
                }
            }
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw ValidationError(fmt::format("{}: expected {} fields, found {}", where,
                                              t.header.size(), cells.size()));
        }
        t.rows.push_back(std::move(cells));
        t.lines.push_back(line_no);
    }
    if (t.header.empty()) {
        throw ValidationError(source + ": empty file (no header row)");
    }
    return t;
}

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write " + path.string());
        }
        out << content;
        if (!out) {
            throw ValidationError("write failed for " + path.string());
        }
    }
    fs::rename(tmp, path);
}

CsvTable read_csv(const fs::path &path) { return parse_csv(read_text(path), path.string()); }

bool CsvTable::has_column(const std::string &name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

std::size_t CsvTable::column(const std::string &name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ValidationError(fmt::format("{}: missing column '{}'", source, name));
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::string CsvTable::where(std::size_t row) const { return fmt::format("{}:{}", source, lines.at(row)); }

const std::string &CsvTable::text(std::size_t row, std::size_t col) const { return rows.at(row).at(col); }

double CsvTable::number(std::size_t row, std::size_t col, bool allow_empty) const {
    const auto &cell = text(row, col);
    if (cell.empty()) {
        if (allow_empty) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        throw ValidationError(fmt::format("{}: empty value in column '{}'", where(row), header[col]));
    }
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ValidationError(
            fmt::format("{}: column '{}' value '{}' is not a number", where(row), header[col], cell));
    }
    return v;
}

int CsvTable::integer(std::size_t row, std::size_t col) const {
    const auto &cell = text(row, col);
    int v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ValidationError(
            fmt::format("{}: column '{}' value '{}' is not an integer", where(row), header[col], cell));
    }
    return v;
}

// ---------------------------------------------------------------------------------------------

AgeSexPyramid read_pyramid_csv(const fs::path &path) {
    const auto t = read_csv(path);
    const auto c_country = t.column("country");
    const auto c_year = t.column("year");
    const auto c_sex = t.column("sex");
    const auto c_age = t.column("age_group");
    const auto c_pop = t.column("population_thousands");
    if (t.rows.empty()) {
        throw ValidationError(t.source + ": no pyramid rows");
    }
    AgeSexPyramid p;
    p.country = t.text(0, c_country);
    p.year = t.integer(0, c_year);
    std::array<std::array<bool, kAgeGroups>, 2> seen{};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.text(r, c_country) != p.country || t.integer(r, c_year) != p.year) {
            throw ValidationError(fmt::format("{}: pyramid file must hold a single country and year", t.where(r)));
        }
        const auto &sex_text = t.text(r, c_sex);
        if (sex_text != "F" && sex_text != "M") {
            throw ValidationError(fmt::format("{}: sex must be F or M, got '{}'", t.where(r), sex_text));
        }
        const auto sex = sex_text == "F" ? Sex::female : Sex::male;
        std::size_t a = 0;
        try {
            a = age_group_index(t.text(r, c_age));
        } catch (const ValidationError &e) {
            throw ValidationError(t.where(r) + ": " + e.what());
        }
        auto &flag = seen[sex == Sex::female ? 0 : 1][a];
        if (flag) {
            throw ValidationError(fmt::format("{}: duplicate {} {} row", t.where(r), sex_text, age_group_label(a)));
        }
        flag = true;
        const double v = t.number(r, c_pop);
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError(fmt::format("{}: population must be non-negative", t.where(r)));
        }
        p.counts(sex)[a] = v;
    }
    for (int s = 0; s < 2; ++s) {
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            if (!seen[s][a]) {
                throw ValidationError(fmt::format("{}: missing {} {} row", t.source, s == 0 ? "F" : "M",
                                                  age_group_label(a)));
            }
        }
    }
    return p;
}

std::string pyramid_csv(const AgeSexPyramid &p) {
    std::string out = "country,year,sex,age_group,population_thousands\n";
    for (auto sex : {Sex::female, Sex::male}) {
        for (std::size_t a = 0; a < kAgeGroups; ++a) {
            out += fmt::format("{},{},{},{},{}\n", p.country, p.year, sex == Sex::female ? "F" : "M",
                               age_group_label(a), format_double(p.counts(sex)[a]));
        }
    }
    return out;
}

namespace {

DoubleLogistic logistic_from_json(const json &j) {
    return {j.at("d").get<double>(), j.at("l").get<double>(), j.at("u").get<double>(),
            j.at("w1").get<double>(), j.at("w2").get<double>()};
}

} // namespace

VitalParams parse_vital_params_json(const std::string &text) {
    VitalParams v;
    try {
        const auto j = json::parse(text);
        v.theta_tfr = logistic_from_json(j.at("theta_tfr"));
        v.theta_e0 = logistic_from_json(j.at("theta_e0"));
        v.var_tfr = j.at("var_tfr").get<double>();
        v.var_e0 = j.at("var_e0").get<double>();
        v.e0_gap.mean = j.at("e0_gap").at("mean").get<double>();
        v.e0_gap.var = j.at("e0_gap").at("var").get<double>();
        const auto &fsched = j.at("fertility_schedule");
        if (fsched.is_array()) {
            if (fsched.size() != kFertileGroups) {
                throw ValidationError("fertility_schedule array must have 7 entries (15-19 ... 45-49)");
            }
            for (std::size_t i = 0; i < kFertileGroups; ++i) {
                v.fertility_schedule[i] = fsched[i].get<double>();
            }
        } else {
            if (fsched.size() != kFertileGroups) {
                throw ValidationError("fertility_schedule must list exactly the groups 15-19 ... 45-49");
            }
            for (const auto &[group, h] : fsched.items()) {
                const auto a = age_group_index(group);
                if (a < kFirstFertileGroup || a >= kFirstFertileGroup + kFertileGroups) {
                    throw ValidationError("fertility_schedule group " + group + " is outside 15-49");
                }
                v.fertility_schedule[a - kFirstFertileGroup] = h.get<double>();
            }
        }
        v.srb = j.value("srb", 1.05);
        v.start_tfr = j.at("start_tfr").get<double>();
        v.start_e0_f = j.at("start_e0_f").get<double>();
    } catch (const json::exception &e) {
        throw ValidationError(std::string("vital params JSON: ") + e.what());
    }
    v.validate();
    return v;
}

VitalParams read_vital_params_json(const fs::path &path) {
    try {
        return parse_vital_params_json(read_text(path));
    } catch (const ValidationError &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

MigrationSchedule read_migration_csv(const fs::path &path) {
    const auto t = read_csv(path);
    const auto c_country = t.column("country");
    const auto c_level = t.column("level");
    const auto c_year = t.column("period_start_year");
    const auto c_net = t.column("net_thousands");
    MigrationSchedule m;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (m.country.empty()) {
            m.country = t.text(r, c_country);
        } else if (t.text(r, c_country) != m.country) {
            throw ValidationError(fmt::format("{}: migration file must hold a single country", t.where(r)));
        }
        Level level{};
        try {
            level = parse_level(t.text(r, c_level));
        } catch (const ValidationError &e) {
            throw ValidationError(t.where(r) + ": " + e.what());
        }
        const int year = t.integer(r, c_year);
        auto &by_period = m.net_by_period[level];
        if (by_period.contains(year)) {
            throw ValidationError(fmt::format("{}: duplicate {} migration for {}", t.where(r), to_string(level), year));
        }
        by_period[year] = t.number(r, c_net);
    }
    return m;
}

namespace {

struct HistoryColumn {
    const char *name;
    std::vector<double> HistoricalRecord::*field;
};

constexpr HistoryColumn kHistoryColumns[] = {
    {"agricultural_land_1000ha", &HistoricalRecord::land},
    {"gdp_per_capita_usd2015", &HistoricalRecord::gdp_per_capita},
    {"labour_total_thousands", &HistoricalRecord::labour_total},
    {"labour_agr_pct", &HistoricalRecord::labour_agr_pct},
    {"population_thousands", &HistoricalRecord::population},
    {"food_supply_kcal_capita_day", &HistoricalRecord::food_supply},
    {"production_tonnes", &HistoricalRecord::production},
    {"export_tonnes", &HistoricalRecord::exports},
    {"import_tonnes", &HistoricalRecord::imports},
    {"precipitation_mm", &HistoricalRecord::precipitation},
    {"temperature_c", &HistoricalRecord::temperature},
    {"water_stress", &HistoricalRecord::water_stress},
};

} // namespace

HistoricalRecord parse_history_csv(const CsvTable &t, IngestLog &log) {
    const auto c_country = t.column("country");
    const auto c_year = t.column("year");
    std::vector<std::size_t> cols;
    for (const auto &hc : kHistoryColumns) {
        cols.push_back(t.column(hc.name));
    }
    if (t.rows.empty()) {
        throw ValidationError(t.source + ": no history rows");
    }
    std::vector<std::size_t> order(t.rows.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        order[r] = r;
    }
    std::vector<int> years;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        years.push_back(t.integer(r, c_year));
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return years[a] < years[b]; });

    HistoricalRecord h;
    h.country = t.text(0, c_country);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto r = order[i];
        if (t.text(r, c_country) != h.country) {
            throw ValidationError(fmt::format("{}: history file must hold a single country", t.where(r)));
        }
        if (i > 0) {
            const int prev = years[order[i - 1]];
            if (years[r] == prev) {
                throw ValidationError(fmt::format("{}: duplicate year {}", t.where(r), years[r]));
            }
            if (years[r] != prev + 1) {
                throw ValidationError(fmt::format("{}: gap in years, missing {}{}", t.source,
                                                  prev + 1,
                                                  years[r] - 1 > prev + 1 ? fmt::format("-{}", years[r] - 1) : ""));
            }
        }
        h.years.push_back(years[r]);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double v = t.number(r, cols[c]);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ValidationError(fmt::format("{}: {} must be positive (it is logged), got {}",
                                                  t.where(r), kHistoryColumns[c].name, t.text(r, cols[c])));
            }
            (h.*kHistoryColumns[c].field).push_back(v);
        }
    }
    auto &w = h.water_stress;
    if (std::any_of(w.begin(), w.end(), [](double v) { return v > 5.0; })) {
        for (double &v : w) {
            v /= 100.0;
        }
        log.warnings.push_back(fmt::format(
            "{}: water_stress values above 5 read as percent and rescaled to fractions", t.source));
    }
    h.validate();
    return h;
}

HistoricalRecord read_history_csv(const fs::path &path, IngestLog &log) {
    return parse_history_csv(read_csv(path), log);
}

DriverTable read_drivers_csv(const fs::path &path) {
    const auto t = read_csv(path);
    const auto c_country = t.column("country");
    const auto c_scen = t.column("scenario");
    const auto c_year = t.column("year");
    const auto c_gdp = t.column("gdp_per_capita_usd2015");
    const auto c_lab = t.column("labour_thousands");
    const auto c_temp = t.column("temperature_c");
    const auto c_prec = t.column("precipitation_mm");
    const auto names = ssp_rcp_names();

    struct Row {
        double gdp, lab, temp, prec;
    };
    std::map<std::string, std::map<int, Row>> rows;
    DriverTable d;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (d.country.empty()) {
            d.country = t.text(r, c_country);
        } else if (t.text(r, c_country) != d.country) {
            throw ValidationError(fmt::format("{}: drivers file must hold a single country", t.where(r)));
        }
        const auto &scen = t.text(r, c_scen);
        if (std::find(names.begin(), names.end(), scen) == names.end()) {
            throw ValidationError(fmt::format("{}: unknown scenario '{}'", t.where(r), scen));
        }
        const int year = t.integer(r, c_year);
        Row row{t.number(r, c_gdp, true), t.number(r, c_lab, true), t.number(r, c_temp, true),
                t.number(r, c_prec, true)};
        for (double v : {row.gdp, row.lab, row.temp, row.prec}) {
            if (!std::isnan(v) && !(v > 0.0)) {
                throw ValidationError(fmt::format("{}: driver values must be positive", t.where(r)));
            }
        }
        if (!rows[scen].emplace(year, row).second) {
            throw ValidationError(fmt::format("{}: duplicate {} row for {}", t.where(r), scen, year));
        }
    }
    for (const auto &[scen, by_year] : rows) {
        auto &p = d.by_scenario[scen];
        for (const auto &[year, row] : by_year) {
            p.years.push_back(year);
            p.gdp_per_capita.push_back(row.gdp);
            p.labour.push_back(row.lab);
            p.temperature.push_back(row.temp);
            p.precipitation.push_back(row.prec);
        }
    }
    return d;
}

CaloricTable read_caloric_table_csv(const fs::path &path) {
    const auto t = read_csv(path);
    const auto c_sex = t.column("sex");
    const auto c_min = t.column("age_min");
    const auto c_max = t.column("age_max");
    const auto c_act = t.column("activity");
    const auto c_kmin = t.column("kcal_min");
    const auto c_kmax = t.column("kcal_max");
    CaloricTable table;
    table.rows.clear();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CaloricBand b;
        const auto &sex = t.text(r, c_sex);
        if (sex != "F" && sex != "M") {
            throw ValidationError(fmt::format("{}: sex must be F or M", t.where(r)));
        }
        b.sex = sex == "F" ? Sex::female : Sex::male;
        b.age_min = t.integer(r, c_min);
        b.age_max = t.text(r, c_max).empty() ? kOpenAge : t.integer(r, c_max);
        try {
            b.activity = parse_activity(t.text(r, c_act));
        } catch (const ValidationError &e) {
            throw ValidationError(t.where(r) + ": " + e.what());
        }
        b.kcal_min = t.number(r, c_kmin);
        b.kcal_max = t.number(r, c_kmax);
        table.rows.push_back(b);
    }
    try {
        table.validate();
    } catch (const ValidationError &e) {
        throw ValidationError(t.source + ": " + e.what());
    }
    return table;
}

std::string caloric_table_csv(const CaloricTable &table) {
    std::string out = "sex,age_min,age_max,activity,kcal_min,kcal_max\n";
    for (const auto &b : table.rows) {
        out += fmt::format("{},{},{},{},{},{}\n", b.sex == Sex::female ? "F" : "M", b.age_min,
                           b.age_max == kOpenAge ? std::string{} : std::to_string(b.age_max),
                           to_string(b.activity), format_double(b.kcal_min), format_double(b.kcal_max));
    }
    return out;
}

RiskMeasureConfig parse_weights_json(const std::string &text) {
    RiskMeasureConfig c;
    try {
        const auto j = json::parse(text);
        double theta = kInfiniteTheta;
        if (j.contains("theta") && !j.at("theta").is_null()) {
            theta = j.at("theta").is_string() ? std::stod(j.at("theta").get<std::string>())
                                              : j.at("theta").get<double>();
        }
        if (j.contains("preset")) {
            c = preset_config(parse_weight_preset(j.at("preset").get<std::string>()), theta);
        } else {
            const auto &w = j.contains("weights") ? j.at("weights") : j;
            c.theta = theta;
            c.scenarios = ssp_rcp_names();
            c.weights.assign(c.scenarios.size(), 0.0);
            for (const auto &[name, value] : w.items()) {
                if (name == "theta" || name == "grid_size") {
                    continue;
                }
                const auto it = std::find(c.scenarios.begin(), c.scenarios.end(), name);
                if (it == c.scenarios.end()) {
                    throw ValidationError("weights: unknown scenario " + name);
                }
                c.weights[static_cast<std::size_t>(it - c.scenarios.begin())] = value.get<double>();
            }
        }
        if (j.contains("grid_size")) {
            c.grid_size = j.at("grid_size").get<std::size_t>();
        }
    } catch (const json::exception &e) {
        throw ValidationError(std::string("weights JSON: ") + e.what());
    }
    c.validate();
    return c;
}

TwoLayerModel read_coefficients_json(const fs::path &path) {
    try {
        return TwoLayerModel::from_json(read_text(path));
    } catch (const ValidationError &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string trajectories_csv(const ScalarTrajectories &set) {
    std::vector<std::size_t> order(set.ids.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        order[j] = j;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return set.ids[a] < set.ids[b]; });
    std::string out = "trajectory_id,year,value\n";
    for (auto j : order) {
        for (std::size_t k = 0; k < set.years.size(); ++k) {
            out += fmt::format("{},{},{}\n", set.ids[j], set.years[k], format_double(set.paths[j][k]));
        }
    }
    return out;
}

ScalarTrajectories parse_trajectories_csv(const CsvTable &t) {
    const auto c_id = t.column("trajectory_id");
    const auto c_year = t.column("year");
    const auto c_val = t.column("value");
    std::map<std::uint64_t, std::map<int, double>> by_id;
    std::set<int> years;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto &id_text = t.text(r, c_id);
        std::uint64_t id = 0;
        const auto res = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
        if (res.ec != std::errc() || res.ptr != id_text.data() + id_text.size()) {
            throw ValidationError(fmt::format("{}: bad trajectory id '{}'", t.where(r), id_text));
        }
        const int year = t.integer(r, c_year);
        years.insert(year);
        if (!by_id[id].emplace(year, t.number(r, c_val)).second) {
            throw ValidationError(fmt::format("{}: duplicate row for trajectory {} year {}", t.where(r), id, year));
        }
    }
    ScalarTrajectories out;
    out.years.assign(years.begin(), years.end());
    for (const auto &[id, values] : by_id) {
        if (values.size() != years.size()) {
            throw ValidationError(fmt::format("{}: trajectory {} does not cover every year", t.source, id));
        }
        out.ids.push_back(id);
        std::vector<double> path;
        for (const auto &[year, v] : values) {
            path.push_back(v);
        }
        out.paths.push_back(std::move(path));
    }
    return out;
}

std::string risk_csv(const RiskAssessment &a) {
    std::string out = "year,mode,mean,q05,q33,q50,q66,q95,gamma\n";
    for (const auto &r : a.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.year, a.mode, format_double(r.mean),
                           format_double(r.q05), format_double(r.q33), format_double(r.q50),
                           format_double(r.q66), format_double(r.q95), format_double(r.gamma));
    }
    return out;
}

RiskAssessment parse_risk_csv(const CsvTable &t) {
    const auto c_year = t.column("year");
    const auto c_mode = t.column("mode");
    const std::array<std::size_t, 7> c{t.column("mean"), t.column("q05"), t.column("q33"), t.column("q50"),
                                       t.column("q66"), t.column("q95"), t.column("gamma")};
    RiskAssessment a;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (a.mode.empty()) {
            a.mode = t.text(r, c_mode);
        }
        RiskRow row;
        row.year = t.integer(r, c_year);
        row.mean = t.number(r, c[0]);
        row.q05 = t.number(r, c[1]);
        row.q33 = t.number(r, c[2]);
        row.q50 = t.number(r, c[3]);
        row.q66 = t.number(r, c[4]);
        row.q95 = t.number(r, c[5]);
        row.gamma = t.number(r, c[6]);
        a.rows.push_back(row);
    }
    return a;
}

} // namespace foodsec
