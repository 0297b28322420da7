#include "foodsec/scenario.h"
#include "foodsec/stats.h"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <numeric>

namespace foodsec {

void QuantileRule::validate() const {
    if (!(q_lo > 0.0 && q_lo < q_hi && q_hi < 1.0)) {
        throw ValidationError(
            fmt::format("classification quantiles must satisfy 0 < q_lo < q_hi < 1, got {} and {}",
                        q_lo, q_hi));
    }
}

LevelThresholds level_thresholds(std::span<const double> values, const QuantileRule &rule) {
    rule.validate();
    const auto sorted = sorted_copy(values);
    return {sorted_quantile(sorted, rule.q_lo), sorted_quantile(sorted, rule.q_hi)};
}

Level classify_value(double v, const LevelThresholds &thresholds) {
    if (v >= thresholds.hi) {
        return Level::high;
    }
    if (v < thresholds.lo) {
        return Level::low;
    }
    return Level::medium;
}

namespace {

// Smallest order statistic s with (x >= q(p)) <=> (x >= s) for every sample value x.
double rank_threshold(std::span<const double> sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(h));
    if (h == static_cast<double>(k) || k + 1 >= sorted.size()) {
        return sorted[k];
    }
    // q lies in [x_k, x_{k+1}]; equal to x_k only when the two coincide.
    return sorted[k] == sorted[k + 1] ? sorted[k] : sorted[k + 1];
}

} // namespace

std::vector<Level> classify_level(std::span<const double> values, const QuantileRule &rule) {
    rule.validate();
    if (values.empty()) {
        throw ValidationError("cannot classify an empty sample");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("classification values must be finite");
        }
    }
    const auto sorted = sorted_copy(values);
    const LevelThresholds t{rank_threshold(sorted, rule.q_lo), rank_threshold(sorted, rule.q_hi)};
    std::vector<Level> out;
    out.reserve(values.size());
    for (double v : values) {
        out.push_back(classify_value(v, t));
    }
    return out;
}

LevelCounts count_levels(std::span<const Level> levels) {
    LevelCounts c;
    for (auto l : levels) {
        switch (l) {
        case Level::low:
            ++c.low;
            break;
        case Level::medium:
            ++c.medium;
            break;
        case Level::high:
            ++c.high;
            break;
        }
    }
    return c;
}

// ---------------------------------------------------------------------------------------------

std::string to_string(CountryGroup group) {
    switch (group) {
    case CountryGroup::hi_fert:
        return "HiFert";
    case CountryGroup::lo_fert:
        return "LoFert";
    case CountryGroup::rich_oecd:
        return "Rich-OECD";
    }
    return "Unknown";
}

std::string to_string(Ssp ssp) { return fmt::format("SSP{}", static_cast<int>(ssp)); }

CountryGroup parse_country_group(const std::string &text) {
    for (auto g : {CountryGroup::hi_fert, CountryGroup::lo_fert, CountryGroup::rich_oecd}) {
        if (text == to_string(g)) {
            return g;
        }
    }
    if (text == "RichOECD") {
        return CountryGroup::rich_oecd;
    }
    throw ValidationError("unknown country group '" + text + "' (expected HiFert, LoFert, Rich-OECD)");
}

Ssp parse_ssp(const std::string &text) {
    for (auto s : kAllSsps) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw ValidationError("unknown SSP '" + text + "'");
}

ScenarioDefinition ScenarioDefinition::standard() {
    using enum Level;
    ScenarioDefinition d;
    auto &hi = d.cells[CountryGroup::hi_fert];
    auto &lo = d.cells[CountryGroup::lo_fert];
    auto &rich = d.cells[CountryGroup::rich_oecd];

    hi[Ssp::ssp1] = {low, high, medium};
    lo[Ssp::ssp1] = {low, high, medium};
    rich[Ssp::ssp1] = {medium, high, medium};

    hi[Ssp::ssp2] = {medium, medium, medium};
    lo[Ssp::ssp2] = {medium, medium, medium};
    rich[Ssp::ssp2] = {medium, medium, medium};

    hi[Ssp::ssp3] = {high, low, low};
    lo[Ssp::ssp3] = {high, low, low};
    rich[Ssp::ssp3] = {low, low, low};

    hi[Ssp::ssp4] = {high, low, medium};
    lo[Ssp::ssp4] = {low, medium, medium};
    rich[Ssp::ssp4] = {low, medium, medium};

    hi[Ssp::ssp5] = {low, high, high};
    lo[Ssp::ssp5] = {low, high, high};
    rich[Ssp::ssp5] = {high, high, high};
    return d;
}

ScenarioDefinition ScenarioDefinition::from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("scenario definition: ") + e.what());
    }
    ScenarioDefinition d;
    try {
        for (const auto &[group_name, by_ssp] : j.items()) {
            const auto group = parse_country_group(group_name);
            for (const auto &[ssp_name, cell] : by_ssp.items()) {
                d.cells[group][parse_ssp(ssp_name)] = {
                    parse_level(cell.at("tfr_level").get<std::string>()),
                    parse_level(cell.at("e0_level").get<std::string>()),
                    parse_level(cell.at("mig_level").get<std::string>())};
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("scenario definition: ") + e.what());
    }
    return d;
}

std::string ScenarioDefinition::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto &[group, by_ssp] : cells) {
        auto &g = j[to_string(group)];
        for (const auto &[ssp, cell] : by_ssp) {
            g[to_string(ssp)] = {{"tfr_level", to_string(cell.tfr)},
                                 {"e0_level", to_string(cell.e0)},
                                 {"mig_level", to_string(cell.migration)}};
        }
    }
    return j.dump(2);
}

const LevelCell &ScenarioDefinition::cell(CountryGroup group, Ssp ssp) const {
    const auto g = cells.find(group);
    if (g == cells.end() || !g->second.contains(ssp)) {
        throw ValidationError(
            fmt::format("scenario definition has no cell for {} / {}", to_string(group), to_string(ssp)));
    }
    return g->second.at(ssp);
}

SspMembers compose_ssp_scenario(Ssp ssp, CountryGroup group, std::span<const std::uint64_t> ids,
                                std::span<const Level> tfr_levels,
                                std::span<const Level> e0_levels,
                                const ScenarioDefinition &definition) {
    if (ids.size() != tfr_levels.size() || ids.size() != e0_levels.size()) {
        throw ValidationError("compose_ssp_scenario: ids and level vectors differ in length");
    }
    SspMembers out;
    out.ssp = ssp;
    out.cell = definition.cell(group, ssp);
    for (std::size_t j = 0; j < ids.size(); ++j) {
        if (tfr_levels[j] == out.cell.tfr && e0_levels[j] == out.cell.e0) {
            out.ids.push_back(ids[j]);
        }
    }
    std::sort(out.ids.begin(), out.ids.end());
    if (out.ids.empty()) {
        out.diagnostics.push_back(fmt::format("{} ({}): no trajectory has TFR {} and e0 {}",
                                              to_string(ssp), to_string(group),
                                              to_string(out.cell.tfr), to_string(out.cell.e0)));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

void MaGEInputs::validate() const {
    for (double v : {A_tfp, B_energy, K_capital, L_labour, E_energy}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError("CES inputs must be positive and finite");
        }
    }
    if (!(alpha > 0.0 && alpha < 1.0) || !(sigma > 0.0 && sigma < 1.0)) {
        throw ValidationError("CES elasticities must lie in (0, 1)");
    }
}

double ces_output(const MaGEInputs &in) {
    in.validate();
    const double r = (in.sigma - 1.0) / in.sigma;
    const double cobb = in.A_tfp * std::pow(in.K_capital, in.alpha) * std::pow(in.L_labour, 1.0 - in.alpha);
    const double energy = in.B_energy * in.E_energy;
    return std::pow(std::pow(cobb, r) + std::pow(energy, r), 1.0 / r);
}

std::size_t CappedPath::capped_count() const {
    return static_cast<std::size_t>(std::count(capped.begin(), capped.end(), true));
}

CappedPath cap_land_projection(std::span<const double> raw, double cap) {
    if (!(cap > 0.0)) {
        throw ValidationError("land cap must be positive");
    }
    CappedPath out;
    out.values.reserve(raw.size());
    out.capped.reserve(raw.size());
    for (double v : raw) {
        out.capped.push_back(v > cap);
        out.values.push_back(std::min(v, cap));
    }
    return out;
}

std::vector<std::string> ssp_rcp_names() {
    std::vector<std::string> out;
    for (const auto &s : kSspRcpScenarios) {
        out.emplace_back(s.name);
    }
    return out;
}

std::size_t DriverPath::index(int year) const {
    const auto it = std::lower_bound(years.begin(), years.end(), year);
    if (it == years.end() || *it != year) {
        throw ValidationError(fmt::format("driver path has no year {}", year));
    }
    return static_cast<std::size_t>(it - years.begin());
}

DriverPath DriverPath::window(int first, int last) const {
    DriverPath out;
    for (int y = first; y <= last; ++y) {
        const auto k = index(y);
        out.years.push_back(y);
        out.gdp_per_capita.push_back(gdp_per_capita[k]);
        out.labour.push_back(labour[k]);
        out.temperature.push_back(temperature[k]);
        out.precipitation.push_back(precipitation[k]);
    }
    return out;
}

namespace {

// Groups consecutive missing years into "a-b" ranges.
std::string year_ranges(const std::vector<int> &years) {
    std::string out;
    for (std::size_t i = 0; i < years.size();) {
        std::size_t j = i;
        while (j + 1 < years.size() && years[j + 1] == years[j] + 1) {
            ++j;
        }
        if (!out.empty()) {
            out += ",";
        }
        out += j == i ? std::to_string(years[i]) : fmt::format("{}-{}", years[i], years[j]);
        i = j + 1;
    }
    return out;
}

} // namespace

std::vector<SspRcpScenario> assemble_ssp_rcp(const std::map<Ssp, SspMembers> &members,
                                             const DriverTable &drivers, int first_year,
                                             int last_year) {
    if (first_year > last_year) {
        throw ValidationError("driver window is empty");
    }
    std::vector<std::string> gaps;
    std::vector<SspRcpScenario> out;
    for (const auto &spec : kSspRcpScenarios) {
        const auto m = members.find(spec.ssp);
        if (m == members.end()) {
            gaps.push_back(fmt::format("{}: no population membership for {}", spec.name, to_string(spec.ssp)));
        }
        const auto d = drivers.by_scenario.find(spec.name);
        if (d == drivers.by_scenario.end()) {
            gaps.push_back(fmt::format("{}: no driver data", spec.name));
            continue;
        }
        const auto &path = d->second;
        const std::array<std::pair<const char *, const std::vector<double> *>, 4> columns{{
            {"gdp_per_capita_usd2015", &path.gdp_per_capita},
            {"labour_thousands", &path.labour},
            {"temperature_c", &path.temperature},
            {"precipitation_mm", &path.precipitation},
        }};
        std::vector<int> absent;
        std::array<std::vector<int>, 4> missing;
        for (int y = first_year; y <= last_year; ++y) {
            const auto it = std::lower_bound(path.years.begin(), path.years.end(), y);
            if (it == path.years.end() || *it != y) {
                absent.push_back(y);
                continue;
            }
            const auto k = static_cast<std::size_t>(it - path.years.begin());
            for (std::size_t c = 0; c < columns.size(); ++c) {
                if (!std::isfinite((*columns[c].second)[k])) {
                    missing[c].push_back(y);
                }
            }
        }
        if (!absent.empty()) {
            gaps.push_back(fmt::format("{}: missing years {}", spec.name, year_ranges(absent)));
        }
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (!missing[c].empty()) {
                gaps.push_back(fmt::format("{}: {} missing for {}", spec.name, columns[c].first,
                                           year_ranges(missing[c])));
            }
        }
        if (!absent.empty() || m == members.end()) {
            continue;
        }
        SspRcpScenario s;
        s.name = spec.name;
        s.ssp = spec.ssp;
        s.rcp = spec.rcp;
        s.migration_level = m->second.cell.migration;
        s.member_ids = m->second.ids;
        s.drivers = path.window(first_year, last_year);
        out.push_back(std::move(s));
    }
    if (!gaps.empty()) {
        std::string msg = "scenario driver data incomplete:";
        for (const auto &g : gaps) {
            msg += "\n  " + g;
        }
        throw ValidationError(msg);
    }
    return out;
}

std::vector<double> conditional_mean_path(const ScalarTrajectories &set,
                                          std::span<const std::uint64_t> ids) {
    const auto subset = ids.empty() ? set : select_trajectories(set, ids);
    if (subset.paths.empty()) {
        throw ValidationError("conditional mean over an empty trajectory set");
    }
    std::vector<double> out(subset.years.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        CompensatedSum s;
        for (const auto &p : subset.paths) {
            s.add(p[k]);
        }
        out[k] = s.value() / static_cast<double>(subset.paths.size());
    }
    return out;
}

} // namespace foodsec
