#include "foodsec/pipeline.h"

#include "foodsec/stats.h"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <set>

namespace foodsec {

namespace fs = std::filesystem;
using nlohmann::json;

void log_stage(const std::string &stage, const std::string &message) {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << "[" << stage << "] " << message << '\n';
}

// ---------------------------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------------------------

void RunConfig::validate() const {
    if (n_trajectories < 1) {
        throw ValidationError("n_trajectories must be at least 1");
    }
    if (base_year != 0 && base_year >= horizon_year) {
        throw ValidationError(fmt::format("base_year {} must precede horizon_year {}", base_year, horizon_year));
    }
    quantiles.validate();
    if (!(theta > 0.0)) {
        throw ValidationError("theta must be positive");
    }
    if (grid_size < 1) {
        throw ValidationError("grid_size must be at least 1");
    }
    if (!(land_cap > 0.0)) {
        throw ValidationError("land_cap must be positive");
    }
    if (!(fixed_point.tolerance > 0.0) || fixed_point.max_iterations < 1) {
        throw ValidationError("fixed_point settings must be positive");
    }
    for (const auto &[name, w] : custom_weights) {
        const auto names = ssp_rcp_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw ValidationError("weights: unknown scenario " + name);
        }
        if (!(w >= 0.0)) {
            throw ValidationError("weights must be non-negative");
        }
    }
}

namespace {

double json_extended_double(const json &j, const char *key) {
    if (j.is_null()) {
        return std::numeric_limits<double>::infinity();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "Inf") {
            return std::numeric_limits<double>::infinity();
        }
        throw ValidationError(fmt::format("{}: expected a number or \"inf\", got '{}'", key, s));
    }
    return j.get<double>();
}

json extended_double_json(double v) {
    if (std::isinf(v)) {
        return "inf";
    }
    return v;
}

fs::path resolve(const json &j, const char *key, const fs::path &base) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return {};
    }
    fs::path p = j.at(key).get<std::string>();
    if (p.empty() || p.is_absolute() || base.empty()) {
        return p;
    }
    return base / p;
}

} // namespace

RunConfig RunConfig::from_json(const std::string &text, const fs::path &base_dir) {
    RunConfig c;
    try {
        const auto j = json::parse(text);
        c.country = j.value("country", std::string{});
        if (j.contains("country_group")) {
            c.country_group = parse_country_group(j.at("country_group").get<std::string>());
        }
        c.base_year = j.value("base_year", 0);
        c.horizon_year = j.value("horizon_year", 2050);
        c.n_trajectories = j.value("n_trajectories", std::size_t{1000});
        c.master_seed = j.value("master_seed", std::uint64_t{20240101});
        c.classification_year = j.value("classification_year", 0);
        if (j.contains("quantiles")) {
            const auto &q = j.at("quantiles");
            if (!q.is_array() || q.size() != 2) {
                throw ValidationError("quantiles must be a pair [lo, hi]");
            }
            c.quantiles = {q[0].get<double>(), q[1].get<double>()};
        }
        if (j.contains("perspective")) {
            c.perspective = parse_perspective(j.at("perspective").get<std::string>());
        }
        if (j.contains("theta")) {
            c.theta = json_extended_double(j.at("theta"), "theta");
        }
        if (j.contains("weights")) {
            const auto &w = j.at("weights");
            if (w.is_string()) {
                c.weight_preset = parse_weight_preset(w.get<std::string>());
            } else {
                for (const auto &[name, v] : w.items()) {
                    c.custom_weights[name] = v.get<double>();
                }
            }
        }
        c.grid_size = j.value("grid_size", std::size_t{1024});
        if (j.contains("land_cap")) {
            c.land_cap = json_extended_double(j.at("land_cap"), "land_cap");
        }
        if (j.contains("activity")) {
            c.activity = parse_activity(j.at("activity").get<std::string>());
        }
        if (j.contains("bound")) {
            c.bound = parse_bound(j.at("bound").get<std::string>());
        }
        if (j.contains("fixed_point")) {
            const auto &f = j.at("fixed_point");
            c.fixed_point.tolerance = f.value("tolerance", c.fixed_point.tolerance);
            c.fixed_point.max_iterations = f.value("max_iterations", c.fixed_point.max_iterations);
        }
        if (j.contains("inputs")) {
            const auto &in = j.at("inputs");
            c.inputs.pyramid = resolve(in, "pyramid", base_dir);
            c.inputs.vital_params = resolve(in, "vital_params", base_dir);
            c.inputs.migration = resolve(in, "migration", base_dir);
            c.inputs.history = resolve(in, "history", base_dir);
            c.inputs.drivers = resolve(in, "drivers", base_dir);
            c.inputs.coefficients = resolve(in, "coefficients", base_dir);
            c.inputs.caloric_table = resolve(in, "caloric_table", base_dir);
            c.inputs.scenario_definition = resolve(in, "scenario_definition", base_dir);
            c.inputs.weights = resolve(in, "weights", base_dir);
        }
        if (j.contains("output_dir")) {
            c.output_dir = resolve(j, "output_dir", base_dir);
        }
        c.write_svg = j.value("write_svg", true);
    } catch (const json::exception &e) {
        throw ValidationError(std::string("run config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const fs::path &path) {
    try {
        return from_json(read_text(path), path.parent_path());
    } catch (const ValidationError &e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string RunConfig::canonical_json() const {
    json j;
    j["country"] = country;
    j["country_group"] = to_string(country_group);
    j["base_year"] = base_year;
    j["horizon_year"] = horizon_year;
    j["n_trajectories"] = n_trajectories;
    j["master_seed"] = master_seed;
    j["classification_year"] = classification_year;
    j["quantiles"] = {quantiles.q_lo, quantiles.q_hi};
    j["perspective"] = to_string(perspective);
    j["theta"] = extended_double_json(theta);
    if (custom_weights.empty()) {
        j["weights"] = to_string(weight_preset);
    } else {
        j["weights"] = custom_weights;
    }
    j["grid_size"] = grid_size;
    j["land_cap"] = extended_double_json(land_cap);
    j["activity"] = to_string(activity);
    j["bound"] = to_string(bound);
    j["fixed_point"] = {{"tolerance", fixed_point.tolerance}, {"max_iterations", fixed_point.max_iterations}};
    return j.dump(2);
}

RiskMeasureConfig RunConfig::risk_measure() const {
    RiskMeasureConfig c;
    if (!inputs.weights.empty()) {
        c = parse_weights_json(read_text(inputs.weights));
        if (std::isinf(c.theta)) {
            c.theta = theta;
        }
    } else if (!custom_weights.empty()) {
        c.scenarios = ssp_rcp_names();
        c.theta = theta;
        for (const auto &name : c.scenarios) {
            const auto it = custom_weights.find(name);
            c.weights.push_back(it == custom_weights.end() ? 0.0 : it->second);
        }
    } else {
        c = preset_config(weight_preset, theta);
    }
    c.grid_size = grid_size;
    c.validate();
    return c;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash) {
    for (unsigned char ch : data) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string config_hash(const RunConfig &config) {
    auto h = fnv1a64(config.canonical_json());
    const std::pair<const char *, const fs::path *> files[] = {
        {"pyramid", &config.inputs.pyramid},
        {"vital_params", &config.inputs.vital_params},
        {"migration", &config.inputs.migration},
        {"history", &config.inputs.history},
        {"drivers", &config.inputs.drivers},
        {"coefficients", &config.inputs.coefficients},
        {"caloric_table", &config.inputs.caloric_table},
        {"scenario_definition", &config.inputs.scenario_definition},
        {"weights", &config.inputs.weights},
    };
    for (const auto &[name, path] : files) {
        h = fnv1a64(name, h);
        if (!path->empty()) {
            h = fnv1a64(read_text(*path), h);
        }
    }
    return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------------------------

namespace {

void require_path(const fs::path &p, const char *name) {
    if (p.empty()) {
        throw ValidationError(fmt::format("input '{}' is required", name));
    }
}

} // namespace

Inputs ingest(const RunConfig &config) {
    config.validate();
    const auto &in = config.inputs;
    require_path(in.pyramid, "pyramid");
    require_path(in.vital_params, "vital_params");
    require_path(in.migration, "migration");
    require_path(in.history, "history");
    require_path(in.drivers, "drivers");

    Inputs out;
    out.pyramid = read_pyramid_csv(in.pyramid);
    out.vital_params = read_vital_params_json(in.vital_params);
    out.migration = read_migration_csv(in.migration);
    out.history = read_history_csv(in.history, out.log);
    out.drivers = read_drivers_csv(in.drivers);
    if (!in.coefficients.empty()) {
        out.coefficients = read_coefficients_json(in.coefficients);
    }
    out.caloric_table = in.caloric_table.empty() ? CaloricTable::standard() : read_caloric_table_csv(in.caloric_table);
    out.scenario_definition = in.scenario_definition.empty()
                                  ? ScenarioDefinition::standard()
                                  : ScenarioDefinition::from_json(read_text(in.scenario_definition));

    const std::pair<std::string, const std::string *> countries[] = {
        {in.pyramid.string(), &out.pyramid.country},
        {in.migration.string(), &out.migration.country},
        {in.history.string(), &out.history.country},
        {in.drivers.string(), &out.drivers.country},
    };
    const std::string expected = config.country.empty() ? out.pyramid.country : config.country;
    for (const auto &[file, country] : countries) {
        if (*country != expected) {
            throw ValidationError(fmt::format("{}: country '{}' does not match '{}'", file, *country, expected));
        }
    }

    const int base = config.base_year == 0 ? out.pyramid.year : config.base_year;
    if (base != out.pyramid.year) {
        throw ValidationError(fmt::format("base_year {} differs from the pyramid year {}", base, out.pyramid.year));
    }
    if (base >= config.horizon_year || (config.horizon_year - base) % kPeriodYears != 0) {
        throw ValidationError(fmt::format("horizon {} must lie a positive multiple of {} years after base {}",
                                          config.horizon_year, kPeriodYears, base));
    }
    const int last_hist = out.history.years.back();
    if (base > last_hist + 1) {
        throw ValidationError(fmt::format("base year {} leaves a gap after the last history year {}", base, last_hist));
    }
    if (last_hist >= config.horizon_year) {
        throw ValidationError(fmt::format("history runs to {}, at or beyond the horizon {}", last_hist,
                                          config.horizon_year));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Trajectory store
// ---------------------------------------------------------------------------------------------

TrajectoryStore::TrajectoryStore(fs::path dir) : dir_(std::move(dir)) {}

std::string TrajectoryStore::file_name(const std::string &scenario, const std::string &quantity) {
    if (scenario.empty() || quantity.empty() || scenario.find("__") != std::string::npos ||
        quantity.find("__") != std::string::npos || scenario.find('/') != std::string::npos ||
        quantity.find('/') != std::string::npos) {
        throw ValidationError(fmt::format("invalid store key '{}' / '{}'", scenario, quantity));
    }
    return scenario + "__" + quantity + ".csv";
}

void TrajectoryStore::put(const std::string &scenario, const std::string &quantity, const ScalarTrajectories &set) {
    write_text(dir_ / file_name(scenario, quantity), trajectories_csv(set));
}

bool TrajectoryStore::contains(const std::string &scenario, const std::string &quantity) const {
    return fs::exists(dir_ / file_name(scenario, quantity));
}

ScalarTrajectories TrajectoryStore::get(const std::string &scenario, const std::string &quantity) const {
    const auto path = dir_ / file_name(scenario, quantity);
    if (!fs::exists(path)) {
        throw ValidationError(fmt::format("store {} has no quantity '{}' for scenario '{}'", dir_.string(),
                                          quantity, scenario));
    }
    return parse_trajectories_csv(read_csv(path));
}

std::vector<std::string> TrajectoryStore::scenarios() const {
    std::set<std::string> names;
    if (fs::exists(dir_)) {
        for (const auto &entry : fs::directory_iterator(dir_)) {
            const auto name = entry.path().filename().string();
            const auto sep = name.find("__");
            if (sep == std::string::npos || name.ends_with(".csv") == false || name.starts_with("fan__") ||
                name.starts_with("risk_") || name.starts_with("vitals__")) {
                continue;
            }
            names.insert(name.substr(0, sep));
        }
    }
    return {names.begin(), names.end()};
}

void TrajectoryStore::write_manifest(std::uint64_t seed, const std::string &hash) const {
    std::vector<std::string> files;
    for (const auto &entry : fs::directory_iterator(dir_)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name != "manifest.json" && !name.ends_with(".tmp")) {
            files.push_back(name);
        }
    }
    std::sort(files.begin(), files.end());
    json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = seed;
    j["config_hash"] = hash;
    json list = json::array();
    for (const auto &f : files) {
        list.push_back({{"name", f}, {"fnv1a64", fmt::format("{:016x}", fnv1a64(read_text(dir_ / f)))}});
    }
    j["files"] = list;
    write_text(dir_ / "manifest.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------------------------

ScalarTrajectories restrict_years(const ScalarTrajectories &set, int first, int last) {
    ScalarTrajectories out;
    out.ids = set.ids;
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < set.years.size(); ++k) {
        if (set.years[k] >= first && set.years[k] <= last) {
            keep.push_back(k);
            out.years.push_back(set.years[k]);
        }
    }
    for (const auto &p : set.paths) {
        std::vector<double> v;
        v.reserve(keep.size());
        for (auto k : keep) {
            v.push_back(p[k]);
        }
        out.paths.push_back(std::move(v));
    }
    return out;
}


namespace {

template <typename F>
auto run_stage(const char *stage, F &&body) {
    try {
        return body();
    } catch (const ValidationError &e) {
        throw ValidationError(fmt::format("[{}] {}", stage, e.what()));
    } catch (const NumericalError &e) {
        throw NumericalError(fmt::format("[{}] {}", stage, e.what()));
    }
}

void clear_previous_outputs(const fs::path &dir) {
    if (!fs::exists(dir / "manifest.json")) {
        return;
    }
    for (const auto &entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".csv" || ext == ".svg" || ext == ".json")) {
            fs::remove(entry.path());
        }
    }
}

std::string membership_csv(const std::vector<std::uint64_t> &ids, const std::vector<double> &tfr,
                           const std::vector<double> &e0, const std::vector<Level> &tfr_levels,
                           const std::vector<Level> &e0_levels, const std::map<Ssp, SspMembers> &members) {
    std::map<std::uint64_t, Ssp> ssp_of;
    for (const auto &[ssp, m] : members) {
        for (auto id : m.ids) {
            ssp_of.emplace(id, ssp);
        }
    }
    std::string out = "trajectory_id,tfr,e0_female,tfr_level,e0_level,ssp\n";
    for (std::size_t j = 0; j < ids.size(); ++j) {
        const auto it = ssp_of.find(ids[j]);
        out += fmt::format("{},{},{},{},{},{}\n", ids[j], format_double(tfr[j]), format_double(e0[j]),
                           to_string(tfr_levels[j]), to_string(e0_levels[j]),
                           it == ssp_of.end() ? std::string("none") : to_string(it->second));
    }
    return out;
}

} // namespace

PipelineResult run_pipeline(const RunConfig &config, PipelineStage last_stage) {
    PipelineResult result;
    const auto inputs = run_stage("ingest", [&] { return ingest(config); });
    result.warnings = inputs.log.warnings;
    for (const auto &w : inputs.log.warnings) {
        log_stage("ingest", "warning: " + w);
    }
    result.hash = config_hash(config);
    result.output_dir = config.output_dir;
    fs::create_directories(config.output_dir);
    clear_previous_outputs(config.output_dir);
    TrajectoryStore store(config.output_dir);
    write_text(config.output_dir / "run_config.json", config.canonical_json() + "\n");

    const int base_year = inputs.pyramid.year;
    const int horizon = config.horizon_year;
    const int periods = (horizon - base_year) / kPeriodYears;
    const int class_year = config.classification_year == 0 ? horizon : config.classification_year;

    // Vital rates and classification.
    const auto vitals = run_stage("simulate", [&] {
        log_stage("simulate", fmt::format("{} trajectories, {} periods from {}", config.n_trajectories, periods,
                                          base_year));
        return simulate_vital_paths(inputs.vital_params, base_year, periods, config.n_trajectories,
                                    config.master_seed);
    });
    const auto tfr = vitals.tfr();
    const auto e0_f = vitals.e0_female();
    store.put("vitals", "tfr", tfr);
    store.put("vitals", "e0_female", e0_f);
    store.put("vitals", "e0_male", vitals.e0_male());

    std::map<Ssp, SspMembers> members = run_stage("classify", [&] {
        const auto tfr_at = tfr.slice(class_year);
        const auto e0_at = e0_f.slice(class_year);
        const auto tfr_levels = classify_level(tfr_at, config.quantiles);
        const auto e0_levels = classify_level(e0_at, config.quantiles);
        std::map<Ssp, SspMembers> m;
        for (auto ssp : kAllSsps) {
            m[ssp] = compose_ssp_scenario(ssp, config.country_group, tfr.ids, tfr_levels, e0_levels,
                                          inputs.scenario_definition);
            for (const auto &d : m[ssp].diagnostics) {
                log_stage("classify", "warning: " + d);
                result.warnings.push_back(d);
            }
            log_stage("classify", fmt::format("{}: {} members", to_string(ssp), m[ssp].ids.size()));
        }
        write_text(config.output_dir / "membership.csv",
                   membership_csv(tfr.ids, tfr_at, e0_at, tfr_levels, e0_levels, m));
        return m;
    });

    // Population and caloric requirement per SSP.
    std::map<Ssp, ScalarTrajectories> population;
    std::map<Ssp, ScalarTrajectories> requirement;
    run_stage("population", [&] {
        for (auto ssp : kAllSsps) {
            const auto &m = members.at(ssp);
            if (m.ids.empty()) {
                continue;
            }
            const auto migration = inputs.migration.series(m.cell.migration, base_year, periods);
            const auto projected = project_population(inputs.pyramid, vitals, migration, inputs.vital_params,
                                                      inputs.migration.split, m.ids);
            if (projected.clamp_events > 0) {
                const auto msg = fmt::format("{}: {} negative cohort counts clamped to zero", to_string(ssp),
                                             projected.clamp_events);
                log_stage("population", "warning: " + msg);
                result.warnings.push_back(msg);
            }
            const auto annual = interpolate_annual(projected.pyramids);
            population[ssp] = total_population(annual);
            requirement[ssp] = point_requirements(
                requirement_trajectories(annual, inputs.caloric_table, config.activity, config.bound));
        }
        return 0;
    });

    for (const auto &spec : kSspRcpScenarios) {
        if (!population.contains(spec.ssp)) {
            const auto msg = fmt::format("{}: no trajectories fall in its population cell; scenario skipped", spec.name);
            log_stage("population", "warning: " + msg);
            result.warnings.push_back(msg);
            continue;
        }
        result.scenarios.emplace_back(spec.name);
        store.put(spec.name, "population", population.at(spec.ssp));
        store.put(spec.name, "requirement", requirement.at(spec.ssp));
    }

    if (last_stage == PipelineStage::population) {
        store.write_manifest(config.master_seed, result.hash);
        return result;
    }

    // Food system capacity.
    const auto model = run_stage("calibrate", [&] {
        if (inputs.coefficients) {
            log_stage("calibrate", "using supplied coefficients");
            return *inputs.coefficients;
        }
        log_stage("calibrate", fmt::format("fitting {} years of history", inputs.history.size()));
        return calibrate_two_layer(inputs.history);
    });
    write_text(config.output_dir / "coefficients.json", model.to_json() + "\n");

    const auto base_state = base_state_from_history(inputs.history);
    const int first_year = base_state.year + 1;
    const auto scenarios = run_stage("assemble", [&] {
        // Scenarios without members are reported above; only their drivers are still checked.
        auto assembled = assemble_ssp_rcp(members, inputs.drivers, first_year, horizon);
        std::erase_if(assembled, [&](const SspRcpScenario &s) { return s.member_ids.empty(); });
        return assembled;
    });

    std::map<std::string, RiskAssessment> within;
    for (const auto &scenario : scenarios) {
        const auto states = run_stage("capacity", [&] {
            log_stage("capacity", fmt::format("{}: {} trajectories, {}-{}", scenario.name, scenario.member_ids.size(),
                                              first_year, horizon));
            return project_fsc_trajectories(model, scenario, population.at(scenario.ssp), base_state, config.land_cap,
                                            config.fixed_point);
        });
        const auto capacity = state_field(states, &FoodSystemState::fsc_national);
        const auto water = state_field(states, &FoodSystemState::w);
        store.put(scenario.name, "fsc", state_field(states, &FoodSystemState::fsc));
        store.put(scenario.name, "fsc_national", capacity);
        store.put(scenario.name, "dom", state_field(states, &FoodSystemState::dom));
        store.put(scenario.name, "water_stress", water);
        store.put(scenario.name, "land", state_field(states, &FoodSystemState::land));
        store.put(scenario.name, "exports", state_field(states, &FoodSystemState::exports));
        store.put(scenario.name, "imports", state_field(states, &FoodSystemState::imports));
        store.put(scenario.name, "labour_agr", state_field(states, &FoodSystemState::labour_agr));
        std::size_t capped = 0;
        for (const auto &p : states.paths) {
            capped += static_cast<std::size_t>(std::count_if(p.begin(), p.end(), [](const auto &s) { return s.land_capped; }));
        }
        if (capped > 0) {
            log_stage("capacity", fmt::format("{}: land capped in {} trajectory-years", scenario.name, capped));
        }

        if (last_stage == PipelineStage::risk) {
            within[scenario.name] = run_stage("risk", [&] {
                const auto req = restrict_years(requirement.at(scenario.ssp), first_year, horizon);
                return within_scenario_risk(req, capacity, water, base_state.w, config.perspective, scenario.name);
            });
            store.put(scenario.name, "fsri", within[scenario.name].index);
            store.put(scenario.name, "gamma", within[scenario.name].gamma);
            write_text(config.output_dir / ("risk_within__" + scenario.name + ".csv"),
                       risk_csv(within[scenario.name]));
        }
    }

    if (last_stage == PipelineStage::capacity) {
        store.write_manifest(config.master_seed, result.hash);
        return result;
    }

    result.across = run_stage("risk-across", [&] {
        const auto measure = config.risk_measure();
        const bool renormalize = within.size() < kSspRcpScenarios.size();
        if (renormalize) {
            const auto msg = "across-scenario weights renormalized over the scenarios present";
            log_stage("risk-across", std::string("warning: ") + msg);
            result.warnings.emplace_back(msg);
        }
        return across_scenario_risk(within, measure, renormalize);
    });
    write_text(config.output_dir / "risk_across.csv", risk_csv(*result.across));
    if (!result.across->rho.empty()) {
        std::string rho = "year,theta,rho\n";
        for (std::size_t k = 0; k < result.across->rows.size(); ++k) {
            rho += fmt::format("{},{},{}\n", result.across->rows[k].year, format_double(config.risk_measure().theta),
                               format_double(result.across->rho[k]));
        }
        write_text(config.output_dir / "rho_across.csv", rho);
    }
    result.within = std::move(within);

    run_stage("report", [&] {
        for (const auto &name : result.scenarios) {
            if (!result.within.contains(name)) {
                continue;
            }
            emit_fan_chart_data(store, "fsri", name, config.write_svg);
            emit_fan_chart_data(store, "population", name, config.write_svg);
        }
        return 0;
    });
    store.write_manifest(config.master_seed, result.hash);
    log_stage("report", fmt::format("wrote {} (config hash {})", config.output_dir.string(), result.hash));
    return result;
}

// ---------------------------------------------------------------------------------------------
// Fan charts
// ---------------------------------------------------------------------------------------------

std::vector<FanChartRow> fan_chart(const ScalarTrajectories &set) {
    if (set.paths.empty()) {
        throw ValidationError("fan chart of an empty trajectory set");
    }
    std::vector<FanChartRow> rows;
    for (std::size_t k = 0; k < set.years.size(); ++k) {
        std::vector<double> v;
        v.reserve(set.paths.size());
        for (const auto &p : set.paths) {
            v.push_back(p[k]);
        }
        const auto sorted = sorted_copy(v);
        rows.push_back({set.years[k], sorted_quantile(sorted, 0.5), sorted_quantile(sorted, 0.05),
                        sorted_quantile(sorted, 0.95)});
    }
    return rows;
}

std::string fan_chart_csv(const std::vector<FanChartRow> &rows) {
    std::string out = "year,median,lo90,hi90\n";
    for (const auto &r : rows) {
        out += fmt::format("{},{},{},{}\n", r.year, format_double(r.median), format_double(r.lo90),
                           format_double(r.hi90));
    }
    return out;
}

std::string fan_chart_svg(const std::vector<FanChartRow> &rows, const std::string &title) {
    constexpr double width = 640;
    constexpr double height = 400;
    constexpr double margin = 50;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto &r : rows) {
        lo = std::min(lo, r.lo90);
        hi = std::max(hi, r.hi90);
    }
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const int y0 = rows.front().year;
    const int y1 = rows.back().year;
    const double span = std::max(1, y1 - y0);
    auto px = [&](int year) { return margin + (width - 2 * margin) * (year - y0) / span; };
    auto py = [&](double v) { return height - margin - (height - 2 * margin) * (v - lo) / (hi - lo); };

    std::string band;
    for (const auto &r : rows) {
        band += fmt::format("{:.2f},{:.2f} ", px(r.year), py(r.hi90));
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        band += fmt::format("{:.2f},{:.2f} ", px(it->year), py(it->lo90));
    }
    std::string median;
    for (const auto &r : rows) {
        median += fmt::format("{:.2f},{:.2f} ", px(r.year), py(r.median));
    }
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n"
        "<polygon points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\"/>\n"
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n"
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n"
        "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        width, height, width, height, margin, title, band, median, fmt::arg("m", margin),
        fmt::arg("b", height - margin), fmt::arg("r", width - margin));
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", margin,
                       height - margin + 18, y0);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{}</text>\n",
                       width - margin, height - margin + 18, y1);
    out += fmt::format("<text x=\"5\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.4g}</text>\n",
                       margin, hi);
    out += fmt::format("<text x=\"5\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:.4g}</text>\n",
                       height - margin, lo);
    out += "</svg>\n";
    return out;
}

fs::path emit_fan_chart_data(const TrajectoryStore &store, const std::string &quantity, const std::string &scenario,
                             bool svg) {
    const auto rows = fan_chart(store.get(scenario, quantity));
    const auto stem = "fan__" + scenario + "__" + quantity;
    const auto csv_path = store.dir() / (stem + ".csv");
    write_text(csv_path, fan_chart_csv(rows));
    if (svg) {
        write_text(store.dir() / (stem + ".svg"),
                   fan_chart_svg(rows, fmt::format("{} {}: median and 90% band", scenario, quantity)));
    }
    return csv_path;
}

} // namespace foodsec
