#include "foodsec/pipeline.h"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace foodsec;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

/// Flags shared by every command that starts from a run configuration.
struct ConfigOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<int> horizon;
    std::optional<int> classification_year;
    std::optional<std::string> country_group;
    std::vector<double> quantiles;
    std::optional<std::string> perspective;
    std::optional<std::string> theta;
    std::optional<std::string> weights;
    std::optional<std::string> land_cap;
    std::optional<std::string> output;
    std::optional<std::string> coefficients;
    bool no_svg{false};

    void attach(CLI::App *cmd) {
        cmd->add_option("-c,--config", config, "Run configuration (JSON)")->required();
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("-n,--trajectories", n, "Number of trajectories");
        cmd->add_option("--horizon", horizon, "Horizon year");
        cmd->add_option("--classification-year", classification_year, "Year whose TFR and e0 are classified");
        cmd->add_option("--country-group", country_group, "HiFert, LoFert or Rich-OECD");
        cmd->add_option("--quantiles", quantiles, "Lower and upper classification probabilities")->expected(2);
        cmd->add_option("--perspective", perspective, "Gamma perspective: Zero, NC, LC, VC");
        cmd->add_option("--theta", theta, "Uncertainty aversion (number or inf)");
        cmd->add_option("--weights", weights, "Weight preset (ignorance, optimistic, pessimistic) or JSON file");
        cmd->add_option("--land-cap", land_cap, "Upper bound on agricultural land (1000 ha) or inf");
        cmd->add_option("-o,--output", output, "Output directory");
        cmd->add_option("--coefficients", coefficients, "Coefficient JSON used instead of calibration");
        cmd->add_flag("--no-svg", no_svg, "Skip SVG fan charts");
    }

    [[nodiscard]] RunConfig load() const {
        auto c = RunConfig::load(config);
        if (seed) {
            c.master_seed = *seed;
        }
        if (n) {
            c.n_trajectories = *n;
        }
        if (horizon) {
            c.horizon_year = *horizon;
        }
        if (classification_year) {
            c.classification_year = *classification_year;
        }
        if (country_group) {
            c.country_group = parse_country_group(*country_group);
        }
        if (!quantiles.empty()) {
            c.quantiles = {quantiles[0], quantiles[1]};
        }
        if (perspective) {
            c.perspective = parse_perspective(*perspective);
        }
        if (theta) {
            c.theta = parse_extended(*theta, "theta");
        }
        if (weights) {
            if (fs::exists(*weights)) {
                c.inputs.weights = *weights;
            } else {
                c.inputs.weights.clear();
                c.custom_weights.clear();
                c.weight_preset = parse_weight_preset(*weights);
            }
        }
        if (land_cap) {
            c.land_cap = parse_extended(*land_cap, "land cap");
        }
        if (output) {
            c.output_dir = *output;
        }
        if (coefficients) {
            c.inputs.coefficients = *coefficients;
        }
        if (no_svg) {
            c.write_svg = false;
        }
        c.validate();
        return c;
    }

    static double parse_extended(const std::string &text, const char *what) {
        if (text == "inf" || text == "infinity") {
            return std::numeric_limits<double>::infinity();
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used == text.size()) {
                return v;
            }
        } catch (const std::exception &) {
        }
        throw ValidationError(fmt::format("{} must be a number or inf, got '{}'", what, text));
    }
};

void print_summary(const PipelineResult &r) {
    std::cout << fmt::format("output: {}\nconfig hash: {}\nscenarios: {}\n", r.output_dir.string(), r.hash,
                             r.scenarios.size());
    for (const auto &[name, a] : r.within) {
        const auto &last = a.rows.back();
        std::cout << fmt::format("  {} {}: mean FSRI {:.4f} [{:.4f}, {:.4f}]\n", name, last.year, last.mean,
                                 last.q05, last.q95);
    }
    if (r.across) {
        const auto &last = r.across->rows.back();
        std::cout << fmt::format("  across {}: mean FSRI {:.4f} [{:.4f}, {:.4f}]\n", last.year, last.mean,
                                 last.q05, last.q95);
    }
    for (const auto &w : r.warnings) {
        std::cout << "warning: " << w << '\n';
    }
}

int cmd_validate(const ConfigOptions &opts) {
    const auto config = opts.load();
    const auto in = ingest(config);
    std::cout << fmt::format("country {}: pyramid {} ({:.1f} thousand), history {}-{}, {} driver scenarios\n",
                             in.pyramid.country, in.pyramid.year, in.pyramid.total(), in.history.years.front(),
                             in.history.years.back(), in.drivers.by_scenario.size());
    if (in.coefficients) {
        std::cout << "coefficients: " << config.inputs.coefficients.string() << '\n';
    }
    for (const auto &w : in.log.warnings) {
        std::cout << "warning: " << w << '\n';
    }
    std::cout << "config hash: " << config_hash(config) << '\n';
    return 0;
}

int cmd_classify(const std::string &store_dir, int year, const std::vector<double> &quantiles,
                 const std::string &group, const std::string &definition_path) {
    const TrajectoryStore store(store_dir);
    const auto tfr = store.get("vitals", "tfr");
    const auto e0 = store.get("vitals", "e0_female");
    const int y = year == 0 ? tfr.years.back() : year;
    QuantileRule rule;
    if (!quantiles.empty()) {
        rule = {quantiles[0], quantiles[1]};
    }
    const auto tfr_at = tfr.slice(y);
    const auto e0_at = e0.slice(y);
    const auto tfr_levels = classify_level(tfr_at, rule);
    const auto e0_levels = classify_level(e0_at, rule);
    const auto definition = definition_path.empty() ? ScenarioDefinition::standard()
                                                    : ScenarioDefinition::from_json(read_text(definition_path));
    const auto g = parse_country_group(group);
    std::map<std::uint64_t, std::string> ssp_of;
    for (auto ssp : kAllSsps) {
        const auto m = compose_ssp_scenario(ssp, g, tfr.ids, tfr_levels, e0_levels, definition);
        std::cout << fmt::format("{}: {} trajectories\n", to_string(ssp), m.ids.size());
        for (auto id : m.ids) {
            ssp_of.emplace(id, to_string(ssp));
        }
    }
    std::string out = "trajectory_id,tfr,e0_female,tfr_level,e0_level,ssp\n";
    for (std::size_t j = 0; j < tfr.ids.size(); ++j) {
        const auto it = ssp_of.find(tfr.ids[j]);
        out += fmt::format("{},{},{},{},{},{}\n", tfr.ids[j], format_double(tfr_at[j]), format_double(e0_at[j]),
                           to_string(tfr_levels[j]), to_string(e0_levels[j]),
                           it == ssp_of.end() ? std::string("none") : it->second);
    }
    write_text(fs::path(store_dir) / "membership.csv", out);
    const auto counts = count_levels(tfr_levels);
    std::cout << fmt::format("TFR levels in {}: {} Low / {} Medium / {} High\n", y, counts.low, counts.medium,
                             counts.high);
    return 0;
}

int cmd_calibrate(const std::string &history_path, const std::string &out_path, int origin,
                  std::optional<double> lambda) {
    IngestLog log;
    const auto history = read_history_csv(history_path, log);
    for (const auto &w : log.warnings) {
        log_stage("calibrate", "warning: " + w);
    }
    LambdaChoice lambdas;
    if (lambda) {
        for (auto t : kAllTargets) {
            lambdas[t] = *lambda;
        }
    }
    const auto model = calibrate_two_layer(history, lambdas, origin);
    write_text(out_path, model.to_json() + "\n");
    for (auto t : kAllTargets) {
        const auto &eq = model.eq(t);
        std::cout << fmt::format("{:5} R2 {:.6f} lambda {:.0e}\n", to_string(t), eq.r2, eq.lambda);
    }
    return 0;
}

int cmd_risk(const std::string &store_dir, const std::string &scenario, const std::string &perspective,
             std::optional<double> w_initial, const std::string &history_path) {
    TrajectoryStore store(store_dir);
    double w0 = 0.0;
    if (w_initial) {
        w0 = *w_initial;
    } else if (!history_path.empty()) {
        IngestLog log;
        w0 = read_history_csv(history_path, log).water_stress.back();
    } else {
        throw ValidationError("risk needs --w-initial or --history for the first-year gamma");
    }
    const auto capacity = store.get(scenario, "fsc_national");
    const auto water = store.get(scenario, "water_stress");
    const auto requirement =
        restrict_years(store.get(scenario, "requirement"), capacity.years.front(), capacity.years.back());
    const auto a = within_scenario_risk(requirement, capacity, water, w0, parse_perspective(perspective), scenario);
    store.put(scenario, "fsri", a.index);
    store.put(scenario, "gamma", a.gamma);
    write_text(store.dir() / ("risk_within__" + scenario + ".csv"), risk_csv(a));
    std::cout << fmt::format("{}: {} years, final mean FSRI {:.4f}\n", scenario, a.rows.size(), a.rows.back().mean);
    return 0;
}

int cmd_risk_across(const std::string &store_dir, const std::string &weights, const std::string &theta_text,
                    std::size_t grid, bool renormalize) {
    const fs::path dir(store_dir);
    RiskMeasureConfig measure;
    if (fs::exists(weights)) {
        measure = parse_weights_json(read_text(weights));
    } else {
        measure = preset_config(parse_weight_preset(weights));
    }
    if (!theta_text.empty()) {
        measure.theta = ConfigOptions::parse_extended(theta_text, "theta");
    }
    measure.grid_size = grid;
    std::map<std::string, RiskAssessment> within;
    for (const auto &name : ssp_rcp_names()) {
        const auto path = dir / ("risk_within__" + name + ".csv");
        if (fs::exists(path)) {
            within[name] = parse_risk_csv(read_csv(path));
        }
    }
    const auto a = across_scenario_risk(within, measure, renormalize);
    write_text(dir / "risk_across.csv", risk_csv(a));
    if (!a.rho.empty()) {
        std::string rho = "year,theta,rho\n";
        for (std::size_t k = 0; k < a.rows.size(); ++k) {
            rho += fmt::format("{},{},{}\n", a.rows[k].year, format_double(measure.theta), format_double(a.rho[k]));
        }
        write_text(dir / "rho_across.csv", rho);
    }
    std::cout << fmt::format("{} scenarios, final mean FSRI {:.4f}\n", within.size(), a.rows.back().mean);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Probabilistic food security risk projections"};
    app.require_subcommand(1);

    ConfigOptions run_opts;
    auto *run = app.add_subcommand("run", "Full pipeline: population, capacity and risk");
    run_opts.attach(run);

    ConfigOptions validate_opts;
    auto *validate = app.add_subcommand("validate", "Ingest and check every input of a configuration");
    validate_opts.attach(validate);

    ConfigOptions sim_opts;
    auto *simulate = app.add_subcommand("simulate-pop", "Vital rates, classification, population and requirements");
    sim_opts.attach(simulate);

    ConfigOptions project_opts;
    auto *project = app.add_subcommand("project", "Pipeline up to food system capacity trajectories");
    project_opts.attach(project);

    std::string store_dir;
    int class_year = 0;
    std::vector<double> class_quantiles;
    std::string group = "HiFert";
    std::string definition;
    auto *classify = app.add_subcommand("classify", "Classify stored TFR and e0 trajectories into SSP cells");
    classify->add_option("--store", store_dir, "Trajectory store directory")->required();
    classify->add_option("--year", class_year, "Classification year (default: last stored year)");
    classify->add_option("--quantiles", class_quantiles, "Lower and upper probabilities")->expected(2);
    classify->add_option("--country-group", group, "HiFert, LoFert or Rich-OECD");
    classify->add_option("--scenario-definition", definition, "Scenario definition JSON");

    std::string history;
    std::string coeff_out = "coefficients.json";
    int origin = 1989;
    std::optional<double> lambda;
    auto *calibrate = app.add_subcommand("calibrate", "Fit the two-layer food system model to history");
    calibrate->add_option("--history", history, "Historical CSV")->required();
    calibrate->add_option("-o,--output", coeff_out, "Coefficient JSON to write");
    calibrate->add_option("--trend-origin", origin, "Year at which the trend term is zero");
    calibrate->add_option("--lambda", lambda, "Fixed ridge penalty (default: leave-one-out choice)");

    std::string risk_store;
    std::string risk_scenario;
    std::string perspective = "LC";
    std::optional<double> w_initial;
    std::string risk_history;
    auto *risk = app.add_subcommand("risk", "Within-scenario risk from stored trajectories");
    risk->add_option("--store", risk_store, "Trajectory store directory")->required();
    risk->add_option("--scenario", risk_scenario, "Scenario name, e.g. SSP2-4.5")->required();
    risk->add_option("--perspective", perspective, "Zero, NC, LC or VC");
    risk->add_option("--w-initial", w_initial, "Water stress of the year before the first projected year");
    risk->add_option("--history", risk_history, "Historical CSV supplying the initial water stress");

    std::string across_store;
    std::string weights = "ignorance";
    std::string theta;
    std::size_t grid = 1024;
    bool renormalize = false;
    auto *across = app.add_subcommand("risk-across", "Across-scenario risk from stored within-scenario rows");
    across->add_option("--store", across_store, "Trajectory store directory")->required();
    across->add_option("--weights", weights, "Preset name or weights JSON");
    across->add_option("--theta", theta, "Uncertainty aversion (number or inf)");
    across->add_option("--grid", grid, "Barycenter grid size");
    across->add_flag("--renormalize", renormalize, "Rescale weights over the scenarios present");

    std::string chart_store;
    std::string quantity;
    std::string chart_scenario;
    bool chart_no_svg = false;
    auto *chart = app.add_subcommand("emit-chart", "Median and 90% band of one stored quantity");
    chart->add_option("--store", chart_store, "Trajectory store directory")->required();
    chart->add_option("--quantity", quantity, "Quantity, e.g. fsri or population")->required();
    chart->add_option("--scenario", chart_scenario, "Scenario name")->required();
    chart->add_flag("--no-svg", chart_no_svg, "Skip the SVG rendering");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (run->parsed()) {
            print_summary(run_pipeline(run_opts.load()));
        } else if (validate->parsed()) {
            return cmd_validate(validate_opts);
        } else if (simulate->parsed()) {
            print_summary(run_pipeline(sim_opts.load(), PipelineStage::population));
        } else if (project->parsed()) {
            print_summary(run_pipeline(project_opts.load(), PipelineStage::capacity));
        } else if (classify->parsed()) {
            return cmd_classify(store_dir, class_year, class_quantiles, group, definition);
        } else if (calibrate->parsed()) {
            return cmd_calibrate(history, coeff_out, origin, lambda);
        } else if (risk->parsed()) {
            return cmd_risk(risk_store, risk_scenario, perspective, w_initial, risk_history);
        } else if (across->parsed()) {
            return cmd_risk_across(across_store, weights, theta, grid, renormalize);
        } else if (chart->parsed()) {
            const auto path = emit_fan_chart_data(TrajectoryStore(chart_store), quantity, chart_scenario, !chart_no_svg);
            std::cout << path.string() << '\n';
        }
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
