#include "foodsec/food_capacity.h"
#include "foodsec/parallel.h"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace foodsec {

std::string to_string(Target target) {
    switch (target) {
    case Target::fsc:
        return "FSC";
    case Target::dom:
        return "Dom";
    case Target::w:
        return "W";
    case Target::land:
        return "Land";
    case Target::exp:
        return "Exp";
    case Target::imp:
        return "Imp";
    case Target::lagr:
        return "LAgr";
    }
    return "Unknown";
}

Target parse_target(const std::string &text) {
    for (auto t : kAllTargets) {
        if (text == to_string(t)) {
            return t;
        }
    }
    throw ValidationError("unknown equation target '" + text + "'");
}

std::vector<PredictorSpec> standard_predictors(Target target) {
    switch (target) {
    case Target::fsc:
        return {{"Dom", 0}, {"Exp", 0}, {"Imp", 0}};
    case Target::dom:
        return {{"P", 0}, {"GDP", 1}, {"LAgr", 0}, {"W", 0}, {"Land", 0}, {"T", 0}};
    case Target::w:
        return {{"P", 0}, {"GDP", 1}, {"Dom", 0}, {"Land", 0}, {"T", 0}, {"Pr", 0}};
    case Target::land:
        return {{"P", 0}, {"GDP", 1}, {"Dom", 1}};
    case Target::exp:
    case Target::imp:
        return {{"P", 0}, {"GDP", 1}};
    case Target::lagr:
        return {{"P", 0}, {"GDP", 1}, {"Ltot", 0}};
    }
    return {};
}

double EquationSpec::exponent(const std::string &name) const {
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        if (predictors[j].name == name) {
            return exponents[j];
        }
    }
    throw ValidationError(fmt::format("equation {} has no predictor {}", to_string(target), name));
}

double EquationSpec::evaluate_log(double t, std::span<const double> log_values) const {
    if (log_values.size() != exponents.size()) {
        throw ValidationError(fmt::format("equation {}: expected {} predictor values, got {}",
                                          to_string(target), exponents.size(), log_values.size()));
    }
    double s = std::log(a0) + trend * t;
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        s += exponents[j] * log_values[j];
    }
    return s;
}

double EquationSpec::evaluate(double t, std::span<const double> values) const {
    std::vector<double> logs;
    logs.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] > 0.0) || !std::isfinite(values[j])) {
            throw ValidationError(fmt::format("equation {}: predictor {} must be positive, got {}",
                                              to_string(target),
                                              j < predictors.size() ? predictors[j].name : "?",
                                              values[j]));
        }
        logs.push_back(std::log(values[j]));
    }
    return std::exp(evaluate_log(t, logs));
}

const EquationSpec &TwoLayerModel::eq(Target target) const {
    return equations[static_cast<std::size_t>(target)];
}

EquationSpec &TwoLayerModel::eq(Target target) { return equations[static_cast<std::size_t>(target)]; }

void TwoLayerModel::validate() const {
    for (auto target : kAllTargets) {
        const auto &e = eq(target);
        const auto expected = standard_predictors(target);
        if (e.target != target || e.predictors.size() != expected.size() ||
            e.exponents.size() != expected.size()) {
            throw ValidationError(fmt::format("model equation {} has the wrong predictor form", to_string(target)));
        }
        for (std::size_t j = 0; j < expected.size(); ++j) {
            if (e.predictors[j].name != expected[j].name || e.predictors[j].lag != expected[j].lag) {
                throw ValidationError(fmt::format("model equation {}: predictor {} should be {}",
                                                  to_string(target), j, expected[j].name));
            }
            if (!std::isfinite(e.exponents[j])) {
                throw ValidationError(fmt::format("model equation {}: non-finite exponent", to_string(target)));
            }
        }
        if (!(e.a0 > 0.0) || !std::isfinite(e.a0) || !std::isfinite(e.trend)) {
            throw ValidationError(fmt::format("model equation {}: technology coefficient must be positive",
                                              to_string(target)));
        }
    }
}

TwoLayerModel empty_two_layer_model(const std::string &country, int trend_origin_year) {
    TwoLayerModel m;
    m.country = country;
    m.trend_origin_year = trend_origin_year;
    for (auto target : kAllTargets) {
        auto &e = m.eq(target);
        e.target = target;
        e.predictors = standard_predictors(target);
        e.exponents.assign(e.predictors.size(), 0.0);
    }
    return m;
}

TwoLayerModel TwoLayerModel::from_json(const std::string &text) {
    using nlohmann::json;
    TwoLayerModel m;
    try {
        const auto j = json::parse(text);
        m = empty_two_layer_model(j.value("country", std::string{}), j.value("trend_origin_year", 1989));
        const auto unit = j.value("water_stress_unit", std::string{"fraction"});
        if (unit != "fraction" && unit != "percent") {
            throw ValidationError("water_stress_unit must be 'fraction' or 'percent'");
        }
        const auto &eqs = j.at("equations");
        for (auto target : kAllTargets) {
            const auto name = to_string(target);
            if (!eqs.contains(name)) {
                throw ValidationError("coefficients: missing equation " + name);
            }
            const auto &ej = eqs.at(name);
            auto &e = m.eq(target);
            e.a0 = ej.at("a0").get<double>();
            e.trend = ej.at("trend").get<double>();
            const auto &ex = ej.at("exponents");
            for (const auto &[key, _] : ex.items()) {
                const bool known = std::any_of(e.predictors.begin(), e.predictors.end(),
                                               [&](const PredictorSpec &p) { return p.name == key; });
                if (!known) {
                    throw ValidationError(fmt::format("coefficients: equation {} has no predictor {}", name, key));
                }
            }
            for (std::size_t k = 0; k < e.predictors.size(); ++k) {
                const auto &pname = e.predictors[k].name;
                if (!ex.contains(pname)) {
                    throw ValidationError(fmt::format("coefficients: equation {} lacks exponent {}", name, pname));
                }
                e.exponents[k] = ex.at(pname).get<double>();
            }
            if (ej.contains("r2") && !ej.at("r2").is_null()) {
                e.r2 = ej.at("r2").get<double>();
            }
            if (ej.contains("lambda") && !ej.at("lambda").is_null()) {
                e.lambda = ej.at("lambda").get<double>();
            }
        }
        if (unit == "percent") {
            // W_percent = 100 W: fold the factor into the W and Dom technology coefficients.
            m.eq(Target::w).a0 /= 100.0;
            m.eq(Target::dom).a0 *= std::pow(100.0, m.eq(Target::dom).exponent("W"));
        }
    } catch (const json::exception &e) {
        throw ValidationError(std::string("coefficients JSON: ") + e.what());
    }
    m.validate();
    return m;
}

std::string TwoLayerModel::to_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["country"] = country;
    j["trend_origin_year"] = trend_origin_year;
    j["water_stress_unit"] = "fraction";
    auto &eqs = j["equations"];
    for (auto target : kAllTargets) {
        const auto &e = eq(target);
        ordered_json ej;
        ej["a0"] = e.a0;
        ej["trend"] = e.trend;
        ordered_json ex = ordered_json::object();
        for (std::size_t k = 0; k < e.predictors.size(); ++k) {
            ex[e.predictors[k].name] = e.exponents[k];
        }
        ej["exponents"] = ex;
        ej["r2"] = std::isfinite(e.r2) ? ordered_json(e.r2) : ordered_json(nullptr);
        ej["lambda"] = std::isfinite(e.lambda) ? ordered_json(e.lambda) : ordered_json(nullptr);
        eqs[to_string(target)] = ej;
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------------------------
// Ridge calibration
// ---------------------------------------------------------------------------------------------

namespace {

struct LogData {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    Eigen::VectorXd t;
};

LogData take_logs(const LogDesign &d) {
    const auto n = d.years.size();
    if (d.response.size() != n) {
        throw ValidationError(fmt::format("{}: response length differs from year count", d.response_name));
    }
    if (d.names.size() != d.columns.size()) {
        throw ValidationError(fmt::format("{}: predictor names and columns differ", d.response_name));
    }
    LogData out{Eigen::VectorXd(n), Eigen::MatrixXd(n, d.columns.size()), Eigen::VectorXd(n)};
    auto log_of = [&](double v, const std::string &series, int year) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(
                fmt::format("series {} has nonpositive or non-finite value {} in {}; cannot take logs",
                            series, v, year));
        }
        return std::log(v);
    };
    for (std::size_t i = 0; i < n; ++i) {
        out.y(i) = log_of(d.response[i], d.response_name, d.years[i]);
        out.t(i) = static_cast<double>(d.years[i] - d.trend_origin_year);
        for (std::size_t j = 0; j < d.columns.size(); ++j) {
            if (d.columns[j].size() != n) {
                throw ValidationError(fmt::format("{}: column {} has the wrong length", d.response_name, d.names[j]));
            }
            out.x(i, j) = log_of(d.columns[j][i], d.names[j], d.years[i]);
        }
    }
    return out;
}

struct LogFit {
    double log_a0{0.0};
    double trend{0.0};
    Eigen::VectorXd exponents;
};

LogFit solve_ridge(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const Eigen::VectorXd &t,
                   double lambda) {
    const auto n = y.size();
    const auto p = x.cols();
    Eigen::MatrixXd base(n, 2);
    base.col(0).setOnes();
    base.col(1) = t;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(base);
    if (qr.rank() < 2) {
        throw ValidationError("ridge fit needs at least two distinct years");
    }
    auto residual = [&](const Eigen::VectorXd &v) -> Eigen::VectorXd {
        return v - base * qr.solve(v);
    };

    Eigen::VectorXd mean = x.colwise().mean();
    Eigen::VectorXd scale(p);
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const Eigen::VectorXd centred = x.col(j).array() - mean(j);
        const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(n));
        const double floor = 1e-12 * std::max(1.0, std::abs(mean(j)));
        scale(j) = sd > floor ? sd : 0.0;
        z.col(j) = scale(j) > 0.0 ? Eigen::VectorXd(centred / scale(j)) : Eigen::VectorXd::Zero(n);
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    if (p > 0) {
        Eigen::MatrixXd zr(n, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            zr.col(j) = residual(z.col(j));
        }
        const Eigen::VectorXd yr = residual(y);
        Eigen::MatrixXd gram = zr.transpose() * zr;
        gram.diagonal().array() += lambda;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (scale(j) == 0.0) {
                gram.row(j).setZero();
                gram.col(j).setZero();
                gram(j, j) = 1.0;
            }
        }
        b = gram.ldlt().solve(zr.transpose() * yr);
    }
    const Eigen::Vector2d c = qr.solve(Eigen::VectorXd(y - z * b));

    LogFit fit;
    fit.exponents = Eigen::VectorXd::Zero(p);
    fit.log_a0 = c(0);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (scale(j) > 0.0) {
            fit.exponents(j) = b(j) / scale(j);
            fit.log_a0 -= fit.exponents(j) * mean(j);
        }
    }
    fit.trend = c(1);
    return fit;
}

double predict_log(const LogFit &fit, const Eigen::RowVectorXd &x, double t) {
    return fit.log_a0 + fit.trend * t + x.dot(fit.exponents.transpose());
}

void check_rows(const LogDesign &design) {
    if (design.years.size() < 3) {
        throw ValidationError(fmt::format("{}: ridge fit needs at least 3 rows, got {}",
                                          design.response_name, design.years.size()));
    }
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("ridge penalty must be finite and non-negative");
    }
}

} // namespace

RidgeFit fit_log_ridge(const LogDesign &design, double lambda) {
    check_rows(design);
    check_lambda(lambda);
    const auto data = take_logs(design);
    const auto fit = solve_ridge(data.y, data.x, data.t, lambda);

    RidgeFit out;
    out.a0 = std::exp(fit.log_a0);
    out.trend = fit.trend;
    out.exponents.assign(fit.exponents.data(), fit.exponents.data() + fit.exponents.size());
    out.lambda = lambda;
    const auto n = data.y.size();
    double ssr = 0.0;
    double sst = 0.0;
    const double ybar = data.y.mean();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double f = predict_log(fit, data.x.row(i), data.t(i));
        out.fitted_log.push_back(f);
        out.residual_log.push_back(data.y(i) - f);
        ssr += (data.y(i) - f) * (data.y(i) - f);
        sst += (data.y(i) - ybar) * (data.y(i) - ybar);
    }
    out.r2 = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
    return out;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int e = -6; e <= 2; ++e) {
        grid.push_back(std::pow(10.0, e));
    }
    return grid;
}

double loo_error(const LogDesign &design, double lambda) {
    check_rows(design);
    check_lambda(lambda);
    if (design.years.size() < 4) {
        throw ValidationError(fmt::format("{}: leave-one-out needs at least 4 rows", design.response_name));
    }
    const auto data = take_logs(design);
    const auto n = data.y.size();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd y(n - 1);
        Eigen::MatrixXd x(n - 1, data.x.cols());
        Eigen::VectorXd t(n - 1);
        for (Eigen::Index r = 0, k = 0; r < n; ++r) {
            if (r == i) {
                continue;
            }
            y(k) = data.y(r);
            x.row(k) = data.x.row(r);
            t(k) = data.t(r);
            ++k;
        }
        const auto fit = solve_ridge(y, x, t, lambda);
        const double e = data.y(i) - predict_log(fit, data.x.row(i), data.t(i));
        total += e * e;
    }
    return total / static_cast<double>(n);
}

double select_lambda_loo(const LogDesign &design, std::span<const double> grid) {
    if (grid.empty()) {
        throw ValidationError("empty ridge penalty grid");
    }
    double best = grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        const double err = loo_error(design, lambda);
        if (err < best_err) {
            best_err = err;
            best = lambda;
        }
    }
    return best;
}

const std::vector<double> &HistoricalRecord::series(const std::string &name) const {
    if (name == "P") return population;
    if (name == "GDP") return gdp_per_capita;
    if (name == "Ltot") return labour_total;
    if (name == "LAgr") return labour_agr_pct;
    if (name == "FSC") return food_supply;
    if (name == "Dom") return production;
    if (name == "Exp") return exports;
    if (name == "Imp") return imports;
    if (name == "Pr") return precipitation;
    if (name == "T") return temperature;
    if (name == "W") return water_stress;
    if (name == "Land") return land;
    throw ValidationError("unknown historical series '" + name + "'");
}

void HistoricalRecord::validate() const {
    if (years.size() < 4) {
        throw ValidationError("history needs at least 4 years");
    }
    for (std::size_t i = 1; i < years.size(); ++i) {
        if (years[i] != years[i - 1] + 1) {
            throw ValidationError(fmt::format("history years not contiguous: gap between {} and {}",
                                              years[i - 1], years[i]));
        }
    }
    for (const char *name : {"P", "GDP", "Ltot", "LAgr", "FSC", "Dom", "Exp", "Imp", "Pr", "T", "W", "Land"}) {
        const auto &s = series(name);
        if (s.size() != years.size()) {
            throw ValidationError(fmt::format("history series {} has {} values for {} years", name,
                                              s.size(), years.size()));
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!std::isfinite(s[i])) {
                throw ValidationError(fmt::format("history series {} is not finite in {}", name, years[i]));
            }
        }
    }
}

LogDesign design_for(const HistoricalRecord &history, Target target, int trend_origin_year) {
    history.validate();
    LogDesign d;
    d.response_name = to_string(target);
    d.trend_origin_year = trend_origin_year;
    const auto &response = history.series(to_string(target));
    const auto predictors = standard_predictors(target);
    d.columns.resize(predictors.size());
    for (const auto &p : predictors) {
        d.names.push_back(p.lag == 0 ? p.name : fmt::format("{}(t-{})", p.name, p.lag));
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
        d.years.push_back(history.years[i]);
        d.response.push_back(response[i]);
        for (std::size_t j = 0; j < predictors.size(); ++j) {
            d.columns[j].push_back(history.series(predictors[j].name)[i - predictors[j].lag]);
        }
    }
    return d;
}

TwoLayerModel calibrate_two_layer(const HistoricalRecord &history, const LambdaChoice &lambdas,
                                  int trend_origin_year) {
    auto model = empty_two_layer_model(history.country, trend_origin_year);
    const auto grid = default_lambda_grid();
    for (auto target : kAllTargets) {
        const auto design = design_for(history, target, trend_origin_year);
        const auto chosen = lambdas.find(target);
        const double lambda = chosen != lambdas.end() ? chosen->second : select_lambda_loo(design, grid);
        const auto fit = fit_log_ridge(design, lambda);
        auto &e = model.eq(target);
        e.a0 = fit.a0;
        e.trend = fit.trend;
        e.exponents = fit.exponents;
        e.r2 = fit.r2;
        e.lambda = lambda;
    }
    return model;
}

// ---------------------------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------------------------

namespace {

double positive_log(double v, const char *name, int year) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(fmt::format("{} must be positive in {}, got {}", name, year, v));
    }
    return std::log(v);
}

struct CoupledTerms {
    double k_dom; // ln Dom without the W term
    double k_w;   // ln W without the Dom term
    double b_dom_w;
    double b_w_dom;
};

CoupledTerms coupled_terms(const TwoLayerModel &model, const UpperLayerInputs &in, double land) {
    const int y = in.year;
    const double t = model.t(y);
    const double lp = positive_log(in.population, "population", y);
    const double lg = positive_log(in.gdp_prev, "lagged GDP per capita", y);
    const double lla = positive_log(in.lower.labour_agr, "agricultural labour", y);
    const double la = positive_log(land, "land", y);
    const double lt = positive_log(in.temperature, "temperature", y);
    const double lpr = positive_log(in.precipitation, "precipitation", y);

    const auto &d = model.eq(Target::dom);
    const auto &w = model.eq(Target::w);
    // Predictor order: Dom {P, GDP, LAgr, W, Land, T}; W {P, GDP, Dom, Land, T, Pr}.
    CoupledTerms c{};
    c.b_dom_w = d.exponents[3];
    c.b_w_dom = w.exponents[2];
    c.k_dom = std::log(d.a0) + d.trend * t + d.exponents[0] * lp + d.exponents[1] * lg +
              d.exponents[2] * lla + d.exponents[4] * la + d.exponents[5] * lt;
    c.k_w = std::log(w.a0) + w.trend * t + w.exponents[0] * lp + w.exponents[1] * lg +
            w.exponents[3] * la + w.exponents[4] * lt + w.exponents[5] * lpr;
    return c;
}

void check_coupling(const CoupledTerms &c) {
    const double product = c.b_dom_w * c.b_w_dom;
    if (!(std::abs(product) < 1.0)) {
        throw NumericalError(fmt::format(
            "model instability: Dom-W coupling exponent product {} has magnitude >= 1", product));
    }
}

} // namespace

LowerLayerOutputs project_lower_layer(const TwoLayerModel &model, double population,
                                      double gdp_prev, double labour_total, int year) {
    const double t = model.t(year);
    const std::array<double, 2> pg{population, gdp_prev};
    const std::array<double, 3> pgl{population, gdp_prev, labour_total};
    return {model.eq(Target::exp).evaluate(t, pg), model.eq(Target::imp).evaluate(t, pg),
            model.eq(Target::lagr).evaluate(t, pgl)};
}

double project_land(const TwoLayerModel &model, double population, double gdp_prev,
                    double dom_prev, int year) {
    const std::array<double, 3> v{population, gdp_prev, dom_prev};
    return model.eq(Target::land).evaluate(model.t(year), v);
}

std::pair<double, double> coupled_pair_closed_form(const TwoLayerModel &model,
                                                   const UpperLayerInputs &inputs, double land) {
    const auto c = coupled_terms(model, inputs, land);
    check_coupling(c);
    const double log_dom = (c.k_dom + c.b_dom_w * c.k_w) / (1.0 - c.b_dom_w * c.b_w_dom);
    const double log_w = c.k_w + c.b_w_dom * log_dom;
    return {std::exp(log_dom), std::exp(log_w)};
}

FoodSystemState project_upper_layer(const TwoLayerModel &model, const UpperLayerInputs &in,
                                    const FixedPointOptions &options) {
    if (!(in.land_cap > 0.0)) {
        throw ValidationError("land cap must be positive");
    }
    FoodSystemState s;
    s.year = in.year;
    s.exports = in.lower.exports;
    s.imports = in.lower.imports;
    s.labour_agr = in.lower.labour_agr;

    const double raw_land = project_land(model, in.population, in.gdp_prev, in.dom_prev, in.year);
    s.land_capped = raw_land > in.land_cap;
    s.land = std::min(raw_land, in.land_cap);

    const auto c = coupled_terms(model, in, s.land);
    check_coupling(c);
    double log_dom = positive_log(in.dom_prev, "lagged domestic production", in.year);
    double log_w = positive_log(in.w_prev, "lagged water stress", in.year);

    // Sweep until the pair stops moving; acceptance only needs the configured tolerance.
    constexpr double kSettled = 1e-13;
    std::vector<double> trace;
    double change = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (iter < options.max_iterations) {
        ++iter;
        const double next_dom = c.k_dom + c.b_dom_w * log_w;
        const double next_w = c.k_w + c.b_w_dom * next_dom;
        change = std::max(std::abs(std::expm1(next_dom - log_dom)), std::abs(std::expm1(next_w - log_w)));
        log_dom = next_dom;
        log_w = next_w;
        trace.push_back(change);
        if (change < kSettled) {
            break;
        }
    }
    if (!(change < options.tolerance)) {
        std::string tail;
        for (std::size_t k = trace.size() > 5 ? trace.size() - 5 : 0; k < trace.size(); ++k) {
            tail += fmt::format(" {}:{:.3e}", k + 1, trace[k]);
        }
        throw NumericalError(fmt::format(
            "Dom-W fixed point did not converge in {} iterations for {} (relative changes:{})",
            options.max_iterations, in.year, tail));
    }
    s.iterations = iter;
    s.dom = std::exp(log_dom);
    s.w = std::exp(log_w);

    const std::array<double, 3> fsc_in{s.dom, s.exports, s.imports};
    s.fsc = model.eq(Target::fsc).evaluate(model.t(in.year), fsc_in);
    s.fsc_national = s.fsc * in.population * 1000.0;
    return s;
}

BaseState base_state_from_history(const HistoricalRecord &history) {
    history.validate();
    const auto k = history.size() - 1;
    return {history.years[k], history.production[k], history.water_stress[k], history.land[k],
            history.gdp_per_capita[k]};
}

TrajectorySet<FoodSystemState> project_fsc_trajectories(const TwoLayerModel &model,
                                                        const SspRcpScenario &scenario,
                                                        const ScalarTrajectories &population,
                                                        const BaseState &base, double land_cap,
                                                        const FixedPointOptions &options) {
    model.validate();
    const auto &drivers = scenario.drivers;
    if (drivers.years.empty()) {
        throw ValidationError(fmt::format("{}: no driver years to project", scenario.name));
    }
    if (drivers.years.front() != base.year + 1) {
        throw ValidationError(fmt::format("{}: drivers start in {} but the base state is {}",
                                          scenario.name, drivers.years.front(), base.year));
    }
    std::vector<std::size_t> pop_index;
    for (int y : drivers.years) {
        pop_index.push_back(population.year_index(y));
    }

    TrajectorySet<FoodSystemState> out;
    out.years = drivers.years;
    out.ids = population.ids;
    out.paths.resize(population.paths.size());
    parallel_for(population.paths.size(), [&](std::size_t j) {
        auto &path = out.paths[j];
        path.reserve(drivers.years.size());
        double dom_prev = base.dom;
        double w_prev = base.w;
        double gdp_prev = base.gdp_per_capita;
        for (std::size_t k = 0; k < drivers.years.size(); ++k) {
            const int year = drivers.years[k];
            const double pop = population.paths[j][pop_index[k]];
            UpperLayerInputs in;
            in.lower = project_lower_layer(model, pop, gdp_prev, drivers.labour[k], year);
            in.population = pop;
            in.gdp_prev = gdp_prev;
            in.dom_prev = dom_prev;
            in.w_prev = w_prev;
            in.temperature = drivers.temperature[k];
            in.precipitation = drivers.precipitation[k];
            in.year = year;
            in.land_cap = land_cap;
            path.push_back(project_upper_layer(model, in, options));
            dom_prev = path.back().dom;
            w_prev = path.back().w;
            gdp_prev = drivers.gdp_per_capita[k];
        }
    });
    return out;
}

ScalarTrajectories state_field(const TrajectorySet<FoodSystemState> &set,
                               double FoodSystemState::*field) {
    ScalarTrajectories out;
    out.years = set.years;
    out.ids = set.ids;
    for (const auto &path : set.paths) {
        std::vector<double> v;
        v.reserve(path.size());
        for (const auto &s : path) {
            v.push_back(s.*field);
        }
        out.paths.push_back(std::move(v));
    }
    return out;
}

} // namespace foodsec
