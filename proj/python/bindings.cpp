#include "foodsec/caloric.h"
#include "foodsec/demography.h"
#include "foodsec/pipeline.h"
#include "foodsec/risk.h"
#include "foodsec/scenario.h"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;
using namespace foodsec;

namespace {

AgeSexPyramid pyramid_from(const std::vector<double> &female, const std::vector<double> &male) {
    if (female.size() != kAgeGroups || male.size() != kAgeGroups) {
        throw ValidationError("pyramid needs 21 female and 21 male counts");
    }
    AgeSexPyramid p;
    std::copy(female.begin(), female.end(), p.female.begin());
    std::copy(male.begin(), male.end(), p.male.begin());
    p.validate();
    return p;
}

py::list risk_rows(const RiskAssessment &a) {
    py::list rows;
    for (const auto &r : a.rows) {
        py::dict d;
        d["year"] = r.year;
        d["mean"] = r.mean;
        d["q05"] = r.q05;
        d["q33"] = r.q33;
        d["q50"] = r.q50;
        d["q66"] = r.q66;
        d["q95"] = r.q95;
        d["gamma"] = r.gamma;
        rows.append(d);
    }
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Food security risk projection core";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::enum_<GammaPerspective>(m, "Perspective")
        .value("Zero", GammaPerspective::zero)
        .value("NC", GammaPerspective::nc)
        .value("LC", GammaPerspective::lc)
        .value("VC", GammaPerspective::vc);
    py::enum_<Activity>(m, "Activity")
        .value("NotActive", Activity::not_active)
        .value("SomewhatActive", Activity::somewhat_active)
        .value("VeryActive", Activity::very_active);
    py::enum_<Bound>(m, "Bound")
        .value("lower", Bound::lower)
        .value("upper", Bound::upper)
        .value("midpoint", Bound::midpoint);

    m.def("double_logistic",
          [](double x, double d, double l, double u, double w1, double w2) {
              return double_logistic(x, DoubleLogistic{d, l, u, w1, w2});
          },
          py::arg("x"), py::arg("d"), py::arg("l"), py::arg("u"), py::arg("w1"), py::arg("w2"));

    m.def("life_table_from_e0",
          [](double e0) {
              const auto lt = life_table_from_e0(e0, Sex::female);
              py::dict d;
              d["e0"] = lt.e0;
              d["alpha"] = lt.alpha;
              d["survival"] = std::vector<double>(lt.survival.begin(), lt.survival.end());
              d["birth_survival"] = lt.birth_survival;
              return d;
          },
          py::arg("e0"), "Gompertz-Makeham life table with the requested life expectancy.");

    m.def("classify_level",
          [](const std::vector<double> &values, double q_lo, double q_hi) {
              const QuantileRule rule{q_lo, q_hi};
              rule.validate();
              std::vector<std::string> out;
              for (auto l : classify_level(values, rule)) {
                  out.push_back(to_string(l));
              }
              return out;
          },
          py::arg("values"), py::arg("q_lo") = 1.0 / 3.0, py::arg("q_hi") = 2.0 / 3.0);

    m.def("caloric_requirement",
          [](const std::vector<double> &female, const std::vector<double> &male, Activity activity, Bound bound) {
              return caloric_requirement(pyramid_from(female, male), CaloricTable::standard(), activity, bound);
          },
          py::arg("female"), py::arg("male"), py::arg("activity") = Activity::somewhat_active,
          py::arg("bound") = Bound::midpoint, "Daily kcal for counts in thousands by five-year group.");

    m.def("gamma_value", &gamma_value, py::arg("w_prev"), py::arg("perspective"));
    m.def("fsri", &fsri, py::arg("requirement"), py::arg("capacity"), py::arg("w"), py::arg("gamma"));

    m.def("scenario_names", &ssp_rcp_names);
    m.def("preset_weights",
          [](const std::string &name) { return preset_config(parse_weight_preset(name)).weights; },
          py::arg("name"));

    m.def("wasserstein_barycenter",
          [](const std::vector<std::vector<double>> &samples, const std::vector<double> &weights) {
              const auto b = wasserstein_barycenter_exact(samples, weights);
              return std::pair{b.values, b.probabilities};
          },
          py::arg("samples"), py::arg("weights"), "Atoms and masses of the exact barycenter.");

    m.def("convex_risk",
          [](const std::vector<std::vector<double>> &samples, const std::vector<double> &weights, double theta) {
              return convex_risk(samples, weights, theta);
          },
          py::arg("samples"), py::arg("weights"), py::arg("theta") = kInfiniteTheta);

    m.def("run_pipeline",
          [](const std::filesystem::path &config_path, std::optional<std::size_t> n, std::optional<int> horizon,
             std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> output_dir) {
              auto c = RunConfig::load(config_path);
              if (n) {
                  c.n_trajectories = *n;
              }
              if (horizon) {
                  c.horizon_year = *horizon;
              }
              if (seed) {
                  c.master_seed = *seed;
              }
              if (output_dir) {
                  c.output_dir = *output_dir;
              }
              PipelineResult r;
              {
                  py::gil_scoped_release release;
                  r = run_pipeline(c);
              }
              py::dict out;
              out["hash"] = r.hash;
              out["output_dir"] = r.output_dir;
              out["scenarios"] = r.scenarios;
              out["warnings"] = r.warnings;
              py::dict within;
              for (const auto &[name, a] : r.within) {
                  within[py::str(name)] = risk_rows(a);
              }
              out["within"] = within;
              out["across"] = r.across ? py::object(risk_rows(*r.across)) : py::none();
              return out;
          },
          py::arg("config"), py::arg("n_trajectories") = py::none(), py::arg("horizon_year") = py::none(),
          py::arg("seed") = py::none(), py::arg("output_dir") = py::none());
}
