#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "elab/choice_model.hpp"
#include "elab/competition.hpp"
#include "elab/error.hpp"
#include "elab/pipeline.hpp"
#include "elab/policy_space.hpp"
#include "elab/regression.hpp"
#include "elab/utility_forms.hpp"

namespace py = pybind11;
using namespace elab;

namespace {

template <class E>
void bind_enum_values(py::enum_<E>& e, std::initializer_list<std::pair<const char*, E>> values) {
    for (const auto& [name, v] : values) e.value(name, v);
}

py::dict dynamics_to_dict(const DynamicsResult& r) {
    py::dict d;
    if (const auto* c = std::get_if<Converged>(&r)) {
        d["kind"] = "converged";
        d["p1"] = c->p1;
        d["p2"] = c->p2;
        d["iterations"] = c->iterations;
    } else if (const auto* cy = std::get_if<Cycle>(&r)) {
        d["kind"] = "cycle";
        d["states"] = cy->states;
        d["platforms"] = cy->platforms;
        if (cy->witness) {
            d["witness"] = py::make_tuple(cy->witness->x_left, cy->witness->x_left_prime, cy->witness->x_right);
        } else {
            d["witness"] = py::none();
        }
    } else {
        const auto& cap = std::get<IterationCap>(r);
        d["kind"] = "iteration_cap";
        d["p1"] = cap.p1;
        d["p2"] = cap.p2;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_elab, m) {
    m.doc() = "Spatial voting simulation and analysis core";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);

    m.def("distance", [](const std::vector<double>& a, const std::vector<double>& b) {
        return distance(Position(a), Position(b));
    });

    py::enum_<LossFamily> family(m, "LossFamily");
    bind_enum_values(family, {{"Linear", LossFamily::Linear},
                              {"Concave", LossFamily::Concave},
                              {"Convex", LossFamily::Convex},
                              {"ReverseS", LossFamily::ReverseS}});

    py::class_<LossSpec>(m, "LossSpec")
        .def_readwrite("family", &LossSpec::family)
        .def_readwrite("alpha", &LossSpec::alpha)
        .def_readwrite("beta", &LossSpec::beta)
        .def_readwrite("omega", &LossSpec::omega)
        .def_static("linear", &LossSpec::linear, py::arg("alpha") = 1.0)
        .def_static("concave", &LossSpec::concave, py::arg("beta") = 2.0, py::arg("alpha") = 1.0)
        .def_static("convex", &LossSpec::convex, py::arg("beta") = 0.5, py::arg("alpha") = 1.0)
        .def_static("reverse_s", &LossSpec::reverse_s, py::arg("omega") = 1.0, py::arg("alpha") = 1.0)
        .def("validate", &LossSpec::validate)
        .def("inflection", &LossSpec::inflection)
        .def("__repr__", [](const LossSpec& s) {
            std::ostringstream os;
            os << "LossSpec(" << to_string(s.family) << ", alpha=" << s.alpha << ", beta=" << s.beta
               << ", omega=" << s.omega << ")";
            return os.str();
        });

    m.def("utility", &utility, py::arg("spec"), py::arg("delta"));
    m.def("indifference", &indifference, py::arg("spec"), py::arg("delta1"), py::arg("delta2"));

    py::enum_<DecisionMode> mode(m, "DecisionMode");
    bind_enum_values(mode, {{"Deterministic", DecisionMode::Deterministic},
                            {"Probabilistic", DecisionMode::Probabilistic}});
    py::enum_<NoiseKind> noise(m, "NoiseKind");
    bind_enum_values(noise, {{"UniformLinear", NoiseKind::UniformLinear},
                             {"Normal", NoiseKind::Normal},
                             {"Logistic", NoiseKind::Logistic}});
    py::enum_<AbstentionKind> abst(m, "AbstentionKind");
    bind_enum_values(abst, {{"Stakes", AbstentionKind::Stakes},
                            {"Alienation", AbstentionKind::Alienation},
                            {"ExpressiveConstant", AbstentionKind::ExpressiveConstant}});
    py::enum_<Choice> choice(m, "Choice");
    bind_enum_values(choice, {{"VoteC1", Choice::VoteC1}, {"VoteC2", Choice::VoteC2}, {"Abstain", Choice::Abstain}});

    py::class_<ChoiceModel>(m, "ChoiceModel")
        .def(py::init<>())
        .def_readwrite("mode", &ChoiceModel::mode)
        .def_readwrite("cost", &ChoiceModel::cost)
        .def_readwrite("noise", &ChoiceModel::noise)
        .def_readwrite("noise_scale", &ChoiceModel::noise_scale)
        .def_readwrite("abstention", &ChoiceModel::abstention)
        .def_readwrite("expressive_a", &ChoiceModel::expressive_a)
        .def_property(
            "alienation_threshold", [](const ChoiceModel& c) { return c.alienation.threshold; },
            [](ChoiceModel& c, double v) { c.alienation.threshold = v; })
        .def_property(
            "alienation_slope", [](const ChoiceModel& c) { return c.alienation.slope; },
            [](ChoiceModel& c, double v) { c.alienation.slope = v; })
        .def("validate", &ChoiceModel::validate);

    m.def("decide_deterministic", &decide_deterministic, py::arg("model"), py::arg("u1"), py::arg("u2"));
    m.def(
        "decide_probabilistic",
        [](const ChoiceModel& model, double u1, double u2) {
            const auto d = decide_probabilistic(model, u1, u2);
            return py::make_tuple(d.p_c1, d.p_c2, d.p_abstain);
        },
        py::arg("model"), py::arg("u1"), py::arg("u2"), "Returns (p_c1, p_c2, p_abstain).");

    py::enum_<TrendLabel> label(m, "TrendLabel");
    bind_enum_values(label, {{"Constant", TrendLabel::Constant},
                             {"Decreasing", TrendLabel::Decreasing},
                             {"Increasing", TrendLabel::Increasing},
                             {"UShaped", TrendLabel::UShaped}});
    py::enum_<CaseSetting> setting(m, "CaseSetting");
    bind_enum_values(setting, {{"Case1", CaseSetting::Case1}, {"Case2", CaseSetting::Case2}});
    py::enum_<Dimensionality> dim(m, "Dimensionality");
    bind_enum_values(dim, {{"Uni", Dimensionality::Uni}, {"Multi", Dimensionality::Multi}});

    m.def("predict_trend", &predict_trend, py::arg("family"), py::arg("setting"), py::arg("dim"),
          py::arg("beta") = py::none());

    m.def(
        "ols",
        [](const std::vector<double>& y, const std::vector<std::vector<double>>& columns,
           const std::vector<std::string>& names) {
            if (columns.size() != names.size()) throw DomainError("ols: one name per column");
            Design d;
            d.names = names;
            d.x.resize(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(columns.size()));
            for (std::size_t j = 0; j < columns.size(); ++j) {
                if (columns[j].size() != y.size()) throw DomainError("ols: column length differs from y");
                for (std::size_t i = 0; i < y.size(); ++i) d.x(i, j) = columns[j][i];
            }
            const auto r = ols(y, d);
            py::dict out;
            out["names"] = r.names;
            out["coefficients"] = r.coefficients;
            out["standard_errors"] = r.standard_errors;
            out["r_squared"] = r.r_squared;
            out["n_obs"] = r.n_obs;
            return out;
        },
        py::arg("y"), py::arg("columns"), py::arg("names"));

    m.def(
        "classify_form",
        [](const std::vector<std::pair<double, double>>& points, Dimensionality d) {
            std::vector<FormPoint> pts;
            for (const auto& [x, y] : points) pts.push_back({x, y});
            ClassifyOptions opt;
            opt.dim = d;
            const auto c = classify_form(pts, opt);
            std::vector<LossFamily> fams;
            for (const auto& f : c.families) fams.push_back(f.family);
            return py::make_tuple(c.label, fams);
        },
        py::arg("points"), py::arg("dim") = Dimensionality::Uni,
        "Returns (label, consistent families) for (proxy, indifference) pairs.");

    py::class_<VoterDensity>(m, "VoterDensity")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("grid"), py::arg("weights"))
        .def_static("uniform", &VoterDensity::uniform, py::arg("lo"), py::arg("hi"), py::arg("n"))
        .def_static(
            "mixture",
            [](double lo, double hi, std::size_t n, const std::vector<std::tuple<double, double, double>>& bumps) {
                std::vector<VoterDensity::Bump> b;
                for (const auto& [mean, sd, w] : bumps) b.push_back({mean, sd, w});
                return VoterDensity::mixture(lo, hi, n, b);
            },
            py::arg("lo"), py::arg("hi"), py::arg("n"), py::arg("bumps"))
        .def_property_readonly("grid", &VoterDensity::grid)
        .def_property_readonly("weights", &VoterDensity::weights)
        .def("median", &VoterDensity::median);

    m.def(
        "contest",
        [](const VoterDensity& density, double p1, double p2, const LossSpec& loss, const ChoiceModel& model) {
            const auto o = contest(density, p1, p2, loss, model);
            return py::make_tuple(o.share1, o.share2, o.abstain_share);
        },
        py::arg("density"), py::arg("p1"), py::arg("p2"), py::arg("loss"), py::arg("model"),
        "Returns (share1, share2, abstain_share).");
    m.def("default_platform_grid", &default_platform_grid, py::arg("density"), py::arg("n") = 201);
    m.def(
        "condorcet_winner",
        [](const VoterDensity& density, const std::vector<double>& platforms, const LossSpec& loss,
           const ChoiceModel& model) { return condorcet_winner(density, platforms, loss, model); },
        py::arg("density"), py::arg("platforms"), py::arg("loss"), py::arg("model"));
    m.def(
        "pure_equilibria",
        [](const VoterDensity& density, const std::vector<double>& platforms, const LossSpec& loss,
           const ChoiceModel& model) { return pure_equilibria(density, platforms, loss, model); },
        py::arg("density"), py::arg("platforms"), py::arg("loss"), py::arg("model"));
    m.def(
        "best_response_dynamics",
        [](const VoterDensity& density, const std::vector<double>& platforms, const LossSpec& loss,
           const ChoiceModel& model, std::pair<double, double> start, std::size_t max_iters) {
            return dynamics_to_dict(best_response_dynamics(density, platforms, loss, model, start, max_iters));
        },
        py::arg("density"), py::arg("platforms"), py::arg("loss"), py::arg("model"), py::arg("start"),
        py::arg("max_iters") = 1000);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"electorate-lab"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI command line. Returns (exit code, stdout, stderr).");
}
