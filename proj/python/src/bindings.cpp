// Python bindings. Policies, scenario configs and experiment specs cross the
// boundary as JSON text; the package wrapper handles dict conversion.

#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eivreg/apps.hpp"
#include "eivreg/bounds.hpp"
#include "eivreg/errors.hpp"
#include "eivreg/estimation.hpp"
#include "eivreg/experiment.hpp"
#include "eivreg/metrics.hpp"
#include "eivreg/regression.hpp"
#include "eivreg/serialization.hpp"
#include "eivreg/synth.hpp"

namespace py = pybind11;
using namespace eivreg;

namespace {

ThresholdPolicy parse_policy(const std::string& text) { return threshold_policy_from_json(Json::parse(text)); }

MaskedMatrix masked(const Matrix& values, const std::optional<Mask>& mask) {
    return mask ? MaskedMatrix(values, *mask) : MaskedMatrix::fully_observed(values);
}

RowIndexSet rows_of(const std::vector<Eigen::Index>& omega) { return RowIndexSet(omega); }

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["a_hat"] = e.a_hat;
    d["rho_hat"] = e.rho_hat;
    d["lambda_star"] = e.lambda_star;
    d["rank"] = e.rank;
    return d;
}

py::dict fit_dict(const Fit& f) {
    py::dict d;
    d["beta_hat"] = f.beta_hat;
    d["y_hat"] = f.y_hat;
    d["design_rank"] = f.design_rank;
    d["rcond_used"] = f.rcond_used;
    d["estimate"] = estimate_dict(f.estimate);
    return d;
}

Series to_series(const std::vector<std::optional<double>>& xs) { return Series(xs.begin(), xs.end()); }

ModelParams parse_params(const std::string& text) { return apply_overrides(ModelParams{}, Json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_eivreg, m) {
    m.doc() = "Error-in-variables regression via hard singular value thresholding";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("svd", [](const Matrix& a) {
        Svd s = svd(a);
        return py::make_tuple(s.left, s.singulars, s.right);
    });
    m.def("spectral_norm", &spectral_norm);
    m.def("hsvt", &hsvt, py::arg("b"), py::arg("lam"));
    m.def("effective_rank", py::overload_cast<const Matrix&, double>(&effective_rank), py::arg("a"), py::arg("lam"));
    m.def(
        "observed_fraction",
        [](const Matrix& z, const std::optional<Mask>& mask) { return observed_fraction(masked(z, mask)); },
        py::arg("z"), py::arg("mask") = py::none());
    m.def(
        "denoise",
        [](const Matrix& z, const std::string& policy, const std::optional<Mask>& mask) {
            return estimate_dict(denoise(masked(z, mask), parse_policy(policy)));
        },
        py::arg("z"), py::arg("policy"), py::arg("mask") = py::none());
    m.def(
        "fit",
        [](const Matrix& z, const Vector& y_omega, const std::vector<Eigen::Index>& omega, const std::string& policy,
           const std::optional<Mask>& mask, double rcond) {
            return fit_dict(fit(masked(z, mask), y_omega, rows_of(omega), parse_policy(policy), rcond));
        },
        py::arg("z"), py::arg("y_omega"), py::arg("omega"), py::arg("policy"), py::arg("mask") = py::none(),
        py::arg("rcond") = -1.0);
    m.def(
        "pinv_solve",
        [](const Matrix& a, const Vector& y, double rcond, std::optional<Eigen::Index> max_rank) {
            if (rcond < 0) rcond = default_rcond(a.rows(), a.cols());
            LeastSquares ls = pinv_solve(a, y, rcond, max_rank);
            return py::make_tuple(ls.beta, ls.rank, ls.residual_norm);
        },
        py::arg("a"), py::arg("y"), py::arg("rcond") = -1.0, py::arg("max_rank") = py::none());
    m.def("sparse_equivalent", &sparse_equivalent, py::arg("x"), py::arg("beta"));

    m.def(
        "mse_train",
        [](const Vector& y_hat, const Vector& ey, const std::vector<Eigen::Index>& omega) {
            return mse_train(y_hat, ey, rows_of(omega));
        },
        py::arg("y_hat"), py::arg("ey"), py::arg("omega"));
    m.def("mse_test", &mse_test, py::arg("y_hat"), py::arg("ey"));
    m.def(
        "mcse",
        [](const Matrix& a_hat, const Matrix& a, const std::vector<Eigen::Index>& omega) {
            return mcse(a_hat, a, rows_of(omega));
        },
        py::arg("a_hat"), py::arg("a"), py::arg("omega"));
    m.def("max_col_l2_sq", &max_col_l2_sq);
    m.def(
        "spectral_error",
        [](const Matrix& z, const Matrix& a, double rho, const std::optional<Mask>& mask) {
            return spectral_error(masked(z, mask), a, rho);
        },
        py::arg("z"), py::arg("a"), py::arg("rho"), py::arg("mask") = py::none());

    m.def(
        "delta_bound",
        [](const std::string& params, Eigen::Index N, Eigen::Index p) { return delta_bound(parse_params(params), N, p); },
        py::arg("params"), py::arg("N"), py::arg("p"));
    m.def(
        "spectral_bound",
        [](const std::string& params, Eigen::Index N, Eigen::Index p, double delta1) {
            return spectral_bound(parse_params(params), N, p, delta1);
        },
        py::arg("params"), py::arg("N"), py::arg("p"), py::arg("delta1") = 7.0);
    m.def(
        "test_gap_bound",
        [](const std::string& params, Eigen::Index N, Eigen::Index p, Eigen::Index n, Eigen::Index r) {
            return test_gap_bound(parse_params(params), N, p, n, r);
        },
        py::arg("params"), py::arg("N"), py::arg("p"), py::arg("n"), py::arg("r"));

    m.def("gen_scenario", [](const std::string& config) {
        Scenario s = gen_scenario(scenario_config_from_json(Json::parse(config)));
        py::dict d;
        d["a"] = s.a;
        d["z"] = s.z.values();
        d["mask"] = Mask(s.z.mask());
        d["beta_star"] = s.beta_star;
        d["omega"] = std::vector<Eigen::Index>(s.omega.indices().begin(), s.omega.indices().end());
        d["y_omega"] = s.y_omega;
        d["ey"] = s.ey;
        d["tau"] = s.tau;
        d["gamma_measured"] = s.gamma_measured;
        return d;
    });

    m.def(
        "ts_impute",
        [](const std::vector<std::optional<double>>& series, Eigen::Index rows, Eigen::Index cols,
           const std::string& policy) {
            return ts_impute(TimeSeriesProblem{to_series(series), rows, cols}, parse_policy(policy));
        },
        py::arg("series"), py::arg("page_rows"), py::arg("page_cols"), py::arg("policy"));
    m.def(
        "ts_forecast",
        [](const std::vector<std::optional<double>>& series, Eigen::Index rows, Eigen::Index cols,
           const std::string& policy, Eigen::Index horizon, std::optional<Eigen::Index> origin) {
            Forecast f = ts_forecast(TimeSeriesProblem{to_series(series), rows, cols}, parse_policy(policy), horizon,
                                     origin);
            return py::make_tuple(f.values, f.in_sample_rmse);
        },
        py::arg("series"), py::arg("page_rows"), py::arg("page_cols"), py::arg("policy"), py::arg("horizon"),
        py::arg("origin") = py::none());

    m.def("preset", [](const std::string& name) { return to_json(preset(name)).dump(); });
    m.def(
        "run_experiment",
        [](const std::string& spec, unsigned threads) {
            ExperimentOutput out;
            {
                py::gil_scoped_release release;
                out = run_experiment(experiment_spec_from_json(Json::parse(spec)), threads);
            }
            return py::make_tuple(out.csv, out.timing_csv);
        },
        py::arg("spec"), py::arg("threads") = 1);
    m.def("summarize_csv", [](const std::string& csv) { return format_summary(summarize_csv(csv)); });
}
