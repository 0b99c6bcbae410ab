#include "eivreg/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include "eivreg/errors.hpp"
#include "eivreg/matrix_io.hpp"

namespace eivreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string kind_of(const Json& j, std::string_view context) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw ValidationError(std::string(context) + ": expected an object with a string \"kind\"");
    }
    return j.at("kind").get<std::string>();
}

double number(const Json& j, const char* key, std::string_view context) {
    if (!j.contains(key)) throw ValidationError(std::string(context) + ": missing \"" + key + "\"");
    const Json& v = j.at(key);
    if (!v.is_number()) throw ValidationError(std::string(context) + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

Eigen::Index integer(const Json& j, const char* key, std::string_view context) {
    if (!j.contains(key)) throw ValidationError(std::string(context) + ": missing \"" + key + "\"");
    const Json& v = j.at(key);
    if (v.is_number_integer()) return v.get<Eigen::Index>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d == static_cast<double>(static_cast<Eigen::Index>(d))) return static_cast<Eigen::Index>(d);
    }
    throw ValidationError(std::string(context) + ": \"" + key + "\" must be an integer");
}

Matrix matrix_from_rows(const Json& rows, std::string_view context) {
    if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
        throw ValidationError(std::string(context) + ": expected a nonempty array of rows");
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.front().size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const Json& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
            throw ValidationError(std::string(context) + ": ragged rows");
        }
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

Json rows_from_matrix(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
    if (!j.is_object()) throw ValidationError(std::string(context) + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(std::string(context) + ": unknown field \"" + key + "\"");
        }
    }
}

Json to_json(const NoiseModel& model) {
    return std::visit(overloaded{
                          [](const NoNoise&) { return Json{{"kind", "None"}}; },
                          [](const GaussianNoise& g) { return Json{{"kind", "Gaussian"}, {"sd", g.sd}}; },
                          [](const LaplaceNoise& l) { return Json{{"kind", "Laplace"}, {"scale", l.scale}}; },
                          [](const BoundedUniformNoise& u) {
                              return Json{{"kind", "BoundedUniform"}, {"half_width", u.half_width}};
                          },
                      },
                      model);
}

NoiseModel noise_model_from_json(const Json& j) {
    constexpr std::string_view ctx = "noise model";
    const std::string kind = kind_of(j, ctx);
    NoiseModel out;
    if (kind == "None") {
        require_keys(j, {"kind"}, ctx);
        out = NoNoise{};
    } else if (kind == "Gaussian") {
        require_keys(j, {"kind", "sd"}, ctx);
        out = GaussianNoise{number(j, "sd", ctx)};
    } else if (kind == "Laplace") {
        require_keys(j, {"kind", "scale"}, ctx);
        out = LaplaceNoise{number(j, "scale", ctx)};
    } else if (kind == "BoundedUniform") {
        require_keys(j, {"kind", "half_width"}, ctx);
        out = BoundedUniformNoise{number(j, "half_width", ctx)};
    } else {
        throw ValidationError("noise model: unknown kind \"" + kind + "\"");
    }
    validate(out);
    return out;
}

Json to_json(const CovariateModel& model) {
    return std::visit(overloaded{
                          [](const LowRankEven& c) {
                              return Json{{"kind", "LowRankEven"}, {"r", c.r}, {"frob_const", c.frob_const}};
                          },
                          [](const GeometricDecay& c) {
                              return Json{{"kind", "GeometricDecay"},
                                          {"theta", c.theta},
                                          {"tau1_const", c.tau1_const},
                                          {"r_keep", c.r_keep}};
                          },
                          [](const ExplicitCovariates& c) {
                              return Json{{"kind", "Explicit"}, {"values", rows_from_matrix(c.a)}};
                          },
                      },
                      model);
}

CovariateModel covariate_model_from_json(const Json& j) {
    constexpr std::string_view ctx = "covariate model";
    const std::string kind = kind_of(j, ctx);
    if (kind == "LowRankEven") {
        require_keys(j, {"kind", "r", "frob_const"}, ctx);
        return LowRankEven{integer(j, "r", ctx), number(j, "frob_const", ctx)};
    }
    if (kind == "GeometricDecay") {
        require_keys(j, {"kind", "theta", "tau1_const", "r_keep"}, ctx);
        return GeometricDecay{number(j, "theta", ctx), number(j, "tau1_const", ctx), integer(j, "r_keep", ctx)};
    }
    if (kind == "Explicit") {
        require_keys(j, {"kind", "values", "path"}, ctx);
        if (j.contains("values") == j.contains("path")) {
            throw ValidationError("explicit covariates need exactly one of \"values\" or \"path\"");
        }
        if (j.contains("path")) return ExplicitCovariates{io::read_dense(j.at("path").get<std::string>())};
        return ExplicitCovariates{matrix_from_rows(j.at("values"), ctx)};
    }
    throw ValidationError("covariate model: unknown kind \"" + kind + "\"");
}

Json to_json(const BetaSpec& beta) {
    return std::visit(overloaded{
                          [](const Vector& v) {
                              Json arr = Json::array();
                              for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
                              return arr;
                          },
                          [](const SparseBeta& s) {
                              return Json{{"sparsity", s.sparsity},
                                          {"magnitude_range", Json::array({s.magnitude_min, s.magnitude_max})}};
                          },
                      },
                      beta);
}

BetaSpec beta_spec_from_json(const Json& j) {
    constexpr std::string_view ctx = "beta_star";
    if (j.is_array()) {
        Vector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j.at(i).is_number()) throw ValidationError("beta_star: entries must be numbers");
            v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
        }
        return v;
    }
    require_keys(j, {"sparsity", "magnitude_range"}, ctx);
    SparseBeta s;
    s.sparsity = integer(j, "sparsity", ctx);
    if (!j.contains("magnitude_range") || !j.at("magnitude_range").is_array() || j.at("magnitude_range").size() != 2) {
        throw ValidationError("beta_star: \"magnitude_range\" must be [min, max]");
    }
    s.magnitude_min = j.at("magnitude_range").at(0).get<double>();
    s.magnitude_max = j.at("magnitude_range").at(1).get<double>();
    return s;
}

Json to_json(const ScenarioConfig& c) {
    return Json{{"N", c.N},
                {"p", c.p},
                {"n", c.n},
                {"rho", c.rho},
                {"covariates", to_json(c.covariates)},
                {"covariate_noise", to_json(c.covariate_noise)},
                {"response_noise", to_json(c.response_noise)},
                {"beta_star", to_json(c.beta_star)},
                {"seed", c.seed}};
}

ScenarioConfig scenario_config_from_json(const Json& j) {
    constexpr std::string_view ctx = "scenario config";
    require_keys(j, {"N", "p", "n", "rho", "covariates", "covariate_noise", "response_noise", "beta_star", "seed"}, ctx);
    for (const char* key : {"N", "p", "n", "rho", "covariates", "covariate_noise", "response_noise", "beta_star", "seed"}) {
        if (!j.contains(key)) throw ValidationError(std::string("scenario config: missing \"") + key + "\"");
    }
    ScenarioConfig c;
    c.N = integer(j, "N", ctx);
    c.p = integer(j, "p", ctx);
    c.n = integer(j, "n", ctx);
    c.rho = number(j, "rho", ctx);
    c.covariates = covariate_model_from_json(j.at("covariates"));
    c.covariate_noise = noise_model_from_json(j.at("covariate_noise"));
    c.response_noise = noise_model_from_json(j.at("response_noise"));
    c.beta_star = beta_spec_from_json(j.at("beta_star"));
    const Json& seed = j.at("seed");
    if (!seed.is_number_integer()) throw ValidationError("scenario config: \"seed\" must be an integer");
    c.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : static_cast<std::uint64_t>(seed.get<std::int64_t>());
    validate(c);
    return c;
}

Json to_json(const ThresholdPolicy& policy) {
    return std::visit(overloaded{
                          [](const FixedThreshold& p) { return Json{{"kind", "FixedThreshold"}, {"lambda", p.lambda}}; },
                          [](const FixedRank& p) { return Json{{"kind", "FixedRank"}, {"k", p.k}}; },
                          [](const EnergyFraction& p) { return Json{{"kind", "EnergyFraction"}, {"t", p.t}}; },
                      },
                      policy);
}

ThresholdPolicy threshold_policy_from_json(const Json& j) {
    constexpr std::string_view ctx = "threshold policy";
    const std::string kind = kind_of(j, ctx);
    ThresholdPolicy out;
    if (kind == "FixedThreshold") {
        require_keys(j, {"kind", "lambda"}, ctx);
        out = FixedThreshold{number(j, "lambda", ctx)};
    } else if (kind == "FixedRank") {
        require_keys(j, {"kind", "k"}, ctx);
        out = FixedRank{integer(j, "k", ctx)};
    } else if (kind == "EnergyFraction") {
        require_keys(j, {"kind", "t"}, ctx);
        out = EnergyFraction{number(j, "t", ctx)};
    } else {
        throw ValidationError("threshold policy: unknown kind \"" + kind + "\"");
    }
    validate(out);
    return out;
}

Json to_json(const ModelParams& m) {
    return Json{{"gamma_cap", m.gamma_cap}, {"k_alpha", m.k_alpha},     {"alpha", m.alpha},
                {"gamma_var", m.gamma_var}, {"sigma_resp", m.sigma_resp}, {"rho", m.rho},
                {"beta_l1", m.beta_l1},     {"b_inf", m.b_inf},           {"c_alpha", m.c_alpha},
                {"c1", m.c1},               {"c2", m.c2},                 {"include_remainder", m.include_remainder}};
}

ModelParams apply_overrides(ModelParams m, const Json& o) {
    if (o.is_null()) return m;
    constexpr std::string_view ctx = "model params";
    require_keys(o,
                 {"gamma_cap", "k_alpha", "alpha", "gamma_var", "sigma_resp", "rho", "beta_l1", "b_inf", "c_alpha", "c1",
                  "c2", "include_remainder"},
                 ctx);
    auto set = [&](const char* key, double& field) {
        if (o.contains(key)) field = number(o, key, ctx);
    };
    set("gamma_cap", m.gamma_cap);
    set("k_alpha", m.k_alpha);
    set("alpha", m.alpha);
    set("gamma_var", m.gamma_var);
    set("sigma_resp", m.sigma_resp);
    set("rho", m.rho);
    set("beta_l1", m.beta_l1);
    set("b_inf", m.b_inf);
    set("c_alpha", m.c_alpha);
    set("c1", m.c1);
    set("c2", m.c2);
    if (o.contains("include_remainder")) {
        if (!o.at("include_remainder").is_boolean()) throw ValidationError("model params: include_remainder must be boolean");
        m.include_remainder = o.at("include_remainder").get<bool>();
    }
    validate(m);
    return m;
}

Json to_json(const ErrorReport& r) {
    return Json{{"mse_train", r.mse_train},       {"mse_test", r.mse_test},         {"mcse", r.mcse},
                {"max_col_l2_sq_E", r.max_col_l2_sq_E}, {"spectral_err", r.spectral_err}, {"rank_used", r.rank_used},
                {"trial_seed", r.trial_seed}};
}

Json fit_summary_json(const Fit& fit, const std::filesystem::path& a_hat_path, const std::filesystem::path& y_hat_path) {
    Json beta = Json::array();
    for (Eigen::Index i = 0; i < fit.beta_hat.size(); ++i) beta.push_back(fit.beta_hat(i));
    return Json{{"beta_hat", std::move(beta)},
                {"lambda_star", fit.estimate.lambda_star},
                {"rho_hat", fit.estimate.rho_hat},
                {"rank", fit.estimate.rank},
                {"design_rank", fit.design_rank},
                {"rcond_used", fit.rcond_used},
                {"a_hat_path", a_hat_path.string()},
                {"y_hat_path", y_hat_path.string()}};
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace eivreg
