#include "eivreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "eivreg/errors.hpp"
#include "eivreg/matrix_io.hpp"
#include "eivreg/regression.hpp"

namespace eivreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '.')) {
        if (part.empty()) throw ValidationError("sweep path \"" + path + "\" has an empty segment");
        parts.push_back(part);
    }
    if (parts.empty()) throw ValidationError("sweep path is empty");
    return parts;
}

void set_path(Json& root, const std::string& path, const Json& value) {
    Json* node = &root;
    for (const auto& part : split_path(path)) {
        if (!node->is_object() || !node->contains(part)) {
            throw ValidationError("sweep path \"" + path + "\" does not name an existing config field");
        }
        node = &node->at(part);
    }
    *node = value;
}

std::string policy_label(const ExperimentPolicy& policy) {
    return std::visit(overloaded{
                          [](const ThresholdPolicy& tp) {
                              return std::visit(overloaded{
                                                    [](const FixedThreshold& p) {
                                                        return "FixedThreshold:" + io::format_double(p.lambda);
                                                    },
                                                    [](const FixedRank& p) { return "FixedRank:" + std::to_string(p.k); },
                                                    [](const EnergyFraction& p) {
                                                        return "EnergyFraction:" + io::format_double(p.t);
                                                    },
                                                },
                                                tp);
                          },
                          [](const ModelRankPolicy&) { return std::string("ModelRank"); },
                          [](const WindowMidpointPolicy&) { return std::string("WindowMidpoint"); },
                      },
                      policy);
}

double tau_at(const Vector& tau, Eigen::Index k) { return k >= 0 && k < tau.size() ? tau(k) : 0.0; }

ThresholdPolicy resolve_policy(const ExperimentPolicy& policy, const ScenarioConfig& config, const Scenario& sc,
                               double spectral_err) {
    return std::visit(overloaded{
                          [](const ThresholdPolicy& tp) { return tp; },
                          [&](const ModelRankPolicy&) { return ThresholdPolicy{FixedRank{model_rank(config.covariates)}}; },
                          [&](const WindowMidpointPolicy&) {
                              const Eigen::Index r = model_rank(config.covariates);
                              if (r >= 1) {
                                  auto w = lambda_window(tau_at(sc.tau, r - 1), tau_at(sc.tau, r), config.rho, spectral_err);
                                  if (w) return ThresholdPolicy{FixedThreshold{(w->first + w->second) / 2.0}};
                              }
                              return ThresholdPolicy{FixedRank{r}};
                          },
                      },
                      policy);
}

bool in_window(double lambda, double tau_r, double tau_r1, double rho, double delta) {
    auto w = lambda_window(tau_r, tau_r1, rho, delta);
    return w && w->first < lambda && lambda < w->second;
}

struct ConfigColumns {
    std::string covariates, cov_r, cov_frob, cov_theta, cov_tau1, cov_rkeep;
    std::string beta, beta_s, beta_lo, beta_hi;
};

std::pair<std::string, std::string> noise_columns(const NoiseModel& m) {
    return std::visit(overloaded{
                          [](const NoNoise&) { return std::pair<std::string, std::string>{"None", ""}; },
                          [](const GaussianNoise& g) { return std::pair{std::string("Gaussian"), io::format_double(g.sd)}; },
                          [](const LaplaceNoise& l) { return std::pair{std::string("Laplace"), io::format_double(l.scale)}; },
                          [](const BoundedUniformNoise& u) {
                              return std::pair{std::string("BoundedUniform"), io::format_double(u.half_width)};
                          },
                      },
                      m);
}

ConfigColumns config_columns(const ScenarioConfig& c) {
    ConfigColumns out;
    std::visit(overloaded{
                   [&](const LowRankEven& m) {
                       out.covariates = "LowRankEven";
                       out.cov_r = std::to_string(m.r);
                       out.cov_frob = io::format_double(m.frob_const);
                   },
                   [&](const GeometricDecay& m) {
                       out.covariates = "GeometricDecay";
                       out.cov_theta = io::format_double(m.theta);
                       out.cov_tau1 = io::format_double(m.tau1_const);
                       out.cov_rkeep = std::to_string(m.r_keep);
                   },
                   [&](const ExplicitCovariates&) { out.covariates = "Explicit"; },
               },
               c.covariates);
    std::visit(overloaded{
                   [&](const Vector&) { out.beta = "Explicit"; },
                   [&](const SparseBeta& s) {
                       out.beta = "Sparse";
                       out.beta_s = std::to_string(s.sparsity);
                       out.beta_lo = io::format_double(s.magnitude_min);
                       out.beta_hi = io::format_double(s.magnitude_max);
                   },
               },
               c.beta_star);
    return out;
}

double sweep_value_at(const ExperimentSpec& spec, std::size_t k) {
    if (spec.sweep.empty()) return 0.0;
    const Json& v = spec.sweep.front().values.at(k);
    return v.is_number() ? v.get<double>() : static_cast<double>(k);
}

std::string format_row(const ExperimentSpec& spec, std::size_t k, std::int64_t trial, const ScenarioConfig& c,
                       const ExperimentPolicy& policy, const TrialRecord& t) {
    using io::format_double;
    const ConfigColumns cc = config_columns(c);
    const auto [cn_kind, cn_param] = noise_columns(c.covariate_noise);
    const auto [rn_kind, rn_param] = noise_columns(c.response_noise);
    std::vector<std::string> cells = {
        std::to_string(kSchemaVersion),
        spec.name,
        std::to_string(k),
        format_double(sweep_value_at(spec, k)),
        std::to_string(trial),
        std::to_string(t.report.trial_seed),
        std::to_string(c.N),
        std::to_string(c.p),
        std::to_string(c.n),
        format_double(c.rho),
        cc.covariates,
        cc.cov_r,
        cc.cov_frob,
        cc.cov_theta,
        cc.cov_tau1,
        cc.cov_rkeep,
        cn_kind,
        cn_param,
        rn_kind,
        rn_param,
        cc.beta,
        cc.beta_s,
        cc.beta_lo,
        cc.beta_hi,
        policy_label(policy),
        format_double(t.report.mse_train),
        format_double(t.report.mse_test),
        format_double(t.report.mcse),
        format_double(t.report.max_col_l2_sq_E),
        format_double(t.report.spectral_err),
        std::to_string(t.report.rank_used),
        format_double(t.lambda_star),
        format_double(t.rho_hat),
        std::to_string(t.design_rank),
        format_double(t.frob_sq_err_omega),
        format_double(t.gamma_measured),
        format_double(t.beta_l1),
        format_double(t.beta_hat_inf),
        std::to_string(t.r_at_threshold),
        format_double(t.tau_r),
        format_double(t.tau_r1),
        format_double(t.delta),
        format_double(t.spectral_bound),
        format_double(t.mcse_bound),
        format_double(t.train_mse_bound),
        format_double(t.test_gap_bound),
        t.window_valid ? "1" : "0",
        t.window_valid_empirical ? "1" : "0",
        format_double(t.pythag_residual),
    };
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

std::string header_line() {
    std::string h;
    for (const auto& c : csv_columns()) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h + '\n';
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const ExperimentPolicy& policy) {
    return std::visit(overloaded{
                          [](const ThresholdPolicy& tp) { return to_json(tp); },
                          [](const ModelRankPolicy&) { return Json{{"kind", "ModelRank"}}; },
                          [](const WindowMidpointPolicy&) { return Json{{"kind", "WindowMidpoint"}}; },
                      },
                      policy);
}

ExperimentPolicy experiment_policy_from_json(const Json& j) {
    if (j.is_object() && j.contains("kind") && j.at("kind").is_string()) {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "ModelRank") {
            require_keys(j, {"kind"}, "policy");
            return ModelRankPolicy{};
        }
        if (kind == "WindowMidpoint") {
            require_keys(j, {"kind"}, "policy");
            return WindowMidpointPolicy{};
        }
    }
    return threshold_policy_from_json(j);
}

void validate(const ExperimentSpec& spec) {
    if (spec.name.find_first_of(",\"\n\r") != std::string::npos) {
        throw ValidationError("experiment name must not contain commas, quotes or newlines");
    }
    if (spec.trials < 1) throw ValidationError("experiment trials must be >= 1");
    if (!(spec.delta1 > 0.0)) throw ValidationError("experiment delta1 must be > 0");
    std::size_t len = 0;
    for (const auto& axis : spec.sweep) {
        if (axis.values.empty()) throw ValidationError("sweep axis \"" + axis.path + "\" has no values");
        if (len != 0 && axis.values.size() != len) {
            throw ValidationError("sweep axes must all have the same number of values");
        }
        len = axis.values.size();
    }
    for (std::size_t k = 0; k < sweep_points(spec); ++k) config_at(spec, k);
    apply_overrides(ModelParams{}, spec.params);
}

ExperimentSpec experiment_spec_from_json(const Json& j) {
    require_keys(j, {"name", "base", "sweep", "trials", "policy", "params", "delta1", "output_path"}, "experiment spec");
    ExperimentSpec spec;
    if (!j.contains("name") || !j.at("name").is_string()) throw ValidationError("experiment spec: missing \"name\"");
    spec.name = j.at("name").get<std::string>();
    if (!j.contains("base")) throw ValidationError("experiment spec: missing \"base\"");
    spec.base = j.at("base");
    if (j.contains("sweep")) {
        const Json& sw = j.at("sweep");
        if (!sw.is_array()) throw ValidationError("experiment spec: \"sweep\" must be an array");
        for (const Json& axis : sw) {
            require_keys(axis, {"path", "values"}, "sweep axis");
            if (!axis.contains("path") || !axis.at("path").is_string() || !axis.contains("values") ||
                !axis.at("values").is_array()) {
                throw ValidationError("sweep axis needs a string \"path\" and an array \"values\"");
            }
            SweepAxis a;
            a.path = axis.at("path").get<std::string>();
            for (const Json& v : axis.at("values")) a.values.push_back(v);
            spec.sweep.push_back(std::move(a));
        }
    }
    if (j.contains("trials")) {
        if (!j.at("trials").is_number_integer()) throw ValidationError("experiment spec: \"trials\" must be an integer");
        spec.trials = j.at("trials").get<std::int64_t>();
    }
    if (j.contains("policy")) spec.policy = experiment_policy_from_json(j.at("policy"));
    if (j.contains("params")) spec.params = j.at("params");
    if (j.contains("delta1")) spec.delta1 = j.at("delta1").get<double>();
    if (j.contains("output_path")) spec.output_path = j.at("output_path").get<std::string>();
    validate(spec);
    return spec;
}

Json to_json(const ExperimentSpec& spec) {
    Json sweep = Json::array();
    for (const auto& a : spec.sweep) sweep.push_back(Json{{"path", a.path}, {"values", a.values}});
    Json out{{"name", spec.name},        {"base", spec.base},     {"sweep", sweep},   {"trials", spec.trials},
             {"policy", to_json(spec.policy)}, {"params", spec.params}, {"delta1", spec.delta1}};
    if (!spec.output_path.empty()) out["output_path"] = spec.output_path;
    return out;
}

Eigen::Index case2_rank_schedule(Eigen::Index p, double theta) {
    const double v = 2.0 * std::log(std::log(static_cast<double>(p))) / std::log(1.0 / theta);
    return static_cast<Eigen::Index>(std::ceil(v));
}

std::vector<std::string> preset_names() { return {"case1", "case2", "bound-check", "test-gap"}; }

ExperimentSpec preset(std::string_view name) {
    const Json gaussian_cov{{"kind", "Gaussian"}, {"sd", 0.5}};
    const Json gaussian_resp{{"kind", "Gaussian"}, {"sd", 0.1}};
    const Json sparse_beta{{"sparsity", 5}, {"magnitude_range", {0.5, 1.0}}};
    auto low_rank = [&](Eigen::Index N, Eigen::Index p, Eigen::Index n, double rho, Eigen::Index r) {
        return Json{{"N", N},
                    {"p", p},
                    {"n", n},
                    {"rho", rho},
                    {"covariates", {{"kind", "LowRankEven"}, {"r", r}, {"frob_const", 1.0}}},
                    {"covariate_noise", gaussian_cov},
                    {"response_noise", gaussian_resp},
                    {"beta_star", sparse_beta},
                    {"seed", 20190417}};
    };

    ExperimentSpec spec;
    spec.name = std::string(name);
    spec.policy = ModelRankPolicy{};
    if (name == "case1") {
        spec.base = low_rank(100, 100, 100, 0.7, 5);
        const Json ps = Json::array({100, 200, 400, 800});
        spec.sweep = {{"p", ps.get<std::vector<Json>>()}, {"N", ps.get<std::vector<Json>>()}, {"n", ps.get<std::vector<Json>>()}};
        spec.trials = 20;
    } else if (name == "case2") {
        constexpr double theta = 0.6;
        spec.base = low_rank(64, 256, 64, 0.8, 1);
        spec.base["covariates"] = Json{{"kind", "GeometricDecay"}, {"theta", theta}, {"tau1_const", 1.0},
                                       {"r_keep", case2_rank_schedule(256, theta)}};
        std::vector<Json> ps, ns, rk;
        for (Eigen::Index p : {256, 512, 1024}) {
            ps.emplace_back(p);
            ns.emplace_back(p / 4);
            rk.emplace_back(case2_rank_schedule(p, theta));
        }
        spec.sweep = {{"p", ps}, {"N", ns}, {"n", ns}, {"covariates.r_keep", rk}};
        spec.trials = 20;
    } else if (name == "bound-check") {
        spec.base = low_rank(200, 200, 200, 0.7, 5);
        spec.sweep = {{"rho", {Json(0.7), Json(1.0)}}};
        spec.trials = 100;
    } else if (name == "test-gap") {
        spec.base = low_rank(800, 200, 100, 0.8, 4);
        spec.sweep = {{"n", {Json(100), Json(200), Json(400), Json(800)}}};
        spec.trials = 20;
    } else {
        throw ValidationError("unknown preset \"" + std::string(name) + "\"");
    }
    validate(spec);
    return spec;
}

std::size_t sweep_points(const ExperimentSpec& spec) {
    return spec.sweep.empty() ? 1 : spec.sweep.front().values.size();
}

ScenarioConfig config_at(const ExperimentSpec& spec, std::size_t k) {
    Json j = spec.base;
    for (const auto& axis : spec.sweep) set_path(j, axis.path, axis.values.at(k));
    return scenario_config_from_json(j);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t sweep_index, std::int64_t trials, std::int64_t trial) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(sweep_index) * static_cast<std::uint64_t>(trials) +
                                      static_cast<std::uint64_t>(trial));
}

ModelParams params_for(const ScenarioConfig& config, const Scenario& sc, const Json& overrides) {
    const NoiseConstants cov = noise_constants(config.covariate_noise);
    const NoiseConstants resp = noise_constants(config.response_noise);
    ModelParams m;
    m.gamma_cap = sc.gamma_measured;
    m.k_alpha = cov.k_alpha;
    m.alpha = cov.alpha;
    m.gamma_var = cov.gamma;
    m.sigma_resp = resp.gamma;
    m.rho = config.rho;
    m.beta_l1 = sc.beta_star.lpNorm<1>();
    m.b_inf = sc.beta_star.size() > 0 ? sc.beta_star.lpNorm<Eigen::Infinity>() : 0.0;
    return apply_overrides(m, overrides);
}

TrialRecord run_trial(const ScenarioConfig& config, const ExperimentPolicy& policy, const Json& overrides, double delta1) {
    const auto start = std::chrono::steady_clock::now();
    const Scenario sc = gen_scenario(config);
    const double spec_err = spectral_error(sc.z, sc.a, config.rho);
    const Fit f = fit(sc.z, sc.y_omega, sc.omega, resolve_policy(policy, config, sc, spec_err));

    TrialRecord t;
    t.report.mse_train = mse_train(f.y_hat, sc.ey, sc.omega);
    t.report.mse_test = mse_test(f.y_hat, sc.ey);
    t.report.mcse = mcse(f.estimate.a_hat, sc.a, sc.omega);
    t.report.spectral_err = spec_err;
    t.report.rank_used = f.estimate.rank;
    t.report.trial_seed = config.seed;
    t.lambda_star = f.estimate.lambda_star;
    t.rho_hat = f.estimate.rho_hat;
    t.design_rank = f.design_rank;
    t.frob_sq_err_omega = frobenius_sq_error(f.estimate.a_hat, sc.a, sc.omega);
    t.gamma_measured = sc.gamma_measured;
    t.beta_l1 = sc.beta_star.lpNorm<1>();
    t.beta_hat_inf = f.beta_hat.size() > 0 ? f.beta_hat.lpNorm<Eigen::Infinity>() : 0.0;

    const Eigen::Index r = effective_rank(sc.tau, t.lambda_star / config.rho);
    t.r_at_threshold = r;
    const Eigen::Index kf = sc.a_factors.size();
    if (r < kf) {
        const Eigen::Index tail = kf - r;
        Matrix e = sc.a_factors.left.rightCols(tail) * sc.a_factors.singulars.tail(tail).asDiagonal() *
                   sc.a_factors.right.rightCols(tail).transpose();
        t.report.max_col_l2_sq_E = max_col_l2_sq(e);
    }
    t.tau_r = r >= 1 ? tau_at(sc.tau, r - 1) : kNaN;
    t.tau_r1 = tau_at(sc.tau, r);

    const ModelParams params = params_for(config, sc, overrides);
    t.delta = delta_bound(params, config.N, config.p);
    t.spectral_bound = spectral_bound(params, config.N, config.p, delta1);
    if (r >= 1 && t.tau_r > t.tau_r1) {
        t.mcse_bound = mcse_bound(params, config.N, config.p, t.tau_r, t.tau_r1, r, t.report.max_col_l2_sq_E);
        t.train_mse_bound = train_mse_bound(params, config.N, config.p, config.n, t.mcse_bound, r);
    } else {
        t.mcse_bound = kNaN;
        t.train_mse_bound = kNaN;
    }
    t.test_gap_bound = r >= 1 ? test_gap_bound(params, config.N, config.p, config.n, r) : kNaN;
    if (r >= 1) {
        t.window_valid = in_window(t.lambda_star, t.tau_r, t.tau_r1, config.rho, t.delta);
        t.window_valid_empirical = in_window(t.lambda_star, t.tau_r, t.tau_r1, config.rho, spec_err);
    }

    if (f.estimate.rank > 0) {
        const Matrix& u = f.estimate.retained.left;
        const double s1 = f.estimate.retained.singulars(0);
        Matrix phi = u * (u.transpose() * sc.a);
        double worst = 0.0;
        for (Eigen::Index j = 0; j < sc.a.cols(); ++j) {
            Vector a_part = f.estimate.a_hat.col(j) - phi.col(j);
            Vector b_part = phi.col(j) - sc.a.col(j);
            worst = std::max(worst, std::abs(a_part.dot(b_part)) / (a_part.norm() * b_part.norm() + s1 * s1));
        }
        t.pythag_residual = worst;
    }
    t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return t;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "schema_version", "experiment",       "sweep_index",    "sweep_value",    "trial",
        "trial_seed",     "N",                "p",              "n",              "rho",
        "covariates",     "cov_r",            "cov_frob_const", "cov_theta",      "cov_tau1_const",
        "cov_r_keep",     "covariate_noise",  "covariate_noise_param", "response_noise", "response_noise_param",
        "beta_star",      "beta_sparsity",    "beta_magnitude_min", "beta_magnitude_max", "policy",
        "mse_train",      "mse_test",         "mcse",           "max_col_l2_sq_E", "spectral_err",
        "rank_used",      "lambda_star",      "rho_hat",        "design_rank",    "frob_sq_err_omega",
        "gamma_measured", "beta_l1",          "beta_hat_inf",   "r_at_threshold", "tau_r",
        "tau_r1",         "delta",            "spectral_bound", "mcse_bound",     "train_mse_bound",
        "test_gap_bound", "window_valid",     "window_valid_empirical", "pythag_residual",
    };
    return cols;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec, unsigned threads) {
    validate(spec);
    const std::size_t points = sweep_points(spec);
    const auto trials = static_cast<std::size_t>(spec.trials);
    const std::size_t jobs = points * trials;

    std::vector<ScenarioConfig> configs;
    for (std::size_t k = 0; k < points; ++k) configs.push_back(config_at(spec, k));
    const std::uint64_t base_seed = configs.front().seed;

    std::vector<std::string> rows(jobs);
    std::vector<double> seconds(jobs, 0.0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex failure_mutex;
    std::size_t failed_job = jobs;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs || abort.load()) return;
            const std::size_t k = job / trials;
            const auto trial = static_cast<std::int64_t>(job % trials);
            ScenarioConfig cfg = configs[k];
            cfg.seed = trial_seed(base_seed, k, spec.trials, trial);
            try {
                TrialRecord rec = run_trial(cfg, spec.policy, spec.params, spec.delta1);
                rows[job] = format_row(spec, k, trial, cfg, spec.policy, rec);
                seconds[job] = rec.wall_seconds;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                std::cerr << "eivreg: trial " << trial << " of sweep point " << k << " failed (seed " << cfg.seed
                          << ")\n";
                if (job < failed_job) {
                    failed_job = job;
                    failure = std::current_exception();
                }
                abort.store(true);
            }
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentOutput out;
    out.csv = header_line();
    out.timing_csv = "sweep_index,trial,wall_seconds\n";
    for (std::size_t job = 0; job < jobs; ++job) {
        out.csv += rows[job];
        out.timing_csv += std::to_string(job / trials) + ',' + std::to_string(job % trials) + ',' +
                          io::format_double(seconds[job]) + '\n';
    }
    return out;
}

void write_experiment(const ExperimentSpec& spec, unsigned threads, const std::filesystem::path& path) {
    ExperimentOutput out = run_experiment(spec, threads);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + p.string());
        f << text;
        if (!f) throw ValidationError("write failed for " + p.string());
    };
    write(path, out.csv);
    write(path.string() + ".timing.csv", out.timing_csv);
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& summary_metrics() {
    static const std::vector<std::string> m = {"mse_train", "mse_test", "test_gap", "mcse", "spectral_err",
                                               "max_col_l2_sq_E"};
    return m;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

bool is_constant(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

Trend spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman: lengths differ");
    if (x.size() < 2 || is_constant(x) || is_constant(y)) return {0.0, false};
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return {sxy / std::sqrt(sxx * syy), true};
}

Summary summarize_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("summarize: empty CSV");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.empty() || header.front() != "schema_version") {
        throw ValidationError("summarize: first column must be schema_version");
    }
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ValidationError("summarize: missing column \"" + name + "\"");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_idx = col("sweep_index");
    const std::size_t c_val = col("sweep_value");
    const std::size_t c_train = col("mse_train");
    const std::size_t c_test = col("mse_test");
    std::map<std::string, std::size_t> metric_cols;
    for (const auto& m : summary_metrics()) {
        if (m != "test_gap") metric_cols[m] = col(m);
    }

    std::map<std::int64_t, PointSummary> points;
    std::map<std::int64_t, std::map<std::string, std::vector<double>>> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != header.size()) {
            throw ValidationError("summarize: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(header.size()));
        }
        if (cells.front() != std::to_string(kSchemaVersion)) {
            throw ValidationError("summarize: unsupported schema_version " + cells.front());
        }
        const auto idx = static_cast<std::int64_t>(io::parse_double(cells[c_idx]));
        PointSummary& ps = points[idx];
        ps.sweep_index = idx;
        ps.sweep_value = io::parse_double(cells[c_val]);
        ++ps.rows;
        auto& s = samples[idx];
        for (const auto& [name, c] : metric_cols) s[name].push_back(io::parse_double(cells[c]));
        s["test_gap"].push_back(io::parse_double(cells[c_test]) - io::parse_double(cells[c_train]));
    }

    Summary out;
    for (auto& [idx, ps] : points) {
        for (const auto& [name, values] : samples[idx]) {
            MetricStats st;
            st.median = quantile(values, 0.5);
            st.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
            st.q1 = quantile(values, 0.25);
            st.q3 = quantile(values, 0.75);
            ps.metrics[name] = st;
        }
        out.points.push_back(ps);
    }
    for (const auto& m : summary_metrics()) {
        std::vector<double> x, y;
        for (const auto& ps : out.points) {
            x.push_back(ps.sweep_value);
            y.push_back(ps.metrics.at(m).median);
        }
        out.trends[m] = spearman(x, y);
    }
    return out;
}

Summary summarize(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + csv_path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return summarize_csv(buf.str());
}

std::string format_summary(const Summary& s) {
    std::ostringstream out;
    out << "sweep_index,sweep_value,rows,metric,median,mean,q1,q3,iqr\n";
    for (const auto& ps : s.points) {
        for (const auto& m : summary_metrics()) {
            const MetricStats& st = ps.metrics.at(m);
            out << ps.sweep_index << ',' << io::format_double(ps.sweep_value) << ',' << ps.rows << ',' << m << ','
                << io::format_double(st.median) << ',' << io::format_double(st.mean) << ',' << io::format_double(st.q1)
                << ',' << io::format_double(st.q3) << ',' << io::format_double(st.iqr()) << '\n';
        }
    }
    out << "\nmetric,spearman_vs_sweep,defined\n";
    for (const auto& m : summary_metrics()) {
        const Trend& t = s.trends.at(m);
        out << m << ',' << io::format_double(t.spearman) << ',' << (t.defined ? "yes" : "no (constant column)") << '\n';
    }
    return out.str();
}

}  // namespace eivreg
