// Command-line front end: gen, fit, eval, experiment, summarize.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "eivreg/errors.hpp"
#include "eivreg/experiment.hpp"
#include "eivreg/matrix_io.hpp"

namespace fs = std::filesystem;
using namespace eivreg;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

unsigned resolve_threads(std::optional<unsigned> flag) {
    if (flag) return std::max(1u, *flag);
    if (const char* env = std::getenv("EIVREG_THREADS")) {
        try {
            std::size_t used = 0;
            const long v = std::stol(env, &used);
            if (used == std::string(env).size() && v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("EIVREG_THREADS must be a positive integer, got \"") + env + "\"");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_omega(const fs::path& path, const RowIndexSet& omega) {
    Vector v(static_cast<Eigen::Index>(omega.size()));
    for (std::size_t i = 0; i < omega.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(omega[i]);
    io::write_vector(path, v);
}

RowIndexSet read_omega(const fs::path& path) {
    const Vector v = io::read_vector(path);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != std::floor(v(i))) throw ValidationError(path.string() + ": row indices must be integers");
        idx.push_back(static_cast<Eigen::Index>(v(i)));
    }
    return RowIndexSet(std::move(idx));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void emit_json(const std::string& out, const Json& j) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json_file(out, j);
    }
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_gen(const GenArgs& args) {
    Json j = read_json_file(args.config);
    if (args.seed) j["seed"] = *args.seed;
    const ScenarioConfig config = scenario_config_from_json(j);
    const Scenario sc = gen_scenario(config);
    const fs::path dir(args.out);
    fs::create_directories(dir);
    write_json_file(dir / "config.json", to_json(config));
    io::write_dense(dir / "a.csv", sc.a);
    io::write_dense(dir / "h.csv", sc.h);
    io::write_masked(dir / "z.csv", sc.z);
    io::write_vector(dir / "beta_star.csv", sc.beta_star);
    write_omega(dir / "omega.csv", sc.omega);
    io::write_vector(dir / "y_omega.csv", sc.y_omega);
    io::write_vector(dir / "ey.csv", sc.ey);
    Json tau = Json::array();
    for (Eigen::Index i = 0; i < sc.tau.size(); ++i) tau.push_back(sc.tau(i));
    write_json_file(dir / "scenario.json", Json{{"gamma_measured", sc.gamma_measured},
                                                {"model_rank", model_rank(config.covariates)},
                                                {"observed_fraction", observed_fraction(sc.z)},
                                                {"tau", tau}});
}

struct FitArgs {
    std::string scenario;
    std::string z, y, omega;
    std::string policy;
    std::optional<Eigen::Index> rank;
    std::optional<double> threshold;
    std::optional<double> energy;
    std::optional<double> rcond;
    std::string out;
};

ThresholdPolicy policy_from_args(const FitArgs& args) {
    const int given = !args.policy.empty() + args.rank.has_value() + args.threshold.has_value() + args.energy.has_value();
    if (given != 1) throw ValidationError("give exactly one of --policy, --rank, --threshold, --energy");
    if (args.rank) return FixedRank{*args.rank};
    if (args.threshold) return FixedThreshold{*args.threshold};
    if (args.energy) return EnergyFraction{*args.energy};
    const Json j = fs::exists(args.policy) ? read_json_file(args.policy) : Json::parse(args.policy);
    return threshold_policy_from_json(j);
}

void run_fit(const FitArgs& args) {
    fs::path z_path, y_path, omega_path;
    if (!args.scenario.empty()) {
        const fs::path dir(args.scenario);
        z_path = dir / "z.csv";
        y_path = dir / "y_omega.csv";
        omega_path = dir / "omega.csv";
    }
    if (!args.z.empty()) z_path = args.z;
    if (!args.y.empty()) y_path = args.y;
    if (!args.omega.empty()) omega_path = args.omega;
    if (z_path.empty() || y_path.empty() || omega_path.empty()) {
        throw ValidationError("fit needs --scenario or all of --z, --y, --omega");
    }
    const ThresholdPolicy policy = policy_from_args(args);
    const MaskedMatrix z = io::read_any(z_path);
    const Vector y = io::read_vector(y_path);
    const RowIndexSet omega = read_omega(omega_path);
    const Fit f = fit(z, y, omega, policy, args.rcond.value_or(-1.0));

    const fs::path dir(args.out);
    fs::create_directories(dir);
    io::write_dense(dir / "a_hat.csv", f.estimate.a_hat);
    io::write_vector(dir / "y_hat.csv", f.y_hat);
    Json summary = fit_summary_json(f, "a_hat.csv", "y_hat.csv");
    summary["policy"] = to_json(policy);
    write_json_file(dir / "fit.json", summary);
}

struct EvalArgs {
    std::string scenario;
    std::string fit;
    std::string out;
};

void run_eval(const EvalArgs& args) {
    const fs::path sdir(args.scenario);
    const fs::path fdir(args.fit);
    const ScenarioConfig config = scenario_config_from_json(read_json_file(sdir / "config.json"));
    const Matrix a = io::read_dense(sdir / "a.csv");
    const MaskedMatrix z = io::read_any(sdir / "z.csv");
    const Vector ey = io::read_vector(sdir / "ey.csv");
    const RowIndexSet omega = read_omega(sdir / "omega.csv");

    const Json summary = read_json_file(fdir / "fit.json");
    auto resolve = [&](const char* key) {
        const fs::path p = summary.at(key).get<std::string>();
        return p.is_absolute() ? p : fdir / p;
    };
    const Matrix a_hat = io::read_dense(resolve("a_hat_path"));
    const Vector y_hat = io::read_vector(resolve("y_hat_path"));
    if (a_hat.rows() != a.rows() || a_hat.cols() != a.cols() || y_hat.size() != ey.size()) {
        throw ValidationError("fit and scenario dimensions differ");
    }

    ErrorReport report;
    report.mse_train = mse_train(y_hat, ey, omega);
    report.mse_test = mse_test(y_hat, ey);
    report.mcse = mcse(a_hat, a, omega);
    report.spectral_err = spectral_error(z, a, config.rho);
    report.rank_used = summary.at("rank").get<Eigen::Index>();
    report.trial_seed = config.seed;
    const Svd factors = svd(a);
    const Eigen::Index r = effective_rank(factors.singulars, summary.at("lambda_star").get<double>() / config.rho);
    report.max_col_l2_sq_E = max_col_l2_sq(a - factors.reconstruct(r));
    emit_json(args.out, to_json(report));
}

struct ExperimentArgs {
    std::string spec;
    std::string preset;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

void run_experiment_cmd(const ExperimentArgs& args) {
    if (args.spec.empty() == args.preset.empty()) throw ValidationError("give exactly one of --spec, --preset");
    ExperimentSpec spec = args.preset.empty() ? experiment_spec_from_json(read_json_file(args.spec)) : preset(args.preset);
    if (args.trials) spec.trials = *args.trials;
    if (args.seed) spec.base["seed"] = *args.seed;
    validate(spec);
    const std::string out = args.out.empty() ? spec.output_path : args.out;
    if (out.empty()) throw ValidationError("no output path: pass --out or set output_path in the experiment file");
    write_experiment(spec, resolve_threads(args.threads), out);
}

struct SummarizeArgs {
    std::string csv;
    std::string out;
};

void run_summarize(const SummarizeArgs& args) {
    const std::string table = format_summary(summarize(args.csv));
    if (args.out.empty() || args.out == "-") {
        std::cout << table;
    } else {
        write_text(args.out, table);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Error-in-variables regression by hard singular value thresholding"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scenario from a config JSON");
    gen_cmd->add_option("--config", gen.config, "ScenarioConfig JSON file")->required();
    gen_cmd->add_option("--seed", gen.seed, "Override the config seed");
    gen_cmd->add_option("--out", gen.out, "Output directory")->required();

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "De-noise covariates and regress");
    fit_cmd->add_option("--scenario", fa.scenario, "Scenario directory written by gen");
    fit_cmd->add_option("--z", fa.z, "Covariate matrix CSV");
    fit_cmd->add_option("--y", fa.y, "Observed responses CSV");
    fit_cmd->add_option("--omega", fa.omega, "Training row indices CSV (0-based)");
    fit_cmd->add_option("--policy", fa.policy, "Threshold policy as a JSON file or inline JSON");
    fit_cmd->add_option("--rank", fa.rank, "FixedRank(k)");
    fit_cmd->add_option("--threshold", fa.threshold, "FixedThreshold(lambda)");
    fit_cmd->add_option("--energy", fa.energy, "EnergyFraction(t)");
    fit_cmd->add_option("--rcond", fa.rcond, "Relative cutoff for the pseudoinverse");
    fit_cmd->add_option("--out", fa.out, "Output directory")->required();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a fit against its scenario");
    eval_cmd->add_option("--scenario", ev.scenario, "Scenario directory")->required();
    eval_cmd->add_option("--fit", ev.fit, "Fit directory")->required();
    eval_cmd->add_option("--out", ev.out, "ErrorReport JSON path (default stdout)");

    ExperimentArgs ex;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte-Carlo sweep and write CSV");
    exp_cmd->add_option("--spec", ex.spec, "ExperimentSpec JSON file");
    exp_cmd->add_option("--preset", ex.preset, "Built-in design")->check(CLI::IsMember(preset_names()));
    exp_cmd->add_option("--trials", ex.trials, "Override the trial count");
    exp_cmd->add_option("--seed", ex.seed, "Override the base seed");
    exp_cmd->add_option("--threads", ex.threads, "Worker threads (default $EIVREG_THREADS, then all cores)");
    exp_cmd->add_option("--out", ex.out, "CSV path (default: output_path from the experiment file)");

    SummarizeArgs su;
    auto* sum_cmd = app.add_subcommand("summarize", "Per-sweep-point statistics of an experiment CSV");
    sum_cmd->add_option("csv", su.csv, "Experiment CSV")->required();
    sum_cmd->add_option("--out", su.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*gen_cmd) run_gen(gen);
        if (*fit_cmd) run_fit(fa);
        if (*eval_cmd) run_eval(ev);
        if (*exp_cmd) run_experiment_cmd(ex);
        if (*sum_cmd) run_summarize(su);
    } catch (const NumericalError& e) {
        std::cerr << "eivreg: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ValidationError& e) {
        std::cerr << "eivreg: " << e.what() << '\n';
        return kExitValidation;
    } catch (const Json::exception& e) {
        std::cerr << "eivreg: invalid JSON: " << e.what() << '\n';
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "eivreg: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
