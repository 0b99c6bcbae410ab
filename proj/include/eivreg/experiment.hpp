#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eivreg/bounds.hpp"
#include "eivreg/metrics.hpp"
#include "eivreg/serialization.hpp"
#include "eivreg/synth.hpp"

namespace eivreg {

/// FixedRank(k) with k read from the scenario's covariate model.
struct ModelRankPolicy {};

/// lambda* at the midpoint of (rho tau_{r+1} + D, rho tau_r - D), where r is
/// the covariate model rank and D the realized ||Z - rho A||. Falls back to
/// FixedRank(r) when the window is empty.
struct WindowMidpointPolicy {};

using ExperimentPolicy = std::variant<ThresholdPolicy, ModelRankPolicy, WindowMidpointPolicy>;

Json to_json(const ExperimentPolicy& policy);
ExperimentPolicy experiment_policy_from_json(const Json& j);

/// One swept field. All axes of an experiment have the same number of values and are
/// advanced together: sweep point k sets every path to its k-th value.
struct SweepAxis {
    /// Dotted path into the scenario config JSON, e.g. "p" or "covariates.r_keep".
    std::string path;
    std::vector<Json> values;
};

struct ExperimentSpec {
    std::string name;
    Json base;  ///< ScenarioConfig JSON; validated per sweep point
    std::vector<SweepAxis> sweep;
    std::int64_t trials = 1;
    ExperimentPolicy policy = ModelRankPolicy{};
    Json params = Json::object();  ///< ModelParams overrides
    double delta1 = 7.0;           ///< spectral_bound confidence parameter
    std::string output_path;
};

ExperimentSpec experiment_spec_from_json(const Json& j);
Json to_json(const ExperimentSpec& spec);
void validate(const ExperimentSpec& spec);

/// Names accepted by `preset`.
std::vector<std::string> preset_names();
/// Built-in designs: "case1", "case2", "bound-check", "test-gap".
ExperimentSpec preset(std::string_view name);

/// ceil(2 log log p / log(1/theta))
Eigen::Index case2_rank_schedule(Eigen::Index p, double theta);

std::size_t sweep_points(const ExperimentSpec& spec);
/// Scenario config of sweep point `k` (seed untouched).
ScenarioConfig config_at(const ExperimentSpec& spec, std::size_t k);

/// Everything measured for one scenario realization.
struct TrialRecord {
    ErrorReport report;
    double lambda_star = 0.0;
    double rho_hat = 0.0;
    Eigen::Index design_rank = 0;
    double frob_sq_err_omega = 0.0;
    double gamma_measured = 0.0;
    double beta_l1 = 0.0;
    double beta_hat_inf = 0.0;
    /// Components of A above lambda*/rho; the rank the bounds are evaluated at.
    Eigen::Index r_at_threshold = 0;
    double tau_r = 0.0;
    double tau_r1 = 0.0;
    double delta = 0.0;
    double spectral_bound = 0.0;
    double mcse_bound = 0.0;  ///< NaN when the spectral gap is empty
    double train_mse_bound = 0.0;
    double test_gap_bound = 0.0;
    bool window_valid = false;
    bool window_valid_empirical = false;
    /// max_j |<u_j, v_j>| / (||u_j|| ||v_j|| + s_1^2) for the split
    /// A_hat_j - A_j = (A_hat_j - phi(A_j)) + (phi(A_j) - A_j).
    double pythag_residual = 0.0;
    double wall_seconds = 0.0;
};

/// Bound-side constants for a realized scenario: noise constants from the
/// config, Gamma measured from A, overrides applied last.
ModelParams params_for(const ScenarioConfig& config, const Scenario& scenario, const Json& overrides);

/// Generate, fit, and evaluate one trial.
TrialRecord run_trial(const ScenarioConfig& config, const ExperimentPolicy& policy, const Json& overrides = Json::object(),
                      double delta1 = 7.0);

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t sweep_index, std::int64_t trials, std::int64_t trial);

/// Column names of the experiment CSV, in order.
const std::vector<std::string>& csv_columns();
inline constexpr int kSchemaVersion = 1;

struct ExperimentOutput {
    std::string csv;
    /// "sweep_index,trial,wall_seconds" rows; kept apart so `csv` is reproducible.
    std::string timing_csv;
};

/// Runs every (sweep point, trial) on `threads` workers. Rows are emitted in
/// (sweep point, trial) order regardless of completion order.
ExperimentOutput run_experiment(const ExperimentSpec& spec, unsigned threads);

/// Writes the CSV to `path` and the timing rows to "<path>.timing.csv".
void write_experiment(const ExperimentSpec& spec, unsigned threads, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Summaries

struct MetricStats {
    double median = 0.0;
    double mean = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr() const { return q3 - q1; }
};

struct PointSummary {
    std::int64_t sweep_index = 0;
    double sweep_value = 0.0;
    std::size_t rows = 0;
    std::map<std::string, MetricStats> metrics;
};

struct Trend {
    double spearman = 0.0;
    /// False when either the swept values or the medians are constant.
    bool defined = false;
};

struct Summary {
    std::vector<PointSummary> points;
    std::map<std::string, Trend> trends;
};

/// Metrics summarized per sweep point. "test_gap" is mse_test - mse_train.
const std::vector<std::string>& summary_metrics();

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Spearman rank correlation with average ranks for ties; {0, false} when
/// either input is constant.
Trend spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Throws ValidationError when the text does not follow the CSV schema.
Summary summarize_csv(std::string_view csv_text);
Summary summarize(const std::filesystem::path& csv_path);
std::string format_summary(const Summary& summary);

}  // namespace eivreg
