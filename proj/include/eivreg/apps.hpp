#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "eivreg/regression.hpp"
#include "eivreg/synth.hpp"

namespace eivreg {

struct SyntheticControlProblem {
    /// Time periods x donor units.
    MaskedMatrix donors;
    /// Treated unit's responses over the pre-treatment prefix.
    Vector treated_pre;
};

struct Counterfactual {
    /// Estimated untreated trajectory of the treated unit over every period.
    Vector counterfactual;
    Fit fit;
};

/// Regress the treated unit on the de-noised donors over the pre-period and
/// extrapolate to all periods.
Counterfactual synthetic_control(const SyntheticControlProblem& problem, const ThresholdPolicy& policy);

struct TimeSeriesProblem {
    Series series;
    Eigen::Index page_rows = 1;
    Eigen::Index page_cols = 1;
};

void validate(const TimeSeriesProblem& problem);

/// De-noise the page matrix and average each anti-diagonal back onto its time
/// index. Times not covered by the page matrix are NaN.
std::vector<double> ts_impute(const TimeSeriesProblem& problem, const ThresholdPolicy& policy);

struct Forecast {
    std::vector<double> values;
    /// RMSE of the fitted responses against the observed training responses.
    double in_sample_rmse = 0.0;
    Fit fit;
};

/// Autoregressive forecast through the de-noised lag matrix.
///
/// Row i of the lag matrix holds the page_cols values preceding time
/// t_i = origin - m + i and its response is X(t_i). The last row ends right
/// before `origin` and has no response. At most page_rows training rows are
/// used. Only series[0, origin) is read; `origin` defaults to the series length.
Forecast ts_forecast(const TimeSeriesProblem& problem, const ThresholdPolicy& policy, Eigen::Index horizon,
                     std::optional<Eigen::Index> origin = std::nullopt);

/// One value per line; blank lines (or "nan") are missing.
Series read_series(const std::filesystem::path& path);

}  // namespace eivreg
