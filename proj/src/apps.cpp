#include "eivreg/apps.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "eivreg/errors.hpp"
#include "eivreg/matrix_io.hpp"

namespace eivreg {

Counterfactual synthetic_control(const SyntheticControlProblem& problem, const ThresholdPolicy& policy) {
    const Eigen::Index n = problem.treated_pre.size();
    if (n < 1) throw ValidationError("synthetic_control: pre-treatment period is empty");
    if (n > problem.donors.rows()) {
        throw ValidationError("synthetic_control: " + std::to_string(n) + " pre-treatment responses but only " +
                              std::to_string(problem.donors.rows()) + " periods");
    }
    Fit f = fit(problem.donors, problem.treated_pre, RowIndexSet::prefix(n), policy);
    Vector cf = f.y_hat;
    return Counterfactual{std::move(cf), std::move(f)};
}

void validate(const TimeSeriesProblem& problem) {
    const auto T = static_cast<Eigen::Index>(problem.series.size());
    if (problem.page_rows < 1 || problem.page_cols < 1) {
        throw ValidationError("time series: page dimensions must be positive");
    }
    if (problem.page_rows + problem.page_cols - 1 > T) {
        throw ValidationError("time series: page matrix " + std::to_string(problem.page_rows) + "x" +
                              std::to_string(problem.page_cols) + " needs " +
                              std::to_string(problem.page_rows + problem.page_cols - 1) + " points, series has " +
                              std::to_string(T));
    }
}

std::vector<double> ts_impute(const TimeSeriesProblem& problem, const ThresholdPolicy& policy) {
    validate(problem);
    const Eigen::Index N = problem.page_rows;
    const Eigen::Index p = problem.page_cols;
    MaskedMatrix z = page_matrix(problem.series, N, p);
    Estimate est = denoise(z, policy);

    const Eigen::Index covered = N + p - 1;
    std::vector<double> sum(static_cast<std::size_t>(covered), 0.0);
    std::vector<int> count(static_cast<std::size_t>(covered), 0);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            sum[static_cast<std::size_t>(i + j)] += est.a_hat(i, j);
            ++count[static_cast<std::size_t>(i + j)];
        }
    }
    std::vector<double> out(problem.series.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < sum.size(); ++t) out[t] = sum[t] / count[t];
    return out;
}

Forecast ts_forecast(const TimeSeriesProblem& problem, const ThresholdPolicy& policy, Eigen::Index horizon,
                     std::optional<Eigen::Index> origin) {
    const auto T = static_cast<Eigen::Index>(problem.series.size());
    const Eigen::Index o = origin.value_or(T);
    const Eigen::Index p = problem.page_cols;
    if (horizon < 1) throw ValidationError("ts_forecast: horizon must be >= 1");
    if (p < 1 || problem.page_rows < 1) throw ValidationError("ts_forecast: page dimensions must be positive");
    if (o > T || o < p + 1) {
        throw ValidationError("ts_forecast: origin " + std::to_string(o) + " must lie in [" + std::to_string(p + 1) +
                              ", " + std::to_string(T) + "]");
    }
    const Eigen::Index m = std::min(problem.page_rows, o - p);

    Matrix values = Matrix::Zero(m + 1, p);
    Mask mask = Mask::Constant(m + 1, p, false);
    std::vector<Eigen::Index> train;
    std::vector<double> responses;
    for (Eigen::Index i = 0; i <= m; ++i) {
        const Eigen::Index t = o - m + i;
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto& x = problem.series[static_cast<std::size_t>(t - p + j)];
            if (x) {
                values(i, j) = *x;
                mask(i, j) = true;
            }
        }
        if (i < m) {
            const auto& y = problem.series[static_cast<std::size_t>(t)];
            if (y) {
                train.push_back(i);
                responses.push_back(*y);
            }
        }
    }
    if (train.empty()) throw ValidationError("ts_forecast: no observed responses before the origin");

    MaskedMatrix z(std::move(values), std::move(mask));
    RowIndexSet omega(train);
    Vector y = Eigen::Map<const Vector>(responses.data(), static_cast<Eigen::Index>(responses.size()));
    Fit f = fit(z, y, omega, policy);

    const double rmse =
        std::sqrt((restrict_rows(f.y_hat, omega) - y).squaredNorm() / static_cast<double>(y.size()));

    std::vector<double> ahead;
    Vector window = f.estimate.a_hat.row(m).transpose();
    double next = f.y_hat(m);
    ahead.push_back(next);
    for (Eigen::Index h = 1; h < horizon; ++h) {
        for (Eigen::Index j = 0; j + 1 < p; ++j) window(j) = window(j + 1);
        window(p - 1) = next;
        next = window.dot(f.beta_hat);
        ahead.push_back(next);
    }
    return Forecast{std::move(ahead), rmse, std::move(f)};
}

Series read_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    Series out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line == "nan" || line == "NA") {
            out.emplace_back(std::nullopt);
        } else {
            double v = io::parse_double(line);
            if (!std::isfinite(v)) throw ValidationError(path.string() + ": non-finite value");
            out.emplace_back(v);
        }
    }
    return out;
}

}  // namespace eivreg
