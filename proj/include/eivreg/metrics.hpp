#pragma once

#include <cstdint>

#include "eivreg/linalg.hpp"

namespace eivreg {

/// Per-realization error quantities for one trial.
struct ErrorReport {
    double mse_train = 0.0;
    double mse_test = 0.0;
    double mcse = 0.0;
    double max_col_l2_sq_E = 0.0;
    double spectral_err = 0.0;
    Eigen::Index rank_used = 0;
    std::uint64_t trial_seed = 0;
};

/// Kahan-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Mean squared prediction error over the rows in omega.
double mse_train(const Vector& y_hat, const Vector& ey, const RowIndexSet& omega);
/// Mean squared prediction error over every row.
double mse_test(const Vector& y_hat, const Vector& ey);

/// max_j sum_{i in omega} (a_hat_ij - a_ij)^2
double mcse(const Matrix& a_hat, const Matrix& a, const RowIndexSet& omega);
/// sum_{i in omega, j} (a_hat_ij - a_ij)^2
double frobenius_sq_error(const Matrix& a_hat, const Matrix& a, const RowIndexSet& omega);

/// Largest squared column l2 norm.
double max_col_l2_sq(const Matrix& m);

/// Spectral norm of z.values - rho * a, unobserved cells read as 0.
double spectral_error(const MaskedMatrix& z, const Matrix& a, double rho);

}  // namespace eivreg
