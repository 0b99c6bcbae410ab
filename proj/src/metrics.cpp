#include "eivreg/metrics.hpp"

#include <algorithm>
#include <string>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

void require_same_length(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw ValidationError(std::string(what) + ": lengths " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()) + " differ");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError(std::string(what) + ": shapes differ");
    }
}

double column_sum_sq(const Matrix& a_hat, const Matrix& a, const RowIndexSet& omega, Eigen::Index j) {
    CompensatedSum s;
    for (Eigen::Index i : omega.indices()) {
        const double d = a_hat(i, j) - a(i, j);
        s.add(d * d);
    }
    return s.value();
}

}  // namespace

double mse_train(const Vector& y_hat, const Vector& ey, const RowIndexSet& omega) {
    require_same_length(y_hat, ey, "mse_train");
    omega.check_within(y_hat.size());
    CompensatedSum s;
    for (Eigen::Index i : omega.indices()) {
        const double d = y_hat(i) - ey(i);
        s.add(d * d);
    }
    return s.value() / static_cast<double>(omega.size());
}

double mse_test(const Vector& y_hat, const Vector& ey) {
    require_same_length(y_hat, ey, "mse_test");
    if (y_hat.size() == 0) throw ValidationError("mse_test: empty vectors");
    return mse_train(y_hat, ey, RowIndexSet::prefix(y_hat.size()));
}

double mcse(const Matrix& a_hat, const Matrix& a, const RowIndexSet& omega) {
    require_same_shape(a_hat, a, "mcse");
    omega.check_within(a.rows());
    double best = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) best = std::max(best, column_sum_sq(a_hat, a, omega, j));
    return best;
}

double frobenius_sq_error(const Matrix& a_hat, const Matrix& a, const RowIndexSet& omega) {
    require_same_shape(a_hat, a, "frobenius_sq_error");
    omega.check_within(a.rows());
    CompensatedSum s;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s.add(column_sum_sq(a_hat, a, omega, j));
    return s.value();
}

double max_col_l2_sq(const Matrix& m) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        CompensatedSum s;
        for (Eigen::Index i = 0; i < m.rows(); ++i) s.add(m(i, j) * m(i, j));
        best = std::max(best, s.value());
    }
    return best;
}

double spectral_error(const MaskedMatrix& z, const Matrix& a, double rho) {
    require_same_shape(z.values(), a, "spectral_error");
    return spectral_norm(z.values() - rho * a);
}

}  // namespace eivreg
