#include "eivreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

constexpr double kSignPivotTolerance = 1e-12;

std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw ValidationError(std::string(what) + ": matrix must be nonempty, got " +
                              shape(m.rows(), m.cols()));
    }
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + ": matrix has non-finite entries");
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw ValidationError(std::string(what) + ": vector has non-finite entries");
    }
}

MaskedMatrix::MaskedMatrix(Matrix values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
    if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols()) {
        throw ValidationError("masked matrix: values are " + shape(values_.rows(), values_.cols()) +
                              " but mask is " + shape(mask_.rows(), mask_.cols()));
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            if (!mask_(i, j)) values_(i, j) = 0.0;
        }
    }
    require_finite(values_, "masked matrix");
}

MaskedMatrix MaskedMatrix::fully_observed(Matrix values) {
    Mask mask = Mask::Constant(values.rows(), values.cols(), true);
    return MaskedMatrix(std::move(values), std::move(mask));
}

std::size_t MaskedMatrix::observed_count() const noexcept {
    return static_cast<std::size_t>(mask_.count());
}

Matrix Svd::reconstruct(Eigen::Index k) const {
    k = std::clamp<Eigen::Index>(k, 0, size());
    return left.leftCols(k) * singulars.head(k).asDiagonal() * right.leftCols(k).transpose();
}

Svd Svd::truncated(Eigen::Index k) const {
    k = std::clamp<Eigen::Index>(k, 0, size());
    return Svd{left.leftCols(k), singulars.head(k), right.leftCols(k)};
}

RowIndexSet::RowIndexSet(std::vector<Eigen::Index> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw ValidationError("row index set must be nonempty");
    std::sort(indices_.begin(), indices_.end());
    if (indices_.front() < 0) throw ValidationError("row index set has a negative index");
    auto dup = std::adjacent_find(indices_.begin(), indices_.end());
    if (dup != indices_.end()) {
        throw ValidationError("row index set has duplicate index " + std::to_string(*dup));
    }
}

RowIndexSet RowIndexSet::prefix(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(std::max<Eigen::Index>(n, 0)));
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<Eigen::Index>(k);
    return RowIndexSet(std::move(idx));
}

bool RowIndexSet::contains(Eigen::Index i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
}

void RowIndexSet::check_within(Eigen::Index rows) const {
    if (max() >= rows) {
        throw ValidationError("row index " + std::to_string(max()) + " out of range for " +
                              std::to_string(rows) + " rows");
    }
}

Svd svd(const Matrix& m) {
    require_finite(m, "svd");
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) {
        throw NumericalError("svd did not converge on a " + shape(m.rows(), m.cols()) + " matrix");
    }
    Svd out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        auto col = out.left.col(k);
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (std::abs(col(i)) > kSignPivotTolerance) {
                if (col(i) < 0) {
                    col = -col;
                    out.right.col(k) = -out.right.col(k);
                }
                break;
            }
        }
    }
    return out;
}

Vector singular_values(const Matrix& m) {
    require_finite(m, "singular_values");
    Eigen::BDCSVD<Matrix> dec(m);
    if (dec.info() != Eigen::Success) {
        throw NumericalError("svd did not converge on a " + shape(m.rows(), m.cols()) + " matrix");
    }
    return dec.singularValues();
}

double spectral_norm(const Matrix& m) {
    Vector s = singular_values(m);
    return s.size() > 0 ? s(0) : 0.0;
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

Matrix restrict_rows(const Matrix& m, const RowIndexSet& omega) {
    omega.check_within(m.rows());
    Matrix out(static_cast<Eigen::Index>(omega.size()), m.cols());
    for (std::size_t k = 0; k < omega.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = m.row(omega[k]);
    }
    return out;
}

Vector restrict_rows(const Vector& v, const RowIndexSet& omega) {
    omega.check_within(v.size());
    Vector out(static_cast<Eigen::Index>(omega.size()));
    for (std::size_t k = 0; k < omega.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(omega[k]);
    return out;
}

}  // namespace eivreg
