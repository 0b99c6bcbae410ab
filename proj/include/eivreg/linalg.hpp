#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace eivreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Throws ValidationError if `m` is empty or holds a NaN/Inf entry.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// Observed matrix with a boolean mask. Unobserved entries are stored as 0.
class MaskedMatrix {
public:
    /// Zeroes every unobserved value so the stored matrix is canonical.
    MaskedMatrix(Matrix values, Mask mask);

    /// Fully observed wrapper.
    static MaskedMatrix fully_observed(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    const Mask& mask() const noexcept { return mask_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    std::size_t observed_count() const noexcept;

private:
    Matrix values_;
    Mask mask_;
};

/// Thin singular value decomposition left * diag(singulars) * right^T.
///
/// Singular values are nonincreasing. Each left vector's first entry with
/// magnitude above 1e-12 is nonnegative; the matching right vector is flipped
/// along with it.
struct Svd {
    Matrix left;
    Vector singulars;
    Matrix right;

    Eigen::Index size() const noexcept { return singulars.size(); }
    /// Sum of the leading `k` components.
    Matrix reconstruct(Eigen::Index k) const;
    Matrix reconstruct() const { return reconstruct(size()); }
    /// Copy keeping only the leading `k` components.
    Svd truncated(Eigen::Index k) const;
};

/// Sorted, duplicate-free set of zero-based row indices.
class RowIndexSet {
public:
    /// Sorts the input; throws ValidationError on duplicates or an empty list.
    explicit RowIndexSet(std::vector<Eigen::Index> indices);
    RowIndexSet(std::initializer_list<Eigen::Index> indices)
        : RowIndexSet(std::vector<Eigen::Index>(indices)) {}

    /// {0, 1, ..., n-1}
    static RowIndexSet prefix(Eigen::Index n);

    std::span<const Eigen::Index> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    Eigen::Index operator[](std::size_t k) const { return indices_[k]; }
    Eigen::Index max() const noexcept { return indices_.back(); }
    bool contains(Eigen::Index i) const;

    /// Throws ValidationError if any index is >= rows.
    void check_within(Eigen::Index rows) const;

    friend bool operator==(const RowIndexSet&, const RowIndexSet&) = default;

private:
    std::vector<Eigen::Index> indices_;
};

/// Thin SVD with the sign convention above. Throws NumericalError when the
/// decomposition does not converge.
Svd svd(const Matrix& m);

/// Singular values only, nonincreasing.
Vector singular_values(const Matrix& m);

double spectral_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);

Matrix restrict_rows(const Matrix& m, const RowIndexSet& omega);
Vector restrict_rows(const Vector& v, const RowIndexSet& omega);

}  // namespace eivreg
