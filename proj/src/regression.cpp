#include "eivreg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

constexpr double kSparseRankTolerance = 1e-8;

// beta = right * diag(1/s) * left^T y over the first `keep` components.
LeastSquares solve_from_factors(const Matrix& left, const Vector& s, const Matrix& right, const Vector& y,
                                double rcond, std::optional<Eigen::Index> max_rank) {
    Eigen::Index keep = 0;
    if (s.size() > 0 && s(0) > 0.0) {
        const double cutoff = rcond * s(0);
        while (keep < s.size() && s(keep) > 0.0 && s(keep) >= cutoff) ++keep;
    }
    if (max_rank) keep = std::min(keep, *max_rank);
    Vector coeff = left.leftCols(keep).transpose() * y;
    coeff.array() /= s.head(keep).array();
    LeastSquares out;
    out.beta = right.leftCols(keep) * coeff;
    out.rank = keep;
    Vector fitted = left.leftCols(keep) * (left.leftCols(keep).transpose() * y);
    out.residual_norm = (fitted - y).norm();
    return out;
}

}  // namespace

double default_rcond(Eigen::Index rows, Eigen::Index cols) {
    return static_cast<double>(std::max(rows, cols)) * std::ldexp(1.0, -52);
}

LeastSquares pinv_solve(const Matrix& m, const Vector& y, double rcond, std::optional<Eigen::Index> max_rank) {
    if (y.size() != m.rows()) {
        throw ValidationError("pinv_solve: design has " + std::to_string(m.rows()) + " rows but y has " +
                              std::to_string(y.size()) + " entries");
    }
    if (!(rcond >= 0.0 && rcond < 1.0)) throw ValidationError("pinv_solve: rcond must lie in [0, 1)");
    require_finite(y, "pinv_solve");
    Svd dec = svd(m);
    LeastSquares out = solve_from_factors(dec.left, dec.singulars, dec.right, y, rcond, max_rank);
    out.residual_norm = (m * out.beta - y).norm();
    return out;
}

Fit fit(const MaskedMatrix& z, const Vector& y_omega, const RowIndexSet& omega, const ThresholdPolicy& policy,
        double rcond) {
    if (static_cast<Eigen::Index>(omega.size()) != y_omega.size()) {
        throw ValidationError("fit: omega has " + std::to_string(omega.size()) + " rows but y_omega has " +
                              std::to_string(y_omega.size()) + " entries");
    }
    omega.check_within(z.rows());
    require_finite(y_omega, "fit");

    Estimate est = denoise(z, policy);
    const auto n = static_cast<Eigen::Index>(omega.size());
    const Eigen::Index p = z.cols();
    if (rcond < 0.0) rcond = default_rcond(n, p);
    if (!(rcond < 1.0)) throw ValidationError("fit: rcond must lie in [0, 1)");

    // The de-noised design is (1/rho_hat) U_omega S V^T with U, V from the
    // retained factors, so its SVD follows from an n x r problem:
    //   U_omega S / rho_hat = Q R,  R = P Sigma W^T  =>  design = (Q P) Sigma (V W)^T.
    const Eigen::Index r = est.rank;
    Vector beta = Vector::Zero(p);
    Eigen::Index design_rank = 0;
    if (r > 0) {
        Matrix g = restrict_rows(est.retained.left, omega) * est.retained.singulars.asDiagonal();
        g /= est.rho_hat;
        const Eigen::Index k = std::min(n, r);
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(n, k);
        Matrix rr = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        Svd small = svd(rr);
        Matrix left = q * small.left;
        Matrix right = est.retained.right * small.right;
        LeastSquares ls = solve_from_factors(left, small.singulars, right, y_omega, rcond, r);
        beta = std::move(ls.beta);
        design_rank = ls.rank;
    }

    Fit out{beta, std::move(est), Vector{}, omega, design_rank, rcond};
    out.y_hat = out.estimate.a_hat * out.beta_hat;
    return out;
}

Vector sparse_equivalent(const Matrix& x, const Vector& beta) {
    if (beta.size() != x.cols()) {
        throw ValidationError("sparse_equivalent: beta has length " + std::to_string(beta.size()) +
                              " but x has " + std::to_string(x.cols()) + " columns");
    }
    require_finite(beta, "sparse_equivalent");
    Vector s = singular_values(x);
    const double top = s.size() > 0 ? s(0) : 0.0;
    const double tol = kSparseRankTolerance * top;
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > tol) ++rank;
    if (rank == 0) return Vector::Zero(x.cols());

    std::vector<Eigen::Index> basis;
    Matrix q(x.rows(), rank);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto k = static_cast<Eigen::Index>(basis.size());
        Vector v = x.col(j);
        for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(k) * (q.leftCols(k).transpose() * v);
        const double resid = v.norm();
        if (resid > tol) {
            if (k == rank) {
                throw NumericalError("sparse_equivalent: column " + std::to_string(j) +
                                     " is independent beyond numerical rank " + std::to_string(rank));
            }
            q.col(k) = v / resid;
            basis.push_back(j);
        }
    }
    if (static_cast<Eigen::Index>(basis.size()) != rank) {
        throw NumericalError("sparse_equivalent: selected " + std::to_string(basis.size()) +
                             " basis columns for numerical rank " + std::to_string(rank));
    }

    Matrix b(x.rows(), rank);
    for (Eigen::Index k = 0; k < rank; ++k) b.col(k) = x.col(basis[static_cast<std::size_t>(k)]);
    Eigen::HouseholderQR<Matrix> qr(b);

    Vector out = Vector::Zero(x.cols());
    for (Eigen::Index k = 0; k < rank; ++k) {
        out(basis[static_cast<std::size_t>(k)]) = beta(basis[static_cast<std::size_t>(k)]);
    }
    Eigen::Index next = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (next < rank && basis[static_cast<std::size_t>(next)] == j) {
            ++next;
            continue;
        }
        if (beta(j) == 0.0) continue;
        Vector coeff = qr.solve(Vector(x.col(j)));
        for (Eigen::Index k = 0; k < rank; ++k) out(basis[static_cast<std::size_t>(k)]) += coeff(k) * beta(j);
    }
    return out;
}

}  // namespace eivreg
