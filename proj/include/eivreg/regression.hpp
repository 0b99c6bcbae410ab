#pragma once

#include <optional>

#include "eivreg/estimation.hpp"
#include "eivreg/linalg.hpp"

namespace eivreg {

/// Minimum-norm least-squares solution.
struct LeastSquares {
    Vector beta;
    /// Singular values kept in the solve.
    Eigen::Index rank = 0;
    double residual_norm = 0.0;
};

/// max(rows, cols) * 2^-52, the relative cutoff used when none is given.
double default_rcond(Eigen::Index rows, Eigen::Index cols);

/// Pseudoinverse solve via SVD. Singular values below rcond * s_1 are treated
/// as zero; `max_rank`, when set, additionally caps the number kept.
LeastSquares pinv_solve(const Matrix& m, const Vector& y, double rcond,
                        std::optional<Eigen::Index> max_rank = std::nullopt);

struct Fit {
    Vector beta_hat;
    Estimate estimate;
    Vector y_hat;
    RowIndexSet omega;
    Eigen::Index design_rank = 0;
    double rcond_used = 0.0;
};

/// De-noise the covariates, regress the observed responses on the de-noised
/// rows in `omega`, and predict every row. A negative `rcond` selects
/// default_rcond(|omega|, p).
Fit fit(const MaskedMatrix& z, const Vector& y_omega, const RowIndexSet& omega,
        const ThresholdPolicy& policy, double rcond = -1.0);

/// Vector with at most rank(x) nonzeros and the same image x * beta.
///
/// The support is the first maximal set of linearly independent columns taken
/// left to right; every other column is written in that basis and its
/// coefficient folded onto the basis slots. Throws NumericalError if the
/// greedy selection disagrees with the numerical rank of x.
Vector sparse_equivalent(const Matrix& x, const Vector& beta);

}  // namespace eivreg
