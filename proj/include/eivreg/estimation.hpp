#pragma once

#include <utility>
#include <variant>

#include "eivreg/linalg.hpp"

namespace eivreg {

/// Keep every singular value >= lambda.
struct FixedThreshold {
    double lambda = 0.0;
};
/// Keep the leading k components; lambda* sits in the middle of the gap after s_k.
struct FixedRank {
    Eigen::Index k = 0;
};
/// Keep the fewest leading components holding fraction t of sum(s_i^2).
struct EnergyFraction {
    double t = 1.0;
};

using ThresholdPolicy = std::variant<FixedThreshold, FixedRank, EnergyFraction>;

void validate(const ThresholdPolicy& policy);

/// De-noised, rescaled covariate estimate.
struct Estimate {
    Matrix a_hat;
    double rho_hat = 1.0;
    double lambda_star = 0.0;
    Eigen::Index rank = 0;
    /// Components of the observed matrix that survived thresholding (not rescaled).
    Svd retained;
};

/// Fraction of observed entries, floored at 1/(N p).
double observed_fraction(const MaskedMatrix& z);

/// Sum of the singular components of `b` whose singular value is >= lambda.
Matrix hsvt(const Matrix& b, double lambda);

/// Threshold chosen by `policy` for the nonincreasing spectrum `s`.
double resolve_threshold(const ThresholdPolicy& policy, const Vector& s);

/// Hard singular value thresholding of the observed matrix rescaled by 1/rho_hat.
Estimate denoise(const MaskedMatrix& z, const ThresholdPolicy& policy);

/// Number of singular values of `a` that are >= lambda.
Eigen::Index effective_rank(const Matrix& a, double lambda);
Eigen::Index effective_rank(const Vector& singulars, double lambda);

/// (head, tail) split of `a` at lambda: head keeps components >= lambda.
std::pair<Matrix, Matrix> partition(const Matrix& a, double lambda);
std::pair<Matrix, Matrix> partition(const Svd& a, double lambda);

/// Orthogonal projection of `w` onto the left singular vectors of `basis`
/// whose singular value is >= lambda.
Vector project_phi(const Svd& basis, double lambda, const Vector& w);

}  // namespace eivreg
