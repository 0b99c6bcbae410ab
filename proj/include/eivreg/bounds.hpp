#pragma once

#include <optional>
#include <utility>

#include "eivreg/linalg.hpp"
#include "eivreg/synth.hpp"

namespace eivreg {

/// Model constants consumed by the bound evaluators. The absolute constants
/// have no known values; `c_alpha`, `c1` and `c2` are knobs.
struct ModelParams {
    double gamma_cap = 0.0;   ///< entry bound on A
    double k_alpha = 0.0;     ///< psi_alpha norm of noise rows
    double alpha = 2.0;       ///< tail exponent, >= 1
    double gamma_var = 0.0;   ///< sqrt of the noise row covariance operator norm
    double sigma_resp = 0.0;  ///< response noise standard deviation
    double rho = 1.0;
    double beta_l1 = 0.0;
    double b_inf = 0.0;
    double c_alpha = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    /// Adds the c2 / (N p^{3/2}) remainder to mcse_bound.
    bool include_remainder = false;
};

void validate(const ModelParams& params);

/// Analytic (alpha, K_alpha, gamma) for a noise model: Gaussian(sd) gives
/// (2, sd*sqrt(8/3), sd), Laplace(b) gives (1, 2b, sqrt(2) b), BoundedUniform(a)
/// gives (2, a/sqrt(ln 2), a/sqrt(3)), None gives (2, 0, 0).
struct NoiseConstants {
    double alpha = 2.0;
    double k_alpha = 0.0;
    double gamma = 0.0;
};
NoiseConstants noise_constants(const NoiseModel& model);

/// Delta = sqrt(N rho) sqrt(rho gamma^2 + (1-rho) Gamma^2)
///       + 2 C(alpha) sqrt(p) (K + Gamma) (1 + 9 log(Np))^{1/alpha} sqrt(log(Np))
double delta_bound(const ModelParams& params, Eigen::Index N, Eigen::Index p);

/// High-probability bound on ||Z - rho A|| for a given delta1 > 0.
double spectral_bound(const ModelParams& params, Eigen::Index N, Eigen::Index p, double delta1);

/// High-probability bound on max_j ||A_hat_j - A_j||^2 with C = c1.
/// Throws ValidationError unless tau_r > tau_r1 >= 0.
double mcse_bound(const ModelParams& params, Eigen::Index N, Eigen::Index p, double tau_r, double tau_r1,
                  Eigen::Index r, double max_col_E_sq);

/// (1/n) (||beta*||_1^2 mcse + 2 sigma^2 rank)
double train_mse_bound(const ModelParams& params, Eigen::Index N, Eigen::Index p, Eigen::Index n, double mcse_val,
                       Eigen::Index rank);

/// (c2 r^2 / rho^2) log^2(r N p) / sqrt(n)
double test_gap_bound(const ModelParams& params, Eigen::Index N, Eigen::Index p, Eigen::Index n, Eigen::Index r);

/// Open interval (rho tau_{r+1} + delta, rho tau_r - delta), or nullopt when empty.
std::optional<std::pair<double, double>> lambda_window(double tau_r, double tau_r1, double rho, double delta);

}  // namespace eivreg
