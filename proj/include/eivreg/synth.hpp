#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "eivreg/linalg.hpp"

namespace eivreg {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Noise models. All are mean zero.

struct NoNoise {};
struct GaussianNoise {
    double sd = 1.0;
};
struct LaplaceNoise {
    double scale = 1.0;
};
struct BoundedUniformNoise {
    double half_width = 1.0;
};

using NoiseModel = std::variant<NoNoise, GaussianNoise, LaplaceNoise, BoundedUniformNoise>;

// ---------------------------------------------------------------------------
// Covariate models.

/// Exact rank r, all nonzero singular values equal, ||A||_F = frob_const * sqrt(N p).
struct LowRankEven {
    Eigen::Index r = 1;
    double frob_const = 1.0;
};

/// tau_k = tau1_const * sqrt(N p) * theta^(k-1) for every k <= min(N, p).
/// `r_keep` is the number of components a rank policy should retain.
struct GeometricDecay {
    double theta = 0.5;
    double tau1_const = 1.0;
    Eigen::Index r_keep = 1;
};

struct ExplicitCovariates {
    Matrix a;
};

using CovariateModel = std::variant<LowRankEven, GeometricDecay, ExplicitCovariates>;

/// s nonzero coefficients at uniform positions, magnitudes uniform in
/// [magnitude_min, magnitude_max], random signs.
struct SparseBeta {
    Eigen::Index sparsity = 1;
    double magnitude_min = 1.0;
    double magnitude_max = 1.0;
};

using BetaSpec = std::variant<Vector, SparseBeta>;

struct ScenarioConfig {
    Eigen::Index N = 1;
    Eigen::Index p = 1;
    Eigen::Index n = 1;
    double rho = 1.0;
    CovariateModel covariates = LowRankEven{};
    NoiseModel covariate_noise = NoNoise{};
    NoiseModel response_noise = NoNoise{};
    BetaSpec beta_star = SparseBeta{};
    std::uint64_t seed = 0;
};

/// Throws ValidationError when a field is outside its documented range.
void validate(const ScenarioConfig& config);
void validate(const NoiseModel& model);
void validate(const CovariateModel& model, Eigen::Index N, Eigen::Index p);

/// A complete synthetic instance of the error-in-variables model.
struct Scenario {
    Matrix a;
    Matrix h;
    MaskedMatrix z;
    Vector beta_star;
    RowIndexSet omega;
    Vector y_omega;
    /// Noise-free responses A * beta_star.
    Vector ey;
    /// max |A_ij|
    double gamma_measured = 0.0;
    /// Singular values of A, nonincreasing.
    Vector tau;
    /// SVD of A as constructed (exact factors for generated models).
    Svd a_factors;
};

/// splitmix64 finalizer applied to base + (index + 1) * 0x9E3779B97F4A7C15.
/// Fixed; changing it changes every derived seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Haar-distributed rows x cols matrix with orthonormal columns (cols <= rows).
Matrix haar_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

Matrix sample_noise(const NoiseModel& model, Eigen::Index rows, Eigen::Index cols, Rng& rng);

Matrix gen_covariates(const CovariateModel& model, Eigen::Index N, Eigen::Index p, Rng& rng);

/// Covariates plus their SVD. Generated models return the construction factors.
std::pair<Matrix, Svd> gen_covariates_with_factors(const CovariateModel& model, Eigen::Index N,
                                                   Eigen::Index p, Rng& rng);

Scenario gen_scenario(const ScenarioConfig& config);

/// Number of components the covariate model asks a rank policy to keep.
Eigen::Index model_rank(const CovariateModel& model);

using Series = std::vector<std::optional<double>>;

/// Overlapping N x p page matrix: Z(i, j) = series[i + j], masked where missing.
MaskedMatrix page_matrix(std::span<const std::optional<double>> series, Eigen::Index N, Eigen::Index p);

/// a + i.i.d. Laplace(b) noise.
Matrix laplace_privatize(const Matrix& a, double b, Rng& rng);

}  // namespace eivreg
