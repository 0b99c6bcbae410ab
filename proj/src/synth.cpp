#include "eivreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Independent sub-streams of a scenario seed.
enum Stream : std::uint64_t {
    kCovariates = 0,
    kBeta = 1,
    kCovariateNoise = 2,
    kMask = 3,
    kOmega = 4,
    kResponseNoise = 5,
};

Vector sample_beta(const BetaSpec& spec, Eigen::Index p, Rng& rng) {
    return std::visit(overloaded{
                          [&](const Vector& v) { return v; },
                          [&](const SparseBeta& s) {
                              std::vector<Eigen::Index> pos(static_cast<std::size_t>(p));
                              std::iota(pos.begin(), pos.end(), Eigen::Index{0});
                              std::shuffle(pos.begin(), pos.end(), rng);
                              std::uniform_real_distribution<double> mag(s.magnitude_min, s.magnitude_max);
                              std::bernoulli_distribution sign(0.5);
                              Vector beta = Vector::Zero(p);
                              for (Eigen::Index k = 0; k < s.sparsity; ++k) {
                                  double m = s.magnitude_min == s.magnitude_max ? s.magnitude_min : mag(rng);
                                  beta(pos[static_cast<std::size_t>(k)]) = sign(rng) ? m : -m;
                              }
                              return beta;
                          },
                      },
                      spec);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void validate(const NoiseModel& model) {
    std::visit(overloaded{
                   [](const NoNoise&) {},
                   [](const GaussianNoise& g) {
                       if (!(g.sd >= 0.0) || !std::isfinite(g.sd)) throw ValidationError("Gaussian sd must be >= 0");
                   },
                   [](const LaplaceNoise& l) {
                       if (!(l.scale > 0.0) || !std::isfinite(l.scale)) throw ValidationError("Laplace scale must be > 0");
                   },
                   [](const BoundedUniformNoise& u) {
                       if (!(u.half_width >= 0.0) || !std::isfinite(u.half_width)) {
                           throw ValidationError("BoundedUniform half_width must be >= 0");
                       }
                   },
               },
               model);
}

void validate(const CovariateModel& model, Eigen::Index N, Eigen::Index p) {
    const Eigen::Index m = std::min(N, p);
    std::visit(overloaded{
                   [&](const LowRankEven& c) {
                       if (c.r < 1 || c.r > m) {
                           throw ValidationError("LowRankEven r = " + std::to_string(c.r) +
                                                 " must lie in [1, min(N, p) = " + std::to_string(m) + "]");
                       }
                       if (!(c.frob_const > 0.0)) throw ValidationError("LowRankEven frob_const must be > 0");
                   },
                   [&](const GeometricDecay& c) {
                       if (!(c.theta > 0.0 && c.theta < 1.0)) throw ValidationError("GeometricDecay theta must lie in (0, 1)");
                       if (!(c.tau1_const > 0.0)) throw ValidationError("GeometricDecay tau1_const must be > 0");
                       if (c.r_keep < 1 || c.r_keep > m) {
                           throw ValidationError("GeometricDecay r_keep = " + std::to_string(c.r_keep) +
                                                 " must lie in [1, min(N, p) = " + std::to_string(m) + "]");
                       }
                   },
                   [&](const ExplicitCovariates& c) {
                       if (c.a.rows() != N || c.a.cols() != p) {
                           throw ValidationError("explicit covariates are " + std::to_string(c.a.rows()) + "x" +
                                                 std::to_string(c.a.cols()) + ", expected " + std::to_string(N) +
                                                 "x" + std::to_string(p));
                       }
                       require_finite(c.a, "explicit covariates");
                   },
               },
               model);
}

void validate(const ScenarioConfig& c) {
    if (c.N < 1 || c.p < 1 || c.n < 1) throw ValidationError("N, p and n must be positive");
    if (c.n > c.N) throw ValidationError("n = " + std::to_string(c.n) + " exceeds N = " + std::to_string(c.N));
    if (!(c.rho > 0.0 && c.rho <= 1.0)) throw ValidationError("rho must lie in (0, 1]");
    validate(c.covariates, c.N, c.p);
    validate(c.covariate_noise);
    validate(c.response_noise);
    std::visit(overloaded{
                   [&](const Vector& v) {
                       if (v.size() != c.p) throw ValidationError("beta_star length must equal p");
                       require_finite(v, "beta_star");
                   },
                   [&](const SparseBeta& s) {
                       if (s.sparsity < 0 || s.sparsity > c.p) throw ValidationError("beta sparsity must lie in [0, p]");
                       if (!(s.magnitude_min >= 0.0 && s.magnitude_min <= s.magnitude_max) ||
                           !std::isfinite(s.magnitude_max)) {
                           throw ValidationError("beta magnitude range must satisfy 0 <= min <= max");
                       }
                   },
               },
               c.beta_star);
}

Matrix haar_orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    if (cols > rows) throw ValidationError("haar_orthonormal needs cols <= rows");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < cols; ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

Matrix sample_noise(const NoiseModel& model, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    validate(model);
    Matrix out = Matrix::Zero(rows, cols);
    auto fill = [&](auto&& draw) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = draw();
        }
    };
    std::visit(overloaded{
                   [](const NoNoise&) {},
                   [&](const GaussianNoise& g) {
                       if (g.sd == 0.0) return;
                       std::normal_distribution<double> d(0.0, g.sd);
                       fill([&] { return d(rng); });
                   },
                   [&](const LaplaceNoise& l) {
                       // Difference of two Exp(1/b) variables is Laplace(b).
                       std::exponential_distribution<double> e(1.0 / l.scale);
                       fill([&] {
                           double x = e(rng);
                           return x - e(rng);
                       });
                   },
                   [&](const BoundedUniformNoise& u) {
                       if (u.half_width == 0.0) return;
                       std::uniform_real_distribution<double> d(-u.half_width, u.half_width);
                       fill([&] { return d(rng); });
                   },
               },
               model);
    return out;
}

std::pair<Matrix, Svd> gen_covariates_with_factors(const CovariateModel& model, Eigen::Index N,
                                                   Eigen::Index p, Rng& rng) {
    validate(model, N, p);
    const double scale = std::sqrt(static_cast<double>(N) * static_cast<double>(p));
    return std::visit(
        overloaded{
            [&](const LowRankEven& c) {
                Svd f;
                f.left = haar_orthonormal(N, c.r, rng);
                f.right = haar_orthonormal(p, c.r, rng);
                f.singulars = Vector::Constant(c.r, c.frob_const * scale / std::sqrt(static_cast<double>(c.r)));
                Matrix a = f.reconstruct();
                // Report the full min(N, p) spectrum; the zero tail has no factors.
                return std::pair{std::move(a), std::move(f)};
            },
            [&](const GeometricDecay& c) {
                const Eigen::Index m = std::min(N, p);
                Svd f;
                f.left = haar_orthonormal(N, m, rng);
                f.right = haar_orthonormal(p, m, rng);
                f.singulars.resize(m);
                double tau = c.tau1_const * scale;
                for (Eigen::Index k = 0; k < m; ++k, tau *= c.theta) f.singulars(k) = tau;
                Matrix a = f.reconstruct();
                return std::pair{std::move(a), std::move(f)};
            },
            [&](const ExplicitCovariates& c) { return std::pair{c.a, svd(c.a)}; },
        },
        model);
}

Matrix gen_covariates(const CovariateModel& model, Eigen::Index N, Eigen::Index p, Rng& rng) {
    return gen_covariates_with_factors(model, N, p, rng).first;
}

Eigen::Index model_rank(const CovariateModel& model) {
    return std::visit(overloaded{
                          [](const LowRankEven& c) { return c.r; },
                          [](const GeometricDecay& c) { return c.r_keep; },
                          [](const ExplicitCovariates& c) {
                              Vector s = singular_values(c.a);
                              if (s.size() == 0 || s(0) == 0.0) return Eigen::Index{0};
                              const double tol = s(0) * 1e-10 * static_cast<double>(std::max(c.a.rows(), c.a.cols()));
                              Eigen::Index k = 0;
                              while (k < s.size() && s(k) > tol) ++k;
                              return k;
                          },
                      },
                      model);
}

Scenario gen_scenario(const ScenarioConfig& config) {
    validate(config);
    const Eigen::Index N = config.N;
    const Eigen::Index p = config.p;

    Rng cov_rng(derive_seed(config.seed, kCovariates));
    auto [a, factors] = gen_covariates_with_factors(config.covariates, N, p, cov_rng);

    Rng beta_rng(derive_seed(config.seed, kBeta));
    Vector beta = sample_beta(config.beta_star, p, beta_rng);

    Rng h_rng(derive_seed(config.seed, kCovariateNoise));
    Matrix h = sample_noise(config.covariate_noise, N, p, h_rng);

    Rng mask_rng(derive_seed(config.seed, kMask));
    Mask mask(N, p);
    if (config.rho >= 1.0) {
        mask.setConstant(true);
    } else {
        std::bernoulli_distribution observe(config.rho);
        for (Eigen::Index i = 0; i < N; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) mask(i, j) = observe(mask_rng);
        }
    }

    Rng omega_rng(derive_seed(config.seed, kOmega));
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(N));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::shuffle(rows.begin(), rows.end(), omega_rng);
    rows.resize(static_cast<std::size_t>(config.n));
    RowIndexSet omega(std::move(rows));

    Rng eps_rng(derive_seed(config.seed, kResponseNoise));
    Vector eps = sample_noise(config.response_noise, N, 1, eps_rng).col(0);

    Vector ey = a * beta;
    Vector y_omega = restrict_rows(Vector(ey + eps), omega);

    Vector tau = Vector::Zero(std::min(N, p));
    tau.head(factors.size()) = factors.singulars;

    MaskedMatrix z(a + h, mask);
    const double gamma = a.cwiseAbs().maxCoeff();
    return Scenario{std::move(a), std::move(h), std::move(z), std::move(beta), std::move(omega),
                    std::move(y_omega), std::move(ey), gamma, std::move(tau), std::move(factors)};
}

MaskedMatrix page_matrix(std::span<const std::optional<double>> series, Eigen::Index N, Eigen::Index p) {
    if (N < 1 || p < 1) throw ValidationError("page matrix needs N >= 1 and p >= 1");
    const auto T = static_cast<Eigen::Index>(series.size());
    if (N + p - 1 > T) {
        throw ValidationError("page matrix " + std::to_string(N) + "x" + std::to_string(p) + " needs " +
                              std::to_string(N + p - 1) + " points, series has " + std::to_string(T));
    }
    Matrix values = Matrix::Zero(N, p);
    Mask mask = Mask::Constant(N, p, false);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto& x = series[static_cast<std::size_t>(i + j)];
            if (x) {
                values(i, j) = *x;
                mask(i, j) = true;
            }
        }
    }
    return MaskedMatrix(std::move(values), std::move(mask));
}

Matrix laplace_privatize(const Matrix& a, double b, Rng& rng) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("Laplace scale must be > 0");
    return a + sample_noise(LaplaceNoise{b}, a.rows(), a.cols(), rng);
}

}  // namespace eivreg
