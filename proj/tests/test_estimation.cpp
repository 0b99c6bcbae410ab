#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eivreg/errors.hpp"
#include "eivreg/estimation.hpp"
#include "oracles.hpp"

using namespace eivreg;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST(ObservedFraction, CountsAndFloor) {
    Mask three(2, 2);
    three << true, true, true, false;
    EXPECT_DOUBLE_EQ(observed_fraction(MaskedMatrix(Matrix::Ones(2, 2), three)), 0.75);
    EXPECT_DOUBLE_EQ(observed_fraction(MaskedMatrix(Matrix::Ones(2, 2), Mask::Constant(2, 2, false))), 0.25);
    EXPECT_DOUBLE_EQ(observed_fraction(MaskedMatrix::fully_observed(Matrix::Ones(3, 5))), 1.0);
}

TEST(Hsvt, DiagonalThreshold) {
    Matrix out = hsvt(diag2(5, 2), 3.0);
    EXPECT_LT((out - diag2(5, 0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hsvt, AllOnesKeepsRankOne) {
    Matrix out = hsvt(Matrix::Ones(2, 2), 1.0);
    EXPECT_LT((out - Matrix::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hsvt, TieAtThresholdIsKept) {
    Matrix out = hsvt(diag2(5, 2), 2.0);
    EXPECT_LT((out - diag2(5, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hsvt, ZeroThresholdReturnsInput) {
    Matrix b = oracle::random_matrix(6, 4, 3);
    EXPECT_LT(rel_err(hsvt(b, 0.0), b), 1e-12);
}

TEST(Hsvt, MatchesEckartYoungOracle) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix b = oracle::random_matrix(4, 4, seed + 50);
        oracle::JacobiSvd ref = oracle::jacobi_svd(b);
        const double lambda = ref.s(1) + 1e-6 * ref.s(0);
        EXPECT_LT((hsvt(b, lambda) - oracle::truncate(b, 1)).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Hsvt, Idempotent) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix b = oracle::random_matrix(8, 6, seed);
        const double lambda = oracle::jacobi_svd(b).s(2);
        Matrix once = hsvt(b, lambda);
        EXPECT_LT(rel_err(hsvt(once, lambda), once), 1e-9);
    }
}

TEST(Hsvt, ColumnContraction) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_real_distribution<double> frac(0.0, 1.1);
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Matrix b = oracle::random_matrix(dim(rng), dim(rng), seed + 1000);
        const double s1 = svd(b).singulars(0);
        Matrix out = hsvt(b, frac(rng) * s1);
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            if (out.col(j).norm() > b.col(j).norm() + 1e-10 * s1) ++violations;
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(Hsvt, RejectsNegativeLambda) { EXPECT_THROW(hsvt(Matrix::Ones(2, 2), -1.0), ValidationError); }

TEST(ResolveThreshold, FixedRankMidpoints) {
    Vector s(3);
    s << 6, 4, 1;
    EXPECT_DOUBLE_EQ(resolve_threshold(FixedRank{1}, s), 5.0);
    EXPECT_DOUBLE_EQ(resolve_threshold(FixedRank{2}, s), 2.5);
    EXPECT_DOUBLE_EQ(resolve_threshold(FixedRank{3}, s), 0.5);
    EXPECT_GT(resolve_threshold(FixedRank{0}, s), 6.0);
    EXPECT_THROW(resolve_threshold(FixedRank{4}, s), ValidationError);
    EXPECT_THROW(resolve_threshold(FixedRank{-1}, s), ValidationError);
}

TEST(ResolveThreshold, EnergyFractionUsesSquares) {
    Vector s(3);
    s << 3, 2, 1;  // energies 9, 4, 1 of 14
    EXPECT_DOUBLE_EQ(resolve_threshold(EnergyFraction{0.6}, s), 2.5);
    EXPECT_DOUBLE_EQ(resolve_threshold(EnergyFraction{0.9}, s), 1.5);
    EXPECT_DOUBLE_EQ(resolve_threshold(EnergyFraction{1.0}, s), 0.5);
    EXPECT_THROW(resolve_threshold(EnergyFraction{0.5}, Vector::Zero(3)), ValidationError);
    EXPECT_THROW(resolve_threshold(EnergyFraction{0.0}, s), ValidationError);
    EXPECT_THROW(resolve_threshold(EnergyFraction{1.5}, s), ValidationError);
}

TEST(Denoise, ExactRankOneRecovery) {
    Vector u(4), v(3);
    u << 1, -2, 0.5, 3;
    v << 2, 1, -1;
    Matrix a = u * v.transpose();
    Estimate est = denoise(MaskedMatrix::fully_observed(a), FixedRank{1});
    EXPECT_EQ(est.rank, 1);
    EXPECT_DOUBLE_EQ(est.rho_hat, 1.0);
    EXPECT_LT(rel_err(est.a_hat, a), 1e-10);
}

TEST(Denoise, MissingEntryRescales) {
    Matrix v(2, 2);
    v << 1, 1, 1, 0;
    Mask mask = Mask::Constant(2, 2, true);
    mask(1, 1) = false;
    Estimate est = denoise(MaskedMatrix(v, mask), FixedRank{1});
    EXPECT_DOUBLE_EQ(est.rho_hat, 0.75);
    EXPECT_NEAR(est.retained.singulars(0), (1.0 + std::sqrt(5.0)) / 2.0, 1e-12);
    EXPECT_LT((est.a_hat - oracle::truncate(v, 1) / 0.75).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Denoise, FixedThresholdOnDiagonal) {
    Estimate est = denoise(MaskedMatrix::fully_observed(diag2(4, 0)), FixedThreshold{2.0});
    EXPECT_EQ(est.rank, 1);
    EXPECT_LT((est.a_hat - diag2(4, 0)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Denoise, InvariantsOnRandomInput) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix v = oracle::random_matrix(12, 9, seed);
        Mask mask(12, 9);
        std::mt19937_64 rng(seed);
        std::bernoulli_distribution keep(0.7);
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = keep(rng);
        MaskedMatrix z(v, mask);
        Estimate est = denoise(z, EnergyFraction{0.8});
        const Vector s = svd(z.values()).singulars;
        EXPECT_EQ(est.rank, effective_rank(s, est.lambda_star));
        EXPECT_LT(rel_err(est.a_hat, est.retained.reconstruct() / est.rho_hat), 1e-10);
        EXPECT_LE(effective_rank(est.a_hat, 1e-9 * s(0)), est.rank);
    }
}

TEST(EffectiveRank, Diagonal) {
    EXPECT_EQ(effective_rank(diag2(5, 2), 3.0), 1);
    EXPECT_EQ(effective_rank(diag2(5, 2), 6.0), 0);
    EXPECT_EQ(effective_rank(diag2(5, 2), 1.0), 2);
}

TEST(Partition, Diagonal) {
    auto [head, tail] = partition(diag2(5, 2), 3.0);
    EXPECT_LT((head - diag2(5, 0)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((tail - diag2(0, 2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Partition, ZeroLambdaKeepsEverything) {
    Matrix a = oracle::random_matrix(5, 4, 2);
    auto [head, tail] = partition(a, 0.0);
    EXPECT_LT(rel_err(head, a), 1e-12);
    EXPECT_LT(tail.norm(), 1e-12);
}

TEST(Partition, TailMatchesOracle) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix a = oracle::random_matrix(5, 5, seed + 300);
        oracle::JacobiSvd ref = oracle::jacobi_svd(a);
        auto [head, tail] = partition(a, 0.5 * (ref.s(2) + ref.s(3)));
        EXPECT_LT(rel_err(head + tail, a), 1e-10);
        EXPECT_EQ(effective_rank(head, 1e-9 * ref.s(0)), 3);
        Matrix ref_tail = a - oracle::truncate(a, 3);
        EXPECT_LT((tail.colwise().norm() - ref_tail.colwise().norm()).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((head.transpose() * tail).cwiseAbs().maxCoeff(), 1e-9 * ref.s(0) * ref.s(0));
    }
}

TEST(ProjectPhi, FullAndEmptyProjections) {
    Matrix b = oracle::random_matrix(4, 4, 5);
    Svd basis = svd(b);
    Vector w = oracle::random_vector(4, 6);
    EXPECT_LT((project_phi(basis, 0.0, w) - w).norm(), 1e-12);
    EXPECT_EQ(project_phi(basis, basis.singulars(0) * 1.01, w).norm(), 0.0);
    EXPECT_THROW(project_phi(basis, 0.0, Vector::Ones(3)), ValidationError);
}

TEST(ProjectPhi, EqualsHsvtColumns) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix b = oracle::random_matrix(9, 7, seed + 77);
        Svd basis = svd(b);
        const double lambda = basis.singulars(3);
        Matrix h = hsvt(b, lambda);
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            Vector col = b.col(j);
            Vector phi = project_phi(basis, lambda, col);
            EXPECT_LT((phi - h.col(j)).norm(), 1e-10 * basis.singulars(0));
            EXPECT_LT((project_phi(basis, lambda, phi) - phi).norm(), 1e-10 * basis.singulars(0));
            EXPECT_LE(phi.norm(), col.norm() * (1 + 1e-12));
        }
    }
}
