#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "eivreg/errors.hpp"
#include "eivreg/metrics.hpp"
#include "oracles.hpp"

using namespace eivreg;

TEST(MseTrain, ZeroAndUnitOffsets) {
    Vector ey = oracle::random_vector(6, 1);
    RowIndexSet omega{0, 2, 5};
    EXPECT_EQ(mse_train(ey, ey, omega), 0.0);
    Vector shifted = ey;
    for (Eigen::Index i : omega.indices()) shifted(i) += 1.0;
    EXPECT_NEAR(mse_train(shifted, ey, omega), 1.0, 1e-15);
}

TEST(MseTrain, MatchesLoopOracle) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Vector y = oracle::random_vector(300, seed);
        Vector e = oracle::random_vector(300, seed + 1000);
        auto rows = oracle::random_rows(300, 120, seed);
        const double ref = oracle::mse_rows(y, e, rows);
        EXPECT_NEAR(mse_train(y, e, RowIndexSet(rows)), ref, 1e-12 * ref);
    }
}

TEST(MseTrain, RejectsMismatch) {
    EXPECT_THROW(mse_train(Vector::Zero(3), Vector::Zero(4), RowIndexSet{0}), ValidationError);
    EXPECT_THROW(mse_train(Vector::Zero(3), Vector::Zero(3), RowIndexSet{3}), ValidationError);
}

TEST(MseTest, OffsetAndOracle) {
    Vector ey = oracle::random_vector(10, 2);
    EXPECT_EQ(mse_test(ey, ey), 0.0);
    EXPECT_NEAR(mse_test((ey.array() + 0.3).matrix(), ey), 0.09, 1e-15);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Vector y = oracle::random_vector(2048, seed);
        Vector e = oracle::random_vector(2048, seed + 7);
        const double ref = oracle::mse_all(y, e);
        EXPECT_NEAR(mse_test(y, e), ref, 1e-12 * ref);
    }
}

TEST(Mcse, SimpleCases) {
    Matrix a = oracle::random_matrix(4, 3, 5);
    RowIndexSet all = RowIndexSet::prefix(4);
    EXPECT_EQ(mcse(a, a, all), 0.0);
    Matrix a_hat = a;
    a_hat(0, 0) += 1.0;
    EXPECT_NEAR(mcse(a_hat, a, all), 1.0, 1e-15);
}

TEST(Mcse, MatchesColumnSumOracleAndDominatesFrobenius) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix a = oracle::random_matrix(6, 4, seed);
        Matrix a_hat = oracle::random_matrix(6, 4, seed + 500);
        auto rows = oracle::random_rows(6, 4, seed);
        RowIndexSet omega(rows);
        const double ref = oracle::mcse(a_hat, a, rows);
        const double got = mcse(a_hat, a, omega);
        EXPECT_NEAR(got, ref, 1e-12 * ref);
        EXPECT_GE(got, frobenius_sq_error(a_hat, a, omega) / 4.0);
        EXPECT_GE(got * static_cast<double>(omega.size()), frobenius_sq_error(a_hat, a, omega) / 4.0);
    }
}

TEST(Metrics, OmegaOrderDoesNotMatter) {
    Matrix a = oracle::random_matrix(10, 3, 1);
    Matrix a_hat = oracle::random_matrix(10, 3, 2);
    Vector y = oracle::random_vector(10, 3), e = oracle::random_vector(10, 4);
    std::vector<Eigen::Index> rows = {7, 1, 4, 9};
    std::vector<Eigen::Index> shuffled = {9, 4, 7, 1};
    EXPECT_EQ(mcse(a_hat, a, RowIndexSet(rows)), mcse(a_hat, a, RowIndexSet(shuffled)));
    EXPECT_EQ(mse_train(y, e, RowIndexSet(rows)), mse_train(y, e, RowIndexSet(shuffled)));
}

TEST(Metrics, RowPermutationInvariance) {
    Matrix a = oracle::random_matrix(8, 3, 11);
    Matrix a_hat = oracle::random_matrix(8, 3, 12);
    std::vector<Eigen::Index> rows = {0, 3, 5};
    std::vector<Eigen::Index> perm = {4, 7, 1, 0, 6, 2, 5, 3};  // new row k holds old row perm[k]
    Matrix pa(8, 3), pa_hat(8, 3);
    std::vector<Eigen::Index> inv(8);
    for (Eigen::Index k = 0; k < 8; ++k) {
        pa.row(k) = a.row(perm[k]);
        pa_hat.row(k) = a_hat.row(perm[k]);
        inv[perm[k]] = k;
    }
    std::vector<Eigen::Index> relabeled;
    for (auto i : rows) relabeled.push_back(inv[i]);
    EXPECT_NEAR(mcse(a_hat, a, RowIndexSet(rows)), mcse(pa_hat, pa, RowIndexSet(relabeled)), 1e-14);
}

TEST(SpectralError, SimpleCasesAndOracle) {
    Matrix a = oracle::random_matrix(3, 3, 6);
    EXPECT_EQ(spectral_error(MaskedMatrix::fully_observed(a), a, 1.0), 0.0);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    EXPECT_NEAR(spectral_error(MaskedMatrix::fully_observed(d + 0.5 * Matrix::Identity(2, 2)),
                               Matrix::Identity(2, 2), 0.5),
                3.0, 1e-14);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix z = oracle::random_matrix(7, 5, seed + 40);
        Matrix x = oracle::random_matrix(7, 5, seed + 80);
        const double ref = oracle::power_norm(z - 0.6 * x);
        EXPECT_NEAR(spectral_error(MaskedMatrix::fully_observed(z), x, 0.6), ref, 1e-8 * ref);
    }
}

TEST(MaxColL2Sq, Oracle) {
    Matrix m = oracle::random_matrix(9, 5, 3);
    double best = 0.0;
    for (Eigen::Index j = 0; j < 5; ++j) best = std::max(best, m.col(j).squaredNorm());
    EXPECT_NEAR(max_col_l2_sq(m), best, 1e-13 * best);
}
