#include "eivreg/estimation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Count of the leading entries of a nonincreasing sequence that are >= lambda.
Eigen::Index count_at_least(const Vector& s, double lambda) {
    Eigen::Index k = 0;
    while (k < s.size() && s(k) >= lambda) ++k;
    return k;
}

double rank_threshold(Eigen::Index k, const Vector& s) {
    const Eigen::Index m = s.size();
    if (k < 0 || k > m) {
        throw ValidationError("FixedRank(" + std::to_string(k) + ") exceeds min(N, p) = " +
                              std::to_string(m));
    }
    if (k == 0) {
        // Strictly above the top singular value so nothing is kept.
        const double top = m > 0 ? s(0) : 0.0;
        return std::nextafter(top, std::numeric_limits<double>::infinity());
    }
    if (k == m) return s(k - 1) / 2.0;
    return (s(k - 1) + s(k)) / 2.0;
}

}  // namespace

void validate(const ThresholdPolicy& policy) {
    std::visit(overloaded{
                   [](const FixedThreshold& p) {
                       if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) {
                           throw ValidationError("FixedThreshold lambda must be finite and >= 0");
                       }
                   },
                   [](const FixedRank& p) {
                       if (p.k < 0) throw ValidationError("FixedRank k must be >= 0");
                   },
                   [](const EnergyFraction& p) {
                       if (!(p.t > 0.0 && p.t <= 1.0)) {
                           throw ValidationError("EnergyFraction t must lie in (0, 1]");
                       }
                   },
               },
               policy);
}

double observed_fraction(const MaskedMatrix& z) {
    const double cells = static_cast<double>(z.rows()) * static_cast<double>(z.cols());
    const double frac = static_cast<double>(z.observed_count()) / cells;
    return std::max(frac, 1.0 / cells);
}

Matrix hsvt(const Matrix& b, double lambda) {
    if (!(lambda >= 0.0)) throw ValidationError("hsvt: lambda must be >= 0");
    Svd dec = svd(b);
    return dec.reconstruct(count_at_least(dec.singulars, lambda));
}

double resolve_threshold(const ThresholdPolicy& policy, const Vector& s) {
    validate(policy);
    return std::visit(overloaded{
                          [](const FixedThreshold& p) { return p.lambda; },
                          [&](const FixedRank& p) { return rank_threshold(p.k, s); },
                          [&](const EnergyFraction& p) {
                              double total = 0.0;
                              for (Eigen::Index i = 0; i < s.size(); ++i) total += s(i) * s(i);
                              if (total == 0.0) {
                                  throw ValidationError("EnergyFraction is undefined for a zero matrix");
                              }
                              double acc = 0.0;
                              Eigen::Index k = 0;
                              while (k < s.size()) {
                                  acc += s(k) * s(k);
                                  ++k;
                                  if (acc >= p.t * total) break;
                              }
                              return rank_threshold(k, s);
                          },
                      },
                      policy);
}

Estimate denoise(const MaskedMatrix& z, const ThresholdPolicy& policy) {
    Svd dec = svd(z.values());
    Estimate est;
    est.lambda_star = resolve_threshold(policy, dec.singulars);
    est.rho_hat = observed_fraction(z);
    est.rank = count_at_least(dec.singulars, est.lambda_star);
    est.retained = dec.truncated(est.rank);
    est.a_hat = est.retained.reconstruct() / est.rho_hat;
    return est;
}

Eigen::Index effective_rank(const Vector& singulars, double lambda) {
    if (!(lambda >= 0.0)) throw ValidationError("effective_rank: lambda must be >= 0");
    return count_at_least(singulars, lambda);
}

Eigen::Index effective_rank(const Matrix& a, double lambda) {
    return effective_rank(singular_values(a), lambda);
}

std::pair<Matrix, Matrix> partition(const Svd& a, double lambda) {
    if (!(lambda >= 0.0)) throw ValidationError("partition: lambda must be >= 0");
    const Eigen::Index k = count_at_least(a.singulars, lambda);
    const Eigen::Index tail = a.size() - k;
    Matrix head = a.reconstruct(k);
    Matrix rest = a.left.rightCols(tail) * a.singulars.tail(tail).asDiagonal() *
                  a.right.rightCols(tail).transpose();
    return {std::move(head), std::move(rest)};
}

std::pair<Matrix, Matrix> partition(const Matrix& a, double lambda) { return partition(svd(a), lambda); }

Vector project_phi(const Svd& basis, double lambda, const Vector& w) {
    if (w.size() != basis.left.rows()) {
        throw ValidationError("project_phi: vector has length " + std::to_string(w.size()) +
                              " but basis has " + std::to_string(basis.left.rows()) + " rows");
    }
    const Eigen::Index k = count_at_least(basis.singulars, lambda);
    const auto u = basis.left.leftCols(k);
    return u * (u.transpose() * w);
}

}  // namespace eivreg
