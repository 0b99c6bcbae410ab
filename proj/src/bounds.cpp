#include "eivreg/bounds.hpp"

#include <cmath>
#include <string>

#include "eivreg/errors.hpp"

namespace eivreg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double log_np(Eigen::Index N, Eigen::Index p) {
    if (N < 1 || p < 1) throw ValidationError("bounds need N >= 1 and p >= 1");
    return std::log(static_cast<double>(N) * static_cast<double>(p));
}

double covariate_term(const ModelParams& m, Eigen::Index N) {
    const double nr = static_cast<double>(N) * m.rho;
    return std::sqrt(nr) * std::sqrt(m.rho * m.gamma_var * m.gamma_var + (1.0 - m.rho) * m.gamma_cap * m.gamma_cap);
}

}  // namespace

void validate(const ModelParams& m) {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and >= 0");
    };
    nonneg(m.gamma_cap, "gamma_cap");
    nonneg(m.k_alpha, "k_alpha");
    nonneg(m.gamma_var, "gamma_var");
    nonneg(m.sigma_resp, "sigma_resp");
    nonneg(m.beta_l1, "beta_l1");
    nonneg(m.b_inf, "b_inf");
    if (!(m.alpha >= 1.0)) throw ValidationError("alpha must be >= 1");
    if (!(m.rho > 0.0 && m.rho <= 1.0)) throw ValidationError("rho must lie in (0, 1]");
    if (!(m.c_alpha > 0.0) || !(m.c1 > 0.0) || !(m.c2 > 0.0)) throw ValidationError("constant knobs must be > 0");
}

NoiseConstants noise_constants(const NoiseModel& model) {
    return std::visit(overloaded{
                          [](const NoNoise&) { return NoiseConstants{2.0, 0.0, 0.0}; },
                          [](const GaussianNoise& g) {
                              return NoiseConstants{2.0, g.sd * std::sqrt(8.0 / 3.0), g.sd};
                          },
                          [](const LaplaceNoise& l) {
                              return NoiseConstants{1.0, 2.0 * l.scale, std::sqrt(2.0) * l.scale};
                          },
                          [](const BoundedUniformNoise& u) {
                              return NoiseConstants{2.0, u.half_width / std::sqrt(std::log(2.0)),
                                                    u.half_width / std::sqrt(3.0)};
                          },
                      },
                      model);
}

double delta_bound(const ModelParams& m, Eigen::Index N, Eigen::Index p) {
    validate(m);
    const double l = log_np(N, p);
    return covariate_term(m, N) + 2.0 * m.c_alpha * std::sqrt(static_cast<double>(p)) * (m.k_alpha + m.gamma_cap) *
                                      std::pow(1.0 + 9.0 * l, 1.0 / m.alpha) * std::sqrt(l);
}

double spectral_bound(const ModelParams& m, Eigen::Index N, Eigen::Index p, double delta1) {
    validate(m);
    if (!(delta1 > 0.0)) throw ValidationError("spectral_bound: delta1 must be > 0");
    const double l = log_np(N, p);
    return covariate_term(m, N) + m.c_alpha * std::sqrt(1.0 + delta1) * std::sqrt(static_cast<double>(p)) *
                                      (m.k_alpha + m.gamma_cap) * std::pow(1.0 + (2.0 + delta1) * l, 1.0 / m.alpha) *
                                      std::sqrt(l);
}

double mcse_bound(const ModelParams& m, Eigen::Index N, Eigen::Index p, double tau_r, double tau_r1, Eigen::Index r,
                  double max_col_E_sq) {
    validate(m);
    if (!(tau_r1 >= 0.0 && tau_r > tau_r1)) {
        throw ValidationError("mcse_bound: needs tau_r > tau_r1 >= 0, got " + std::to_string(tau_r) + " and " +
                              std::to_string(tau_r1));
    }
    if (r < 0) throw ValidationError("mcse_bound: r must be >= 0");
    const double l = log_np(N, p);
    const double delta = delta_bound(m, N, p);
    const double gap = m.rho * (tau_r - tau_r1);
    const double kg = m.k_alpha + m.gamma_cap;
    const double log_factor = std::pow(l, 2.0 / m.alpha);
    double out = m.c1 * kg * kg / (m.rho * m.rho) *
                     (delta * delta * static_cast<double>(N) / (gap * gap) + static_cast<double>(r)) * log_factor +
                 2.0 * max_col_E_sq;
    if (m.include_remainder) {
        out += m.c2 / (static_cast<double>(N) * std::pow(static_cast<double>(p), 1.5)) *
               (m.gamma_cap * m.gamma_cap + m.k_alpha * m.k_alpha * log_factor);
    }
    return out;
}

double train_mse_bound(const ModelParams& m, Eigen::Index N, Eigen::Index p, Eigen::Index n, double mcse_val,
                       Eigen::Index rank) {
    validate(m);
    log_np(N, p);
    if (n < 1) throw ValidationError("train_mse_bound: n must be >= 1");
    return (m.beta_l1 * m.beta_l1 * mcse_val + 2.0 * m.sigma_resp * m.sigma_resp * static_cast<double>(rank)) /
           static_cast<double>(n);
}

double test_gap_bound(const ModelParams& m, Eigen::Index N, Eigen::Index p, Eigen::Index n, Eigen::Index r) {
    validate(m);
    log_np(N, p);
    if (n < 1 || r < 1) throw ValidationError("test_gap_bound: needs n >= 1 and r >= 1");
    const double rd = static_cast<double>(r);
    const double l = std::log(rd * static_cast<double>(N) * static_cast<double>(p));
    return m.c2 * rd * rd / (m.rho * m.rho) * l * l / std::sqrt(static_cast<double>(n));
}

std::optional<std::pair<double, double>> lambda_window(double tau_r, double tau_r1, double rho, double delta) {
    const double lo = rho * tau_r1 + delta;
    const double hi = rho * tau_r - delta;
    if (lo < hi) return std::pair{lo, hi};
    return std::nullopt;
}

}  // namespace eivreg
