// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
// usage: eivreg_acceptance <path-to-eivreg-cli> <scratch-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eivreg/errors.hpp"
#include "eivreg/experiment.hpp"
#include "eivreg/regression.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace eivreg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Column-major view of an experiment CSV.
struct Table {
    std::map<std::string, std::vector<double>> num;
    std::size_t rows = 0;

    explicit Table(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        std::vector<std::string> header;
        {
            std::istringstream hs(line);
            std::string cell;
            while (std::getline(hs, cell, ',')) header.push_back(cell);
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string cell;
            for (const auto& col : header) {
                std::getline(ls, cell, ',');
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                num[col].push_back(end != cell.c_str() ? v : NAN);
            }
            ++rows;
        }
    }
    const std::vector<double>& col(const std::string& name) const { return num.at(name); }
};

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args;
    const int status = std::system(cmd.c_str());
    return status;
}

double median_at(const Summary& s, std::size_t point, const std::string& metric) {
    return s.points.at(point).metrics.at(metric).median;
}

// ---------------------------------------------------------------------------

Outcome exact_recovery() {
    const auto start = Clock::now();
    ScenarioConfig c;
    c.N = c.n = c.p = 128;
    c.rho = 1.0;
    c.covariates = LowRankEven{4, 1.0};
    c.covariate_noise = NoNoise{};
    c.response_noise = NoNoise{};
    c.beta_star = SparseBeta{5, 0.5, 1.0};
    c.seed = 1;
    Scenario s = gen_scenario(c);
    Fit f = fit(s.z, s.y_omega, s.omega, FixedRank{4});
    const double train = mse_train(f.y_hat, s.ey, s.omega);
    const double test = mse_test(f.y_hat, s.ey);
    const double scale = s.ey.squaredNorm() / static_cast<double>(c.N);
    const double secs = seconds_since(start);
    const double tol = 1e-16 * scale;
    return {train <= tol && test <= tol && secs < 1.0,
            "mse_train=" + fmt(train) + " mse_test=" + fmt(test) + " limit=" + fmt(tol) + " time=" + fmt(secs) + "s"};
}

Outcome contraction() {
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_real_distribution<double> frac(0.0, 1.1);
    int violations = 0;
    double worst = -INFINITY;
    for (std::uint64_t k = 0; k < 200; ++k) {
        Matrix b = oracle::random_matrix(dim(rng), dim(rng), derive_seed(77, k));
        const double s1 = oracle::jacobi_svd(b).s(0);
        Matrix h = hsvt(b, frac(rng) * s1);
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            const double excess = h.col(j).norm() - b.col(j).norm();
            worst = std::max(worst, excess / s1);
            if (excess > 1e-10 * s1) ++violations;
        }
    }
    return {violations == 0, "pairs=200 violations=" + std::to_string(violations) +
                                 " max (||out_j||-||in_j||)/s1=" + fmt(worst)};
}

struct RankTrials {
    std::vector<TrialRecord> records;
    std::vector<ScenarioConfig> configs;
    double seconds = 0.0;
};

RankTrials rank_trials() {
    RankTrials out;
    const auto start = Clock::now();
    ScenarioConfig c;
    c.N = c.n = c.p = 300;
    c.rho = 0.8;
    c.covariates = LowRankEven{3, 1.0};
    c.covariate_noise = GaussianNoise{0.1};
    c.response_noise = GaussianNoise{0.1};
    c.beta_star = SparseBeta{5, 0.5, 1.0};
    for (std::int64_t t = 0; t < 100; ++t) {
        c.seed = trial_seed(31337, 0, 100, t);
        out.records.push_back(run_trial(c, WindowMidpointPolicy{}));
        out.configs.push_back(c);
    }
    out.seconds = seconds_since(start);
    return out;
}

Outcome rank_check(const RankTrials& rt) {
    int windows = 0, correct = 0;
    for (const auto& r : rt.records) {
        if (!r.window_valid_empirical) continue;
        ++windows;
        if (r.report.rank_used == 3) ++correct;
    }
    const bool pass = windows > 0 && correct == windows && rt.seconds < 30.0;
    return {pass, "trials=100 nonempty windows=" + std::to_string(windows) + " rank==3 in " + std::to_string(correct) +
                      " time=" + fmt(rt.seconds) + "s"};
}

Outcome pythagorean(const RankTrials& rt) {
    double worst = 0.0;
    for (const auto& r : rt.records) worst = std::max(worst, r.pythag_residual);
    return {worst <= 1e-8, "trials=100 max normalized |<u,v>|=" + fmt(worst)};
}

Outcome case1_decay(const Summary& s, double secs) {
    const double first = median_at(s, 0, "mse_train");
    const double last = median_at(s, 3, "mse_train");
    const Trend& t = s.trends.at("mse_train");
    const bool pass = s.points.size() == 4 && t.defined && t.spearman == -1.0 && last < 0.5 * first && secs < 300.0;
    std::string medians;
    for (std::size_t k = 0; k < s.points.size(); ++k) medians += (k ? "," : "") + fmt(median_at(s, k, "mse_train"));
    return {pass, "medians=[" + medians + "] spearman=" + fmt(t.spearman) + " ratio=" + fmt(last / first) +
                      " time=" + fmt(secs) + "s"};
}

Outcome case2_decay(const Summary& s) {
    bool ok = s.points.size() == 3;
    std::string medians;
    for (std::size_t k = 0; k < s.points.size(); ++k) {
        medians += (k ? "," : "") + fmt(median_at(s, k, "mse_train"));
        if (k > 0 && median_at(s, k, "mse_train") > median_at(s, k - 1, "mse_train")) ok = false;
    }
    return {ok, "medians=[" + medians + "] at p=256,512,1024"};
}

Outcome test_gap(const Summary& s) {
    const double first = median_at(s, 0, "test_gap");
    const double last = median_at(s, s.points.size() - 1, "test_gap");
    std::string medians;
    for (std::size_t k = 0; k < s.points.size(); ++k) medians += (k ? "," : "") + fmt(median_at(s, k, "test_gap"));
    return {s.points.size() == 4 && last < first, "median gaps=[" + medians + "] at n=100,200,400,800"};
}

Outcome spectral_check(const Table& t) {
    std::map<double, std::pair<int, int>> by_rho;
    for (std::size_t i = 0; i < t.rows; ++i) {
        auto& [hit, total] = by_rho[t.col("rho")[i]];
        ++total;
        if (t.col("spectral_err")[i] <= t.col("spectral_bound")[i]) ++hit;
    }
    bool pass = by_rho.size() == 2;
    std::string detail;
    for (const auto& [rho, ht] : by_rho) {
        const double frac = static_cast<double>(ht.first) / ht.second;
        if (frac < 0.95 || ht.second != 100) pass = false;
        detail += "rho=" + fmt(rho) + ": " + std::to_string(ht.first) + "/" + std::to_string(ht.second) + " ";
    }
    return {pass, detail + "within spectral_bound(delta1=7, C=1)"};
}

Outcome mcse_relation(const RankTrials& rt, const Table& c1, const Table& c2) {
    int checked = 0, violations = 0;
    for (std::size_t k = 0; k < rt.records.size(); ++k) {
        const auto& r = rt.records[k];
        ++checked;
        if (r.report.mcse < r.frob_sq_err_omega / static_cast<double>(rt.configs[k].p)) ++violations;
    }
    for (const Table* t : {&c1, &c2}) {
        for (std::size_t i = 0; i < t->rows; ++i) {
            ++checked;
            if (t->col("mcse")[i] < t->col("frob_sq_err_omega")[i] / t->col("p")[i]) ++violations;
        }
    }
    return {violations == 0 && checked == 100 + 80 + 60,
            "trials=" + std::to_string(checked) + " violations of mcse >= ||A_hat - A||_F^2 over omega / p: " +
                std::to_string(violations)};
}

Outcome sparse_equivalents() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> rows(6, 32), cols(6, 24), rank(1, 5);
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const int r = rank(rng);
        Matrix x = oracle::random_low_rank(rows(rng), cols(rng), r, derive_seed(5, k));
        Vector beta = oracle::random_vector(x.cols(), derive_seed(6, k));
        Vector out = sparse_equivalent(x, beta);
        const Eigen::Index nnz = (out.array() != 0.0).count();
        const double rel = (x * out - x * beta).norm() / (x * beta).norm();
        worst = std::max(worst, rel);
        if (nnz <= r && rel <= 1e-8) ++ok;
    }
    return {ok == 100, "instances ok=" + std::to_string(ok) + "/100 max relative residual=" + fmt(worst)};
}

Outcome determinism(const std::string& a, const std::string& b, const std::string& c) {
    const bool pass = !a.empty() && a == b && b == c;
    return {pass, "bytes=" + std::to_string(a.size()) + " run1==run2: " + (a == b ? "yes" : "no") +
                      " run1==threads8: " + (a == c ? "yes" : "no")};
}

Outcome oracle_equivalence() {
    int failures = 0;
    double svd_err = 0, norm_err = 0, mcse_err = 0, mse_err = 0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const Eigen::Index rows = 2 + static_cast<Eigen::Index>(k % 7);
        const Eigen::Index cols = 2 + static_cast<Eigen::Index>((k * 3) % 5);
        Matrix m = oracle::random_matrix(rows, cols, derive_seed(1000, k));

        Svd d = svd(m);
        oracle::JacobiSvd ref = oracle::jacobi_svd(m);
        const double e_svd = std::max({(d.singulars - ref.s).cwiseAbs().maxCoeff(),
                                       (d.left - ref.u).cwiseAbs().maxCoeff(), (d.right - ref.v).cwiseAbs().maxCoeff()});
        svd_err = std::max(svd_err, e_svd);
        if (e_svd > 1e-9) ++failures;

        const double pn = oracle::power_norm(m);
        const double e_norm = std::abs(spectral_norm(m) - pn) / pn;
        norm_err = std::max(norm_err, e_norm);
        if (e_norm > 1e-8) ++failures;

        Matrix a_hat = oracle::random_matrix(rows, cols, derive_seed(2000, k));
        auto omega_rows = oracle::random_rows(rows, 1 + static_cast<Eigen::Index>(k % rows), k);
        RowIndexSet omega(omega_rows);
        const double ref_mcse = oracle::mcse(a_hat, m, omega_rows);
        const double e_mcse = std::abs(mcse(a_hat, m, omega) - ref_mcse) / ref_mcse;
        mcse_err = std::max(mcse_err, e_mcse);
        if (e_mcse > 1e-12) ++failures;

        Vector y = oracle::random_vector(rows, derive_seed(3000, k));
        Vector ey = oracle::random_vector(rows, derive_seed(4000, k));
        const double rt = oracle::mse_rows(y, ey, omega_rows);
        const double ra = oracle::mse_all(y, ey);
        const double e_mse = std::max(std::abs(mse_train(y, ey, omega) - rt) / rt, std::abs(mse_test(y, ey) - ra) / ra);
        mse_err = std::max(mse_err, e_mse);
        if (e_mse > 1e-12) ++failures;
    }
    return {failures == 0, "instances=50 failures=" + std::to_string(failures) + " max errors: svd=" + fmt(svd_err) +
                               " spectral_norm(rel)=" + fmt(norm_err) + " mcse(rel)=" + fmt(mcse_err) +
                               " mse(rel)=" + fmt(mse_err)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: " << argv[0] << " <eivreg-cli> <scratch-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path dir = argv[2];
    fs::create_directories(dir);

    std::vector<std::pair<int, Outcome>> results;
    auto report = [&](int id, const std::string& title, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail
                  << std::endl;
        results.emplace_back(id, o);
    };

    report(1, "exact recovery", exact_recovery);
    report(2, "HSVT column contraction", contraction);

    RankTrials rt;
    try {
        rt = rank_trials();
    } catch (const std::exception& e) {
        std::cerr << "rank trials failed: " << e.what() << '\n';
    }
    report(3, "rank after thresholding", [&] { return rank_check(rt); });
    report(4, "Pythagorean orthogonality", [&] { return pythagorean(rt); });

    const fs::path c1a = dir / "case1_run1.csv", c1b = dir / "case1_run2.csv", c1c = dir / "case1_threads8.csv";
    const auto c1_start = Clock::now();
    const int c1_status = run_cli(cli, "experiment --preset case1 --threads 1 --out \"" + c1a.string() + "\"");
    const double c1_secs = seconds_since(c1_start);
    report(5, "case1 decay in p", [&] {
        if (c1_status != 0) return Outcome{false, "cli exit status " + std::to_string(c1_status)};
        return case1_decay(summarize(c1a), c1_secs);
    });

    const fs::path c2 = dir / "case2.csv";
    const int c2_status = run_cli(cli, "experiment --preset case2 --threads 1 --out \"" + c2.string() + "\"");
    report(6, "case2 decay in p", [&] {
        if (c2_status != 0) return Outcome{false, "cli exit status " + std::to_string(c2_status)};
        return case2_decay(summarize(c2));
    });

    report(7, "test-gap shrinkage in n", [&] {
        const fs::path tg = dir / "test_gap.csv";
        const int st = run_cli(cli, "experiment --preset test-gap --threads 1 --out \"" + tg.string() + "\"");
        if (st != 0) return Outcome{false, "cli exit status " + std::to_string(st)};
        return test_gap(summarize(tg));
    });

    report(8, "spectral bound empirical check", [&] {
        const fs::path bc = dir / "bound_check.csv";
        const int st = run_cli(cli, "experiment --preset bound-check --threads 1 --out \"" + bc.string() + "\"");
        if (st != 0) return Outcome{false, "cli exit status " + std::to_string(st)};
        return spectral_check(Table(slurp(bc)));
    });

    report(9, "MCSE dominates normalized Frobenius error",
           [&] { return mcse_relation(rt, Table(slurp(c1a)), Table(slurp(c2))); });
    report(10, "sparse equivalent", sparse_equivalents);

    report(11, "determinism across runs and threads", [&] {
        const int s2 = run_cli(cli, "experiment --preset case1 --threads 1 --out \"" + c1b.string() + "\"");
        const int s3 = run_cli(cli, "experiment --preset case1 --threads 8 --out \"" + c1c.string() + "\"");
        if (c1_status != 0 || s2 != 0 || s3 != 0) return Outcome{false, "cli run failed"};
        return determinism(slurp(c1a), slurp(c1b), slurp(c1c));
    });

    report(12, "oracle equivalence", oracle_equivalence);

    int failed = 0;
    for (const auto& [id, o] : results) failed += o.pass ? 0 : 1;
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " criteria FAILED") << std::endl;
    return failed == 0 ? 0 : 1;
}
