// End-to-end acceptance gate. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. Tolerances are fixed here.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lmsvar/bounds.hpp"
#include "lmsvar/cli.hpp"
#include "lmsvar/config.hpp"
#include "lmsvar/ensemble.hpp"
#include "lmsvar/model.hpp"
#include "lmsvar/signals.hpp"
#include "lmsvar/summation.hpp"

using namespace lmsvar;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

double rel(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ExperimentSpec experiment(double a, std::size_t n, Algorithm algorithm, NoiseKind noise, std::size_t trials,
                          std::size_t iterations, std::uint64_t seed) {
    ExperimentSpec s;
    s.signal = {a, 1.0};
    s.plant = {synthetic_echo_path(n, 8.0), {noise, 1e-6}};
    s.filter = {n, algorithm, {}};
    s.iterations = iterations;
    s.burn_in_fraction = 0.5;
    s.trials = trials;
    s.master_seed = seed;
    return s;
}

Algorithm nlms(std::size_t n, double beta) { return Nlms{beta, default_nlms_regularizer(n, 1.0)}; }

Prediction predict_for(const ExperimentSpec& s, std::optional<double> confidence = std::nullopt) {
    return predict(s.filter, s.plant, s.signal, confidence);
}

// -----------------------------------------------------------------------------

Outcome table_quantiles() {
    const std::array<std::pair<const char*, double>, 4> table{{
        {"0.025", 0.0009820691171752583},
        {"0.975", 5.023886187314888},
        {"0.0015", 3.5342958990342576e-06},
        {"0.9985", 10.078615499494532},
    }};
    double worst = 0.0;
    for (const auto& [p, expected] : table) {
        std::ostringstream out;
        std::ostringstream err;
        if (run_command({"quantile", "--p", p}, out, err) != kExitOk) {
            return {false, std::string("quantile --p ") + p + " failed: " + err.str()};
        }
        worst = std::max(worst, rel(std::stod(out.str()), expected));
    }
    return {worst <= 1e-9, fmt("max rel err %.2e (tol 1e-9)", worst)};
}

Outcome white_gaussian_mse() {
    const std::size_t n = 16;
    const auto s = experiment(0.0, n, Lms{paper_step_size(n, 1.0)}, NoiseKind::Gaussian, 100, 40000, 101);
    const auto stats = run_trials(s);
    const double target = 1e-6 * 31.0 / 30.0;
    const double err = rel(stats.mean_e2, target);
    return {err <= 0.05, fmt("mean_e2 %.6g vs %.6g, rel err %.4f (tol 0.05)", stats.mean_e2, target, err)};
}

Outcome white_variance() {
    const std::size_t n = 16;
    const double mu = paper_step_size(n, 1.0);
    const auto r = ar1_autocorrelation_matrix(0.0, 1.0, n);
    const std::array<std::pair<NoiseKind, double>, 3> cases{{
        {NoiseKind::Gaussian, 0.15},
        {NoiseKind::Uniform, 0.15},
        {NoiseKind::Laplacian, 0.20},
    }};
    bool ok = true;
    std::string detail;
    std::uint64_t seed = 201;
    for (const auto& [kind, tol] : cases) {
        const auto stats = run_trials(experiment(0.0, n, Lms{mu}, kind, 100, 40000, seed++));
        const double predicted = var_e2_lms(theoretical_kurtosis(kind), 1e-6, mu, r);
        const double err = rel(stats.var_e2, predicted);
        ok = ok && err <= tol;
        detail += fmt("%s %.4f/%.2f ", std::string(to_string(kind)).c_str(), err, tol);
    }
    return {ok, "var_e2 rel err " + detail};
}

Outcome gaussian_coverage() {
    const std::size_t n = 64;
    bool ok = true;
    std::string detail;
    const std::array<std::pair<const char*, Algorithm>, 2> filters{{
        {"nlms", nlms(n, 0.1)},
        {"lms", Lms{paper_step_size(n, 1.0)}},
    }};
    std::uint64_t seed = 301;
    for (const auto& [name, algorithm] : filters) {
        const auto s = experiment(0.5, n, algorithm, NoiseKind::Gaussian, 25, 100000, seed++);
        const double j_inf = predict_for(s).j_inf;
        const std::array<ConfidenceInterval, 2> intervals{gaussian_se_bounds(j_inf, 0.997),
                                                          gaussian_se_bounds(j_inf, 0.95)};
        const auto stats = run_trials(s, intervals);
        const bool pass = stats.sample_count >= 1000000 && std::abs(stats.coverage[0] - 0.997) <= 0.002 &&
                          std::abs(stats.coverage[1] - 0.95) <= 0.01;
        ok = ok && pass;
        detail += fmt("%s: 99.7%%->%.5f 95%%->%.5f (%zu samples) ", name, stats.coverage[0], stats.coverage[1],
                      stats.sample_count);
    }
    return {ok, detail};
}

Outcome non_gaussian_bound() {
    const std::size_t n = 64;
    bool ok = true;
    std::string detail;
    std::uint64_t seed = 401;
    for (auto kind : {NoiseKind::Uniform, NoiseKind::Laplacian, NoiseKind::GaussianPower}) {
        for (const bool use_nlms : {false, true}) {
            const Algorithm algorithm = use_nlms ? nlms(n, 0.1) : Algorithm{Lms{paper_step_size(n, 1.0)}};
            const auto s = experiment(0.5, n, algorithm, kind, 160, 100000, seed++);
            const auto p = predict_for(s);
            const std::array<ConfidenceInterval, 1> below{{{0.0, 0.0, p.three_sigma_upper}}};
            const double fraction = run_trials(s, below).coverage[0];
            ok = ok && fraction >= 0.98;
            detail += fmt("%s/%s %.5f ", std::string(to_string(kind)).c_str(), use_nlms ? "nlms" : "lms", fraction);
        }
    }
    return {ok, "fraction below J+3sigma (min 0.98): " + detail};
}

CovMatrix random_psd(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    Eigen::MatrixXd k = 1e-3 * a * a.transpose();
    return CovMatrix(0.5 * (k + k.transpose()));
}

Outcome algebraic_identities() {
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_lms = 0.0;
    double worst_gauss = 0.0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        const std::size_t n = 1 + rng() % 32;
        const auto r = ar1_autocorrelation_matrix(1.9 * u(rng) - 0.95, 0.1 + 4.0 * u(rng), n);
        const double psi = 1.0 + 50.0 * u(rng);
        const double j_min = std::pow(10.0, -8.0 + 8.0 * u(rng));
        const double mu = u(rng) * 2.0 / r.trace();
        if (mu == 0.0) continue;

        const double closed = var_e2_lms(psi, j_min, mu, r);
        const double general = var_e2_general(psi, j_min, weight_error_cov_lms(mu, j_min, n), r);
        worst_lms = std::max(worst_lms, rel(closed, general));

        const auto k = random_psd(rng, n);
        const double j_inf = j_min + trace_kr(k, r);
        worst_gauss = std::max(worst_gauss, rel(var_e2_gaussian(j_inf, k, r), var_e2_general(3.0, j_min, k, r)));
    }
    return {worst_lms <= 1e-12 && worst_gauss <= 1e-12,
            fmt("%d draws, max rel err lms %.2e, gaussian %.2e (tol 1e-12)", draws, worst_lms, worst_gauss)};
}

Outcome monotone_in_step() {
    std::mt19937_64 rng(701);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int draw = 0; draw < 20; ++draw) {
        const std::size_t n = 1 + rng() % 64;
        const auto r = ar1_autocorrelation_matrix(1.9 * u(rng) - 0.95, 0.1 + 4.0 * u(rng), n);
        const double psi = 1.0 + 800.0 * u(rng);
        const double j_min = std::pow(10.0, -8.0 + 8.0 * u(rng));
        const double mu_max = 2.0 / r.trace();
        double previous = -1.0;
        for (int k = 1; k <= 50; ++k) {
            const double v = var_e2_lms(psi, j_min, mu_max * k / 50.0, r);
            if (!(v > previous)) ++violations;
            previous = v;
        }
    }
    return {violations == 0, fmt("20 draws x 50 steps, %d non-increasing steps", violations)};
}

struct Moments {
    double variance;
    double kurtosis;
};

// Zero-mean moments pooled over `chunks` independent streams of `length`.
Moments raw_moments(const NoiseSpec& spec, std::size_t chunks, std::size_t length, std::uint64_t seed) {
    CompensatedSum m2;
    CompensatedSum m4;
    for (std::size_t c = 0; c < chunks; ++c) {
        for (double v : gen_noise(spec, length, {seed, c})) {
            const double s = v * v;
            m2 += s;
            m4 += s * s;
        }
    }
    const double count = static_cast<double>(chunks * length);
    const double var = m2.value() / count;
    return {var, m4.value() / count / (var * var)};
}

Outcome generator_statistics() {
    const double variance = 1e-6;
    const std::size_t length = 10000000;
    bool ok = true;
    std::string detail;
    const std::array<std::pair<NoiseKind, double>, 3> light{{
        {NoiseKind::Gaussian, 0.02},
        {NoiseKind::Uniform, 0.01},
        {NoiseKind::Laplacian, 0.05},
    }};
    std::uint64_t seed = 801;
    for (const auto& [kind, kurt_tol] : light) {
        const auto x = gen_noise({kind, variance}, length, {seed++, 0});
        CompensatedSum m2;
        for (double v : x) m2 += v * v;
        const double var_err = rel(m2.value() / static_cast<double>(length), variance);
        const double kurt_err = rel(sample_kurtosis(x), theoretical_kurtosis(kind));
        ok = ok && var_err <= 0.01 && kurt_err <= kurt_tol;
        detail += fmt("%s var %.4f kurt %.4f; ", std::string(to_string(kind)).c_str(), var_err, kurt_err);
    }

    const double exact = 654729075.0 / 893025.0;  // 19!! / (9!!)^2
    const bool analytic = theoretical_kurtosis(NoiseKind::GaussianPower) == exact && std::round(exact) == 733.0;
    const auto gp = raw_moments({NoiseKind::GaussianPower, variance}, 10, length, seed);
    const double var_err = rel(gp.variance, variance);
    const double kurt_err = rel(gp.kurtosis, exact);
    ok = ok && analytic && var_err <= 0.01 && kurt_err <= 0.40;
    detail += fmt("gaussian_power (1e8) var %.4f kurt %.1f vs %.4f", var_err, gp.kurtosis, exact);
    return {ok, detail};
}

Outcome nlms_matches_lms() {
    const std::size_t n = 128;
    const double beta = 0.1;
    const auto a = run_trials(experiment(0.5, n, nlms(n, beta), NoiseKind::Gaussian, 10, 100000, 901));
    const auto b = run_trials(experiment(0.5, n, Lms{effective_step(beta, n, 1.0)}, NoiseKind::Gaussian, 10, 100000, 902));
    const double err = rel(a.mean_e2, b.mean_e2);
    return {err <= 0.10, fmt("nlms %.6g vs lms %.6g, rel diff %.4f (tol 0.10)", a.mean_e2, b.mean_e2, err)};
}

Outcome deterministic_output() {
    const auto dir = fs::temp_directory_path() / "lmsvar_acceptance";
    fs::create_directories(dir);
    const auto cfg = dir / "det.cfg";
    std::ofstream(cfg) << "algorithm = nlms\nn_taps = 64\nbeta = 0.1\nar1_a = 0.5\ninput_variance = 1\n"
                          "noise_kind = laplacian\nnoise_variance = 1e-6\nimpulse_response = synthetic:8\n"
                          "iterations = 20000\n";
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4", "1", "3"}) {
        const auto out_path = dir / (std::string("t") + threads + "_" + std::to_string(outputs.size()) + ".csv");
        std::ostringstream out;
        std::ostringstream err;
        const int status = run_command({"ensemble", "--config", cfg.string(), "--trials", "12", "--seed", "77",
                                        "--threads", threads, "--out", out_path.string()},
                                       out, err);
        if (status != kExitOk) {
            fs::remove_all(dir);
            return {false, "ensemble failed: " + err.str()};
        }
        outputs.push_back(slurp(out_path));
    }
    fs::remove_all(dir);
    bool identical = !outputs[0].empty();
    for (const auto& o : outputs) identical = identical && o == outputs[0];

    const auto spec = experiment(0.5, 32, Lms{paper_step_size(32, 1.0)}, NoiseKind::Uniform, 9, 5000, 78);
    const bool serial_matches = run_trials(spec) == run_trials_serial(spec);
    return {identical && serial_matches,
            fmt("csv identical across 4 runs (threads 1,4,1,3): %s; parallel == serial: %s", identical ? "yes" : "no",
                serial_matches ? "yes" : "no")};
}

} // namespace

int main() {
    const std::array<std::pair<const char*, std::function<Outcome()>>, 10> criteria{{
        {"chi-square table quantiles", table_quantiles},
        {"steady-state MSE, white Gaussian", white_gaussian_mse},
        {"squared-error variance, white input", white_variance},
        {"Gaussian confidence coverage, AR(1)", gaussian_coverage},
        {"non-Gaussian 3-sigma bound", non_gaussian_bound},
        {"algebraic identities", algebraic_identities},
        {"variance increases with step size", monotone_in_step},
        {"noise generator statistics", generator_statistics},
        {"NLMS matches mapped LMS", nlms_matches_lms},
        {"deterministic ensemble output", deterministic_output},
    }};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %zu: %s -- %s (%.1fs)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
