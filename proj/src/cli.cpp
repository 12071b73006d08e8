#include "lmsvar/cli.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "lmsvar/bounds.hpp"
#include "lmsvar/config.hpp"
#include "lmsvar/ensemble.hpp"
#include "lmsvar/model.hpp"

namespace lmsvar {

namespace {

// Writes to "<path>.partial" and renames on commit; an uncommitted file is
// removed on destruction so failures leave no partial output behind.
class OutputFile {
public:
    explicit OutputFile(std::filesystem::path path)
        : path_(std::move(path)), partial_(path_.string() + ".partial"), stream_(partial_, std::ios::binary) {
        if (!stream_) {
            throw std::runtime_error("cannot open output file " + partial_.string());
        }
    }
    OutputFile(const OutputFile&) = delete;
    OutputFile& operator=(const OutputFile&) = delete;

    ~OutputFile() {
        if (!committed_) {
            stream_.close();
            std::error_code ec;
            std::filesystem::remove(partial_, ec);
        }
    }

    std::ostream& stream() { return stream_; }

    void commit() {
        stream_.close();
        if (!stream_) {
            throw std::runtime_error("failed writing " + partial_.string());
        }
        std::filesystem::rename(partial_, path_);
        committed_ = true;
    }

private:
    std::filesystem::path path_;
    std::filesystem::path partial_;
    std::ofstream stream_;
    bool committed_ = false;
};

std::string db(double power) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << to_db(power) << " dB";
    return s.str();
}

std::string percent(double confidence) {
    std::ostringstream s;
    s << confidence * 100.0 << '%';
    return s.str();
}

// The interval a steady-state squared error is checked against: chi-square
// bounds for Gaussian noise, [0, J + 3 sigma] otherwise.
ConfidenceInterval se_interval(const Prediction& prediction, NoiseKind kind, double confidence) {
    if (kind == NoiseKind::Gaussian) {
        return gaussian_se_bounds(prediction.j_inf, confidence);
    }
    return {confidence, 0.0, prediction.three_sigma_upper};
}

void apply_threads(int threads) {
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
}

void warn_small_step(const Prediction& p, std::ostream& err) {
    if (p.small_step_warning) {
        err << "warning: mu*tr(R) = " << format_double(p.step_load) << " exceeds " << kSmallStepLimit
            << "; the small-step covariance model is stressed\n";
    }
}

int cmd_predict(const std::string& config_path, std::ostream& out, std::ostream& err) {
    const auto config = load_config(config_path);
    const auto& spec = config.spec;
    const auto p = predict(spec.filter, spec.plant, spec.signal, config.confidence);
    warn_small_step(p, err);

    out << "algorithm      " << (spec.filter.is_nlms() ? "nlms" : "lms") << '\n';
    out << "n_taps         " << spec.filter.n_taps << '\n';
    out << "noise_kind     " << to_string(spec.plant.noise.kind) << '\n';
    out << "effective_mu   " << format_double(p.effective_mu) << '\n';
    out << "mu_trace_r     " << format_double(p.step_load) << '\n';
    out << "kurtosis       " << format_double(p.kurtosis) << '\n';
    out << "j_min          " << format_double(p.j_min) << "  (" << db(p.j_min) << ")\n";
    out << "j_inf          " << format_double(p.j_inf) << "  (" << db(p.j_inf) << ")\n";
    out << "e4_inf         " << format_double(p.e4_inf) << '\n';
    out << "var_e2_inf     " << format_double(p.var_e2_inf) << '\n';
    out << "std_e2_inf     " << format_double(std::sqrt(p.var_e2_inf)) << "  (" << db(std::sqrt(p.var_e2_inf))
        << ")\n";
    if (spec.plant.noise.kind == NoiseKind::Gaussian) {
        const auto& b = *p.gaussian_bounds;
        out << "interval_" << percent(config.confidence) << "  [" << format_double(b.lower) << ", "
            << format_double(b.upper) << "]  (" << db(b.lower) << ", " << db(b.upper) << ")\n";
        out << "upper_over_j_inf  " << std::fixed << std::setprecision(3) << to_db(b.upper / p.j_inf)
            << " dB\n";
    } else {
        out << "three_sigma_upper  " << format_double(p.three_sigma_upper) << "  (" << db(p.three_sigma_upper)
            << ")\n";
    }
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, const std::string& out_path,
                 std::ostream& out) {
    const auto config = load_config(config_path);
    const auto& spec = config.spec;
    const auto input = gen_ar1(spec.signal, spec.iterations, input_stream(seed, 0));
    const auto noise = gen_noise(spec.plant.noise, spec.iterations, noise_stream(seed, 0));
    const auto trace = simulate(spec.plant, spec.filter, input, noise);
    for (std::size_t n = 0; n < trace.iterations(); ++n) {
        if (!std::isfinite(trace.errors[n])) {
            throw DivergenceError(0);
        }
    }

    OutputFile file(out_path);
    auto& csv = file.stream();
    csv << "n,e,e2\n";
    for (std::size_t n = 0; n < trace.iterations(); ++n) {
        csv << n << ',' << format_double(trace.errors[n]) << ',' << format_double(trace.squared_errors[n]) << '\n';
    }
    file.commit();
    out << "wrote " << trace.iterations() << " samples to " << out_path << '\n';
    return kExitOk;
}

struct EnsembleOptions {
    std::string config;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
    std::optional<double> tol_mean;
    std::optional<double> tol_var;
    std::optional<double> tol_e4;
};

int cmd_ensemble(const EnsembleOptions& opt, std::ostream& out, std::ostream& err) {
    auto config = load_config(opt.config);
    config.spec.trials = opt.trials;
    config.spec.master_seed = opt.seed;
    const auto& spec = config.spec;

    const auto prediction = predict(spec.filter, spec.plant, spec.signal);
    warn_small_step(prediction, err);
    apply_threads(opt.threads);
    const auto stats = run_trials(spec);
    if (stats.var_clamped) {
        err << "warning: negative empirical variance clamped to 0\n";
    }

    Tolerances tolerances{opt.tol_mean, opt.tol_e4, opt.tol_var,
                          spec.plant.noise.kind == NoiseKind::GaussianPower};
    const auto report = compare(prediction, stats, tolerances);

    OutputFile file(opt.out);
    auto& csv = file.stream();
    csv << "stat,predicted,empirical,rel_err\n";
    for (const auto& row : report.rows) {
        csv << row.stat << ',' << format_double(row.predicted) << ',' << format_double(row.empirical) << ','
            << format_double(row.rel_err) << '\n';
    }
    file.commit();

    out << "trials " << spec.trials << ", steady samples " << stats.sample_count << '\n';
    for (const auto& row : report.rows) {
        out << std::left << std::setw(8) << row.stat << " predicted " << format_double(row.predicted)
            << "  empirical " << format_double(row.empirical) << "  rel_err " << format_double(row.rel_err);
        if (row.coverage_only) {
            out << "  [coverage-verified only]";
        } else if (row.tolerance) {
            out << (row.passed ? "  PASS" : "  FAIL") << " (tol " << format_double(*row.tolerance) << ')';
        }
        out << '\n';
    }
    return report.all_passed() ? kExitOk : kExitComparisonFailed;
}

int cmd_coverage(const std::string& config_path, std::size_t trials, std::optional<double> confidence,
                 std::uint64_t seed, int threads, std::ostream& out, std::ostream& err) {
    auto config = load_config(config_path);
    config.spec.trials = trials;
    config.spec.master_seed = seed;
    const double level = confidence.value_or(config.confidence);
    const auto& spec = config.spec;

    const auto prediction = predict(spec.filter, spec.plant, spec.signal);
    warn_small_step(prediction, err);
    const auto interval = se_interval(prediction, spec.plant.noise.kind, level);
    apply_threads(threads);
    const std::array intervals{interval};
    const auto stats = run_trials(spec, intervals);

    if (spec.plant.noise.kind == NoiseKind::Gaussian) {
        out << "interval  chi-square " << percent(level);
    } else {
        out << "interval  J_inf + 3 sigma";
    }
    out << "  [" << format_double(interval.lower) << ", " << format_double(interval.upper) << "]\n";
    out << "samples   " << stats.sample_count << '\n';
    out << "coverage  " << format_double(stats.coverage.front()) << '\n';
    return kExitOk;
}

int cmd_quantile(double p, std::ostream& out) {
    out << format_double(chi2_1_quantile(p)) << '\n';
    return kExitOk;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state squared-error statistics of LMS/NLMS adaptive filters", "lmsvar"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    int threads = 0;
    double p = 0.0;
    std::optional<double> confidence;
    EnsembleOptions ens;

    auto* predict_cmd = app.add_subcommand("predict", "Closed-form steady-state prediction and bounds");
    predict_cmd->add_option("--config", config_path, "Experiment config file")->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "One realization; CSV columns n,e,e2");
    simulate_cmd->add_option("--config", config_path, "Experiment config file")->required();
    simulate_cmd->add_option("--seed", seed, "Master seed");
    simulate_cmd->add_option("--out", out_path, "Output CSV path")->required();

    auto* ensemble_cmd = app.add_subcommand("ensemble", "Monte Carlo moments vs. prediction");
    ensemble_cmd->add_option("--config", ens.config, "Experiment config file")->required();
    ensemble_cmd->add_option("--trials", ens.trials, "Number of independent trials")->check(CLI::PositiveNumber);
    ensemble_cmd->add_option("--seed", ens.seed, "Master seed");
    ensemble_cmd->add_option("--out", ens.out, "Output CSV path")->required();
    ensemble_cmd->add_option("--threads", ens.threads, "OpenMP thread count (0 = runtime default)");
    ensemble_cmd->add_option("--tol-mean", ens.tol_mean, "Relative tolerance on mean_e2");
    ensemble_cmd->add_option("--tol-var", ens.tol_var, "Relative tolerance on var_e2");
    ensemble_cmd->add_option("--tol-e4", ens.tol_e4, "Relative tolerance on mean_e4");

    auto* coverage_cmd = app.add_subcommand("coverage", "Pooled steady-state coverage of the predicted bound");
    coverage_cmd->add_option("--config", config_path, "Experiment config file")->required();
    coverage_cmd->add_option("--trials", trials, "Number of independent trials")->check(CLI::PositiveNumber);
    coverage_cmd->add_option("--confidence", confidence, "Confidence level (defaults to the config value)")
        ->check(CLI::Range(0.0, 1.0));
    coverage_cmd->add_option("--seed", seed, "Master seed");
    coverage_cmd->add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");

    auto* quantile_cmd = app.add_subcommand("quantile", "Chi-square (1 dof) quantile");
    quantile_cmd->add_option("--p", p, "Probability in (0, 1)")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    try {
        if (predict_cmd->parsed()) {
            return cmd_predict(config_path, out, err);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(config_path, seed, out_path, out);
        }
        if (ensemble_cmd->parsed()) {
            return cmd_ensemble(ens, out, err);
        }
        if (coverage_cmd->parsed()) {
            return cmd_coverage(config_path, trials, confidence, seed, threads, out, err);
        }
        if (quantile_cmd->parsed()) {
            return cmd_quantile(p, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace lmsvar
