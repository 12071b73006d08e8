#include "lmsvar/ensemble.hpp"

#include <cmath>
#include <exception>

#include "lmsvar/summation.hpp"

namespace lmsvar {

namespace {

struct TrialPartial {
    CompensatedSum sum_z2;
    CompensatedSum sum_z4;
    std::size_t count = 0;
    std::vector<std::size_t> inside;
};

TrialPartial run_one_trial(const ExperimentSpec& spec, std::size_t trial, IndexRange window,
                           std::span<const ConfidenceInterval> intervals) {
    const auto input = gen_ar1(spec.signal, spec.iterations, input_stream(spec.master_seed, trial));
    const auto noise = gen_noise(spec.plant.noise, spec.iterations, noise_stream(spec.master_seed, trial));
    const Trace trace = simulate(spec.plant, spec.filter, input, noise);

    for (double e : trace.errors) {
        if (!std::isfinite(e)) {
            throw DivergenceError(trial);
        }
    }

    // Moments of e / sigma_r keep fourth powers near unity.
    const double inv_variance = 1.0 / spec.plant.noise.variance;
    TrialPartial partial;
    partial.inside.assign(intervals.size(), 0);
    for (std::size_t n = window.begin; n < window.end; ++n) {
        const double e2 = trace.squared_errors[n];
        const double z2 = e2 * inv_variance;
        partial.sum_z2 += z2;
        partial.sum_z4 += z2 * z2;
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].contains(e2)) {
                ++partial.inside[i];
            }
        }
    }
    partial.count = window.size();
    return partial;
}

EnsembleStats reduce(const ExperimentSpec& spec, const std::vector<TrialPartial>& partials,
                     std::size_t interval_count) {
    CompensatedSum z2;
    CompensatedSum z4;
    std::size_t count = 0;
    std::vector<std::size_t> inside(interval_count, 0);
    for (const auto& p : partials) {
        z2 += p.sum_z2.value();
        z4 += p.sum_z4.value();
        count += p.count;
        for (std::size_t i = 0; i < interval_count; ++i) {
            inside[i] += p.inside[i];
        }
    }

    const double total = static_cast<double>(count);
    const double m2 = z2.value() / total;
    const double m4 = z4.value() / total;
    const double variance = spec.plant.noise.variance;

    EnsembleStats stats;
    stats.sample_count = count;
    stats.mean_e2 = m2 * variance;
    stats.mean_e4 = m4 * variance * variance;
    double var_z2 = m4 - m2 * m2;
    if (var_z2 < 0.0) {
        stats.var_clamped = true;
        var_z2 = 0.0;
    }
    stats.var_e2 = var_z2 * variance * variance;
    for (auto k : inside) {
        stats.coverage.push_back(static_cast<double>(k) / total);
    }
    return stats;
}

} // namespace

void ExperimentSpec::validate() const {
    signal.validate();
    plant.noise.validate();
    filter.validate();
    if (plant.impulse_response.size() != filter.n_taps) {
        throw std::invalid_argument("impulse response length must equal n_taps");
    }
    if (iterations < 10) {
        throw std::invalid_argument("experiment needs at least 10 iterations");
    }
    if (trials == 0) {
        throw std::invalid_argument("experiment needs at least one trial");
    }
    if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0)) {
        throw std::invalid_argument("burn-in fraction must lie in (0, 1)");
    }
}

IndexRange steady_window(std::size_t iterations, double burn_in_fraction) {
    if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0)) {
        throw std::invalid_argument("burn-in fraction must lie in (0, 1)");
    }
    const auto begin =
        static_cast<std::size_t>(std::ceil(static_cast<double>(iterations) * burn_in_fraction));
    if (begin >= iterations) {
        throw std::invalid_argument("steady-state window is empty");
    }
    return {begin, iterations};
}

RandomStream input_stream(std::uint64_t master_seed, std::size_t trial) {
    return {master_seed, 2 * static_cast<std::uint64_t>(trial)};
}

RandomStream noise_stream(std::uint64_t master_seed, std::size_t trial) {
    return {master_seed, 2 * static_cast<std::uint64_t>(trial) + 1};
}

DivergenceError::DivergenceError(std::size_t trial)
    : std::runtime_error("trial " + std::to_string(trial) + " diverged (non-finite error)"), trial_(trial) {}

EnsembleStats run_trials(const ExperimentSpec& spec, std::span<const ConfidenceInterval> intervals) {
    spec.validate();
    const IndexRange window = steady_window(spec.iterations, spec.burn_in_fraction);
    const auto trials = static_cast<std::ptrdiff_t>(spec.trials);

    std::vector<TrialPartial> partials(spec.trials);
    std::vector<std::exception_ptr> failures(spec.trials);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < trials; ++t) {
        const auto trial = static_cast<std::size_t>(t);
        try {
            partials[trial] = run_one_trial(spec, trial, window, intervals);
        } catch (...) {
            failures[trial] = std::current_exception();
        }
    }

    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    return reduce(spec, partials, intervals.size());
}

EnsembleStats run_trials_serial(const ExperimentSpec& spec, std::span<const ConfidenceInterval> intervals) {
    spec.validate();
    const IndexRange window = steady_window(spec.iterations, spec.burn_in_fraction);
    std::vector<TrialPartial> partials;
    partials.reserve(spec.trials);
    for (std::size_t t = 0; t < spec.trials; ++t) {
        partials.push_back(run_one_trial(spec, t, window, intervals));
    }
    return reduce(spec, partials, intervals.size());
}

double coverage(const Trace& trace, IndexRange window, const ConfidenceInterval& interval) {
    if (window.begin >= window.end) {
        throw std::invalid_argument("coverage window is empty");
    }
    if (window.end > trace.squared_errors.size()) {
        throw std::out_of_range("coverage window extends past the trace");
    }
    std::size_t inside = 0;
    for (std::size_t n = window.begin; n < window.end; ++n) {
        if (interval.contains(trace.squared_errors[n])) {
            ++inside;
        }
    }
    return static_cast<double>(inside) / static_cast<double>(window.size());
}

bool ComparisonReport::all_passed() const {
    for (const auto& row : rows) {
        if (!row.passed) {
            return false;
        }
    }
    return true;
}

ComparisonReport compare(const Prediction& prediction, const EnsembleStats& stats, const Tolerances& tolerances) {
    for (auto tol : {tolerances.mean_e2, tolerances.mean_e4, tolerances.var_e2}) {
        if (tol && !(*tol >= 0.0)) {
            throw std::invalid_argument("tolerances must be nonnegative");
        }
    }

    auto row = [](std::string name, double predicted, double empirical, std::optional<double> tol,
                  bool coverage_only) {
        ComparisonRow r;
        r.stat = std::move(name);
        r.predicted = predicted;
        r.empirical = empirical;
        r.rel_err = std::abs(empirical - predicted) / predicted;
        r.coverage_only = coverage_only;
        if (!coverage_only) {
            r.tolerance = tol;
            r.passed = !tol || r.rel_err <= *tol;
        }
        return r;
    };

    const bool heavy = tolerances.fourth_order_coverage_only;
    ComparisonReport report;
    report.rows.push_back(row("mean_e2", prediction.j_inf, stats.mean_e2, tolerances.mean_e2, false));
    report.rows.push_back(row("var_e2", prediction.var_e2_inf, stats.var_e2, tolerances.var_e2, heavy));
    report.rows.push_back(row("mean_e4", prediction.e4_inf, stats.mean_e4, tolerances.mean_e4, heavy));
    return report;
}

} // namespace lmsvar
