#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmsvar/bounds.hpp"
#include "lmsvar/filters.hpp"
#include "lmsvar/model.hpp"
#include "lmsvar/signals.hpp"

namespace lmsvar {

struct ExperimentSpec {
    SignalSpec signal;
    PlantSpec plant;
    FilterSpec filter;
    std::size_t iterations = 0;
    double burn_in_fraction = 0.5;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;

    void validate() const;
};

/// Half-open index range [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

IndexRange steady_window(std::size_t iterations, double burn_in_fraction);

/// Random substreams used by trial `trial` of an experiment.
RandomStream input_stream(std::uint64_t master_seed, std::size_t trial);
RandomStream noise_stream(std::uint64_t master_seed, std::size_t trial);

struct EnsembleStats {
    double mean_e2 = 0.0;
    double mean_e4 = 0.0;
    double var_e2 = 0.0;
    std::size_t sample_count = 0;
    /// One pooled coverage fraction per requested interval, in request order.
    std::vector<double> coverage;
    /// Set when mean_e4 - mean_e2^2 came out negative and was clamped to 0.
    bool var_clamped = false;

    bool operator==(const EnsembleStats&) const = default;
};

/// A trial whose error sequence became non-finite.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(std::size_t trial);
    std::size_t trial() const { return trial_; }

private:
    std::size_t trial_;
};

/// Runs all trials in parallel (OpenMP) and reduces per-trial partial sums in
/// trial order, so the result does not depend on the thread count.
EnsembleStats run_trials(const ExperimentSpec& spec, std::span<const ConfidenceInterval> intervals = {});

/// Single-threaded reference for run_trials. Must produce identical results.
EnsembleStats run_trials_serial(const ExperimentSpec& spec, std::span<const ConfidenceInterval> intervals = {});

/// Fraction of squared errors in `window` that fall inside `interval`.
double coverage(const Trace& trace, IndexRange window, const ConfidenceInterval& interval);

struct Tolerances {
    std::optional<double> mean_e2;
    std::optional<double> mean_e4;
    std::optional<double> var_e2;
    /// Heavy-tailed noise: fourth-order rows are reported but not judged.
    bool fourth_order_coverage_only = false;
};

struct ComparisonRow {
    std::string stat;
    double predicted = 0.0;
    double empirical = 0.0;
    double rel_err = 0.0;
    std::optional<double> tolerance;
    bool coverage_only = false;
    bool passed = true;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_passed() const;
};

ComparisonReport compare(const Prediction& prediction, const EnsembleStats& stats,
                         const Tolerances& tolerances = {});

} // namespace lmsvar
