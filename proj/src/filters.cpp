#include "lmsvar/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lmsvar {

namespace {

template <typename Update>
void run_kernel(std::span<const double> h, std::span<const double> input, std::span<const double> noise,
                std::vector<double> weights, Trace& trace, Update update) {
    const std::size_t n_taps = h.size();
    const std::size_t length = input.size();

    // Zero pre-history, then the input. The window starting at padded[n]
    // holds x[n-N+1] ... x[n], so taps are stored in reversed order.
    std::vector<double> padded(length + n_taps - 1, 0.0);
    std::copy(input.begin(), input.end(), padded.begin() + static_cast<std::ptrdiff_t>(n_taps - 1));

    std::vector<double> wr(weights.rbegin(), weights.rend());
    std::vector<double> hr(h.rbegin(), h.rend());
    double* const w = wr.data();
    const double* const plant = hr.data();

    trace.errors.resize(length);
    trace.squared_errors.resize(length);

    for (std::size_t n = 0; n < length; ++n) {
        const double* const x = padded.data() + n;
        double output = 0.0;
        double desired = 0.0;
        double energy = 0.0;
#pragma omp simd reduction(+ : output, desired, energy)
        for (std::size_t j = 0; j < n_taps; ++j) {
            output += w[j] * x[j];
            desired += plant[j] * x[j];
            energy += x[j] * x[j];
        }
        const double e = desired + noise[n] - output;
        trace.errors[n] = e;
        trace.squared_errors[n] = e * e;

        const double gain = update(e, energy, n);
#pragma omp simd
        for (std::size_t j = 0; j < n_taps; ++j) {
            w[j] += gain * x[j];
        }
    }
}

} // namespace

DegenerateUpdateError::DegenerateUpdateError(std::size_t index)
    : std::runtime_error("NLMS update with zero regressor energy and no regularizer at n=" +
                         std::to_string(index)),
      index_(index) {}

void FilterSpec::validate() const {
    if (n_taps == 0) {
        throw std::invalid_argument("filter must have at least one tap");
    }
    if (!initial_weights.empty() && initial_weights.size() != n_taps) {
        throw std::invalid_argument("initial weights length " + std::to_string(initial_weights.size()) +
                                    " does not match n_taps " + std::to_string(n_taps));
    }
    if (const auto* lms = std::get_if<Lms>(&algorithm)) {
        if (!(lms->step > 0.0) || !std::isfinite(lms->step)) {
            throw std::invalid_argument("LMS step size must be positive");
        }
    } else {
        const auto& nlms = std::get<Nlms>(algorithm);
        if (!(nlms.step > 0.0 && nlms.step < 2.0)) {
            throw std::invalid_argument("NLMS normalized step must lie in (0, 2)");
        }
        if (!(nlms.regularizer >= 0.0) || !std::isfinite(nlms.regularizer)) {
            throw std::invalid_argument("NLMS regularizer must be nonnegative");
        }
    }
}

double FilterSpec::step() const {
    return std::visit([](const auto& a) { return a.step; }, algorithm);
}

Trace simulate(const PlantSpec& plant, const FilterSpec& filter, std::span<const double> input,
               std::span<const double> noise) {
    if (input.size() != noise.size()) {
        throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                    " differs from noise length " + std::to_string(noise.size()));
    }
    if (input.empty()) {
        throw std::invalid_argument("simulate needs at least one sample");
    }
    if (plant.impulse_response.size() != filter.n_taps) {
        throw std::invalid_argument("impulse response length must equal n_taps");
    }

    std::vector<double> weights = filter.initial_weights;
    if (weights.empty()) {
        weights.assign(filter.n_taps, 0.0);
    }

    // A zero step is allowed here for frozen-weight runs; predict() and the
    // experiment specs go through FilterSpec::validate().
    Trace trace;
    if (const auto* lms = std::get_if<Lms>(&filter.algorithm)) {
        const double mu = lms->step;
        run_kernel(plant.impulse_response, input, noise, std::move(weights), trace,
                   [mu](double e, double, std::size_t) { return mu * e; });
    } else {
        const auto nlms = std::get<Nlms>(filter.algorithm);
        run_kernel(plant.impulse_response, input, noise, std::move(weights), trace,
                   [nlms](double e, double energy, std::size_t n) {
                       const double denominator = energy + nlms.regularizer;
                       if (denominator == 0.0) {
                           throw DegenerateUpdateError(n);
                       }
                       return nlms.step * e / denominator;
                   });
    }
    return trace;
}

double effective_step(double beta, std::size_t n_taps, double input_variance) {
    if (!(beta > 0.0) || n_taps == 0 || !(input_variance > 0.0)) {
        throw std::invalid_argument("effective_step requires positive arguments");
    }
    return beta / (static_cast<double>(n_taps) * input_variance);
}

double paper_step_size(std::size_t n_taps, double input_variance) {
    if (n_taps == 0 || !(input_variance > 0.0)) {
        throw std::invalid_argument("paper_step_size requires positive arguments");
    }
    return 2.0 / (30.0 * input_variance * static_cast<double>(n_taps));
}

double default_nlms_regularizer(std::size_t n_taps, double input_variance) {
    return 1e-10 * static_cast<double>(n_taps) * input_variance;
}

} // namespace lmsvar
