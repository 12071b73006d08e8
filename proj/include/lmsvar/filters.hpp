#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lmsvar/signals.hpp"

namespace lmsvar {

struct Lms {
    double step = 0.0;
};

struct Nlms {
    double step = 0.0;       // normalized step, 0 < step < 2
    double regularizer = 0.0;
};

using Algorithm = std::variant<Lms, Nlms>;

struct FilterSpec {
    std::size_t n_taps = 1;
    Algorithm algorithm = Lms{};
    /// Empty means all-zero.
    std::vector<double> initial_weights;

    void validate() const;
    bool is_nlms() const { return std::holds_alternative<Nlms>(algorithm); }
    double step() const;
};

/// The unknown system: FIR impulse response plus additive output noise.
struct PlantSpec {
    std::vector<double> impulse_response;
    NoiseSpec noise;
};

struct Trace {
    std::vector<double> errors;
    std::vector<double> squared_errors;

    std::size_t iterations() const { return errors.size(); }
};

/// Thrown by unregularized NLMS when the regressor energy is exactly zero.
class DegenerateUpdateError : public std::runtime_error {
public:
    explicit DegenerateUpdateError(std::size_t index);
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Runs the adaptive filter over `input`, identifying `plant.impulse_response`
/// with desired signal d[n] = noise[n] + x[n]^T h. The regressor has zero
/// pre-history. Errors follow e[n] = d[n] - x[n]^T w[n-1].
Trace simulate(const PlantSpec& plant, const FilterSpec& filter, std::span<const double> input,
               std::span<const double> noise);

/// NLMS-to-LMS mapping beta / (N * input_variance).
double effective_step(double beta, std::size_t n_taps, double input_variance);

/// The reproduction step rule 2 / (30 * input_variance * N).
double paper_step_size(std::size_t n_taps, double input_variance);

/// Default NLMS regularizer 1e-10 * N * input_variance.
double default_nlms_regularizer(std::size_t n_taps, double input_variance);

} // namespace lmsvar
