#include "lmsvar/signals.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lmsvar/summation.hpp"

namespace lmsvar {

namespace {

// Uniform deviate strictly inside (0, 1) from the top 53 bits of the engine.
double open_unit(std::mt19937_64& engine) {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double double_factorial(int n) {
    double result = 1.0;
    for (int k = n; k > 1; k -= 2) {
        result *= k;
    }
    return result;
}

} // namespace

void SignalSpec::validate() const {
    if (!(std::abs(ar1_coefficient) < 1.0)) {
        throw std::invalid_argument("AR(1) coefficient must satisfy |a| < 1, got " +
                                    std::to_string(ar1_coefficient));
    }
    if (!(input_variance > 0.0) || !std::isfinite(input_variance)) {
        throw std::invalid_argument("input variance must be positive");
    }
}

void NoiseSpec::validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw std::invalid_argument("noise variance must be positive");
    }
}

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Uniform: return "uniform";
    case NoiseKind::Laplacian: return "laplacian";
    case NoiseKind::GaussianPower: return "gaussian_power";
    }
    return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
    for (auto kind : {NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::Laplacian,
                      NoiseKind::GaussianPower}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

std::mt19937_64 RandomStream::engine() const {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(stream_index),
        static_cast<std::uint32_t>(stream_index >> 32),
        0x6c6d7376u,
    };
    return std::mt19937_64(seq);
}

AutocorrMatrix::AutocorrMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("autocorrelation matrix must be square and non-empty");
    }
}

std::vector<double> gen_ar1(const SignalSpec& spec, std::size_t length, const RandomStream& stream) {
    spec.validate();
    if (length == 0) {
        throw std::invalid_argument("gen_ar1: length must be at least 1");
    }
    auto engine = stream.engine();
    std::normal_distribution<double> normal;

    const double a = spec.ar1_coefficient;
    const double sigma = std::sqrt(spec.input_variance);
    const double innovation = sigma * std::sqrt(1.0 - a * a);

    std::vector<double> x(length);
    // Stationary start: x[0] has the marginal variance.
    x[0] = sigma * normal(engine);
    for (std::size_t n = 1; n < length; ++n) {
        x[n] = a * x[n - 1] + innovation * normal(engine);
    }
    return x;
}

double uniform_half_width(double variance) { return std::sqrt(3.0 * variance); }

double laplacian_scale(double variance) { return std::sqrt(variance / 2.0); }

double laplacian_from_uniform(double u, double variance) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::domain_error("laplacian_from_uniform: u must lie in (0, 1)");
    }
    const double b = laplacian_scale(variance);
    const double centered = u - 0.5;
    if (centered == 0.0) {
        return 0.0;
    }
    const double magnitude = -b * std::log1p(-2.0 * std::abs(centered));
    return centered < 0.0 ? -magnitude : magnitude;
}

double gaussian_power_from_normal(double u, double variance) {
    const double u2 = u * u;
    return u2 * u2 * u * std::sqrt(variance / 945.0);
}

std::vector<double> gen_noise(const NoiseSpec& spec, std::size_t length, const RandomStream& stream) {
    spec.validate();
    if (length == 0) {
        throw std::invalid_argument("gen_noise: length must be at least 1");
    }
    auto engine = stream.engine();
    std::vector<double> r(length);

    switch (spec.kind) {
    case NoiseKind::Gaussian: {
        std::normal_distribution<double> normal(0.0, std::sqrt(spec.variance));
        for (auto& v : r) v = normal(engine);
        break;
    }
    case NoiseKind::Uniform: {
        const double h = uniform_half_width(spec.variance);
        for (auto& v : r) v = h * (2.0 * open_unit(engine) - 1.0);
        break;
    }
    case NoiseKind::Laplacian:
        for (auto& v : r) v = laplacian_from_uniform(open_unit(engine), spec.variance);
        break;
    case NoiseKind::GaussianPower: {
        std::normal_distribution<double> normal;
        for (auto& v : r) v = gaussian_power_from_normal(normal(engine), spec.variance);
        break;
    }
    }
    return r;
}

AutocorrMatrix ar1_autocorrelation_matrix(double a, double variance, std::size_t n) {
    SignalSpec{a, variance}.validate();
    if (n == 0) {
        throw std::invalid_argument("autocorrelation matrix size must be at least 1");
    }
    std::vector<double> lags(n);
    lags[0] = variance;
    for (std::size_t k = 1; k < n; ++k) {
        lags[k] = lags[k - 1] * a;
    }
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd r(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j < size; ++j) {
            r(i, j) = lags[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    return AutocorrMatrix(std::move(r));
}

double sample_kurtosis(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("sample_kurtosis needs at least 2 samples");
    }
    CompensatedSum m2;
    CompensatedSum m4;
    for (double x : samples) {
        const double x2 = x * x;
        m2 += x2;
        m4 += x2 * x2;
    }
    if (m2.value() == 0.0) {
        throw std::domain_error("sample_kurtosis of an all-zero sequence is undefined");
    }
    const double count = static_cast<double>(samples.size());
    const double mean2 = m2.value() / count;
    return (m4.value() / count) / (mean2 * mean2);
}

double theoretical_kurtosis(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::Gaussian: return 3.0;
    case NoiseKind::Uniform: return 9.0 / 5.0;
    case NoiseKind::Laplacian: return 6.0;
    case NoiseKind::GaussianPower: {
        // E{u^20} / E{u^10}^2 for standard normal u.
        const double m10 = double_factorial(9);
        return double_factorial(19) / (m10 * m10);
    }
    }
    return 0.0;
}

} // namespace lmsvar
