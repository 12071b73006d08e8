#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lmsvar {

/// Stationary first-order autoregressive input process.
struct SignalSpec {
    double ar1_coefficient = 0.0;
    double input_variance = 1.0;

    void validate() const;
};

enum class NoiseKind { Gaussian, Uniform, Laplacian, GaussianPower };

std::string_view to_string(NoiseKind kind);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

/// Zero-mean white additive noise with variance `variance`.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double variance = 1.0;

    void validate() const;
};

/// Identifies one reproducible random substream. Streams sharing a master seed
/// but differing in index are seeded from disjoint seed_seq inputs.
struct RandomStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    std::mt19937_64 engine() const;
};

/// Symmetric Toeplitz input autocorrelation matrix.
class AutocorrMatrix {
public:
    explicit AutocorrMatrix(Eigen::MatrixXd entries);

    const Eigen::MatrixXd& matrix() const { return entries_; }
    std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
    double trace() const { return entries_.trace(); }
    /// trace(R * R), computed as the squared Frobenius norm of a symmetric matrix.
    double trace_of_square() const { return entries_.squaredNorm(); }

private:
    Eigen::MatrixXd entries_;
};

std::vector<double> gen_ar1(const SignalSpec& spec, std::size_t length, const RandomStream& stream);
std::vector<double> gen_noise(const NoiseSpec& spec, std::size_t length, const RandomStream& stream);

// Per-sample transforms used by gen_noise. Exposed so the distribution
// definitions can be checked at fixed deviates.
double uniform_half_width(double variance);
double laplacian_scale(double variance);
/// Inverse CDF of the zero-mean Laplacian with the given variance, u in (0, 1).
double laplacian_from_uniform(double u, double variance);
/// u^5 * sqrt(variance / 945) for a standard normal draw u.
double gaussian_power_from_normal(double u, double variance);

AutocorrMatrix ar1_autocorrelation_matrix(double a, double variance, std::size_t n);

/// (mean of x^4) / (mean of x^2)^2, zero-mean convention.
double sample_kurtosis(std::span<const double> samples);

double theoretical_kurtosis(NoiseKind kind);

} // namespace lmsvar
