#include "lmsvar/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lmsvar {

namespace {

void require_same_size(const CovMatrix& k, const AutocorrMatrix& r) {
    if (k.size() != r.size()) {
        throw std::invalid_argument("covariance size " + std::to_string(k.size()) +
                                    " does not match autocorrelation size " + std::to_string(r.size()));
    }
}

void require_moment_args(double kurtosis, double j_min) {
    if (!(kurtosis >= 1.0)) {
        throw std::invalid_argument("kurtosis must be at least 1");
    }
    if (!(j_min > 0.0)) {
        throw std::invalid_argument("minimum MSE must be positive");
    }
}

void require_step(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("step size must be positive");
    }
}

} // namespace

CovMatrix::CovMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("covariance matrix must be square and non-empty");
    }
    const double scale = entries_.cwiseAbs().maxCoeff();
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("covariance matrix must be symmetric");
    }
}

CovMatrix CovMatrix::scaled_identity(double scale, std::size_t n) {
    const auto size = static_cast<Eigen::Index>(n);
    CovMatrix k(scale * Eigen::MatrixXd::Identity(size, size));
    k.identity_scale_ = scale;
    return k;
}

double trace_kr(const CovMatrix& k, const AutocorrMatrix& r) {
    require_same_size(k, r);
    if (const auto c = k.identity_scale()) {
        return *c * r.trace();
    }
    // tr(KR) = sum_ij K_ij R_ji, and R is symmetric.
    return k.matrix().cwiseProduct(r.matrix()).sum();
}

double trace_rkrk(const CovMatrix& k, const AutocorrMatrix& r) {
    require_same_size(k, r);
    if (const auto c = k.identity_scale()) {
        return *c * *c * r.trace_of_square();
    }
    // tr(RKRK) = ||RK||_F^2 only when RK is symmetric, so use tr(M M) with M = RK.
    const Eigen::MatrixXd m = r.matrix() * k.matrix();
    return m.cwiseProduct(m.transpose()).sum();
}

CovMatrix weight_error_cov_lms(double mu, double j_min, std::size_t n_taps) {
    require_step(mu);
    if (!(j_min > 0.0)) {
        throw std::invalid_argument("minimum MSE must be positive");
    }
    if (n_taps == 0) {
        throw std::invalid_argument("n_taps must be at least 1");
    }
    return CovMatrix::scaled_identity(mu * j_min / 2.0, n_taps);
}

double steady_state_mse(double mu, double j_min, const AutocorrMatrix& r) {
    require_step(mu);
    if (!(j_min > 0.0)) {
        throw std::invalid_argument("minimum MSE must be positive");
    }
    return j_min * (1.0 + mu / 2.0 * r.trace());
}

double fourth_moment(double kurtosis, double j_min, const CovMatrix& k, const AutocorrMatrix& r) {
    require_moment_args(kurtosis, j_min);
    const double tkr = trace_kr(k, r);
    const double trkrk = trace_rkrk(k, r);
    return j_min * j_min * kurtosis + 6.0 * j_min * tkr + 3.0 * tkr * tkr + 6.0 * trkrk;
}

double var_e2_general(double kurtosis, double j_min, const CovMatrix& k, const AutocorrMatrix& r) {
    require_moment_args(kurtosis, j_min);
    const double tkr = trace_kr(k, r);
    const double trkrk = trace_rkrk(k, r);
    return (kurtosis - 1.0) * j_min * j_min + 4.0 * j_min * tkr + 2.0 * tkr * tkr + 6.0 * trkrk;
}

double var_e2_gaussian(double j_inf, const CovMatrix& k, const AutocorrMatrix& r) {
    if (!(j_inf > 0.0)) {
        throw std::invalid_argument("steady-state MSE must be positive");
    }
    return 2.0 * j_inf * j_inf + 6.0 * trace_rkrk(k, r);
}

double var_e2_lms(double kurtosis, double j_min, double mu, const AutocorrMatrix& r) {
    require_moment_args(kurtosis, j_min);
    require_step(mu);
    const double tr = r.trace();
    const double tr2 = r.trace_of_square();
    return j_min * j_min *
           ((kurtosis - 1.0) + 2.0 * mu * tr + mu * mu / 2.0 * (tr * tr + 3.0 * tr2));
}

Prediction predict(const FilterSpec& filter, const PlantSpec& plant, const SignalSpec& signal,
                   std::optional<double> confidence) {
    filter.validate();
    signal.validate();
    plant.noise.validate();
    if (plant.impulse_response.size() != filter.n_taps) {
        throw std::invalid_argument("impulse response length must equal n_taps");
    }

    const AutocorrMatrix r =
        ar1_autocorrelation_matrix(signal.ar1_coefficient, signal.input_variance, filter.n_taps);

    Prediction p;
    p.j_min = plant.noise.variance;
    p.kurtosis = theoretical_kurtosis(plant.noise.kind);
    p.effective_mu = filter.is_nlms()
                         ? effective_step(filter.step(), filter.n_taps, signal.input_variance)
                         : filter.step();
    p.step_load = p.effective_mu * r.trace();
    p.small_step_warning = p.step_load > kSmallStepLimit;

    // Work in units of the noise variance, rescale at the end.
    const double scale = p.j_min;
    const CovMatrix k = weight_error_cov_lms(p.effective_mu, 1.0, filter.n_taps);
    const double j_inf = steady_state_mse(p.effective_mu, 1.0, r);
    const double var_e2 = var_e2_lms(p.kurtosis, 1.0, p.effective_mu, r);
    const double e4 = fourth_moment(p.kurtosis, 1.0, k, r);

    p.j_inf = j_inf * scale;
    p.var_e2_inf = var_e2 * scale * scale;
    p.e4_inf = e4 * scale * scale;
    p.three_sigma_upper = lmsvar::three_sigma_upper(p.j_inf, p.var_e2_inf);
    if (confidence) {
        p.gaussian_bounds = gaussian_se_bounds(p.j_inf, *confidence);
    }
    return p;
}

} // namespace lmsvar
